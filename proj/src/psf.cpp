#include "driftfilter/psf.hpp"

#include <numeric>
#include <stdexcept>

namespace df {

namespace {

std::vector<double> broadcast_lambda(const PsfConfig& cfg, int num_classes) {
  if (cfg.lambda.empty())
    throw std::invalid_argument("psf: lambda must have at least one entry");
  std::vector<double> lam = cfg.lambda;
  if (static_cast<int>(lam.size()) == 1) lam.assign(num_classes, lam[0]);
  if (static_cast<int>(lam.size()) != num_classes)
    throw std::invalid_argument("psf: lambda length must be 1 or C");
  return lam;
}

// 1 everywhere, 1 - lambda_c on entries (feature j, sample i) with y_i = c and
// feature j in class c's group.
Matrix entry_weights(const Labels& y, const FeatureMask& mask,
                     const std::vector<double>& lam, int L, int n) {
  Matrix a = Matrix::Ones(L, n);
  for (int i = 0; i < n; ++i) {
    int c = y(i);
    if (c == UNLABELED) continue;
    if (c < 1 || c > mask.classes())
      throw std::invalid_argument("psf: label outside mask classes");
    for (int j = 0; j < L; ++j)
      if (mask.m(c - 1, j) == 1) a(j, i) = 1.0 - lam[c - 1];
  }
  return a;
}

}  // namespace

FeatureMask build_mask(int num_classes, int num_features,
                       const std::vector<int>* group_sizes) {
  if (num_classes < 1 || num_features < 1)
    throw std::invalid_argument("build_mask: need C >= 1 and L >= 1");
  std::vector<int> sizes;
  if (group_sizes) {
    sizes = *group_sizes;
    if (static_cast<int>(sizes.size()) != num_classes + 1)
      throw std::invalid_argument("build_mask: group_sizes must have C+1 entries");
    if (std::accumulate(sizes.begin(), sizes.end(), 0) != num_features)
      throw std::invalid_argument("build_mask: group sizes must sum to L");
    for (int c = 0; c < num_classes; ++c)
      if (sizes[c] < 1)
        throw std::invalid_argument("build_mask: labeled group of size 0");
    if (sizes[num_classes] < 0)
      throw std::invalid_argument("build_mask: negative group size");
  } else {
    if (num_features < num_classes)
      throw std::invalid_argument("build_mask: fewer features than classes");
    int per = num_features / num_classes;
    sizes.assign(num_classes, per);
    sizes.push_back(num_features - per * num_classes);
  }
  FeatureMask mask;
  mask.m = Eigen::MatrixXi::Zero(num_classes + 1, num_features);
  int offset = 0;
  for (int c = 0; c <= num_classes; ++c) {
    for (int k = 0; k < sizes[c]; ++k) mask.m(c, offset + k) = 1;
    offset += sizes[c];
  }
  return mask;
}

ForwardCache psf_forward(const Matrix& w, const Matrix& x, const PsfConfig& cfg) {
  if (cfg.nonlinearity == Nonlinearity::SoftAbs)
    throw std::invalid_argument("psf_forward: nonlinearity must be sine or cosine");
  return forward_pass(w, x, cfg.base.epsilon, cfg.nonlinearity);
}

std::pair<double, Matrix> psf_objective_and_gradient(const Matrix& w, const Matrix& x,
                                                     const Labels& y,
                                                     const FeatureMask& mask,
                                                     const PsfConfig& cfg) {
  if (y.size() != x.rows())
    throw std::invalid_argument("psf_objective_and_gradient: label length mismatch");
  if (mask.features() != w.rows())
    throw std::invalid_argument("psf_objective_and_gradient: mask/weights mismatch");
  auto lam = broadcast_lambda(cfg, mask.classes());
  Matrix a = entry_weights(y, mask, lam, static_cast<int>(w.rows()),
                           static_cast<int>(x.rows()));
  return weighted_objective_and_gradient(w, x, cfg.base.epsilon, cfg.nonlinearity, &a);
}

PsfResult psf_train(const LabeledDataset& train, const Matrix& target,
                    const PsfConfig& cfg) {
  if (train.x.cols() != target.cols())
    throw std::invalid_argument("psf_train: feature count mismatch");
  int num_classes = 0;
  for (int i = 0; i < train.y.size(); ++i) {
    if (train.y(i) == UNLABELED)
      throw std::invalid_argument("psf_train: train split must be fully labeled");
    num_classes = std::max(num_classes, train.y(i));
  }
  if (num_classes < 1) throw std::invalid_argument("psf_train: no labels");
  int L = cfg.base.features;
  FeatureMask mask = build_mask(num_classes, L,
                                cfg.group_sizes.empty() ? nullptr : &cfg.group_sizes);
  auto lam = broadcast_lambda(cfg, num_classes);

  int n_train = train.n();
  Matrix x(n_train + target.rows(), train.x.cols());
  x << train.x, target;
  Labels y(x.rows());
  y.head(n_train) = train.y;
  y.tail(target.rows()).setConstant(UNLABELED);

  Matrix a = entry_weights(y, mask, lam, L, static_cast<int>(x.rows()));
  auto [w, trace] =
      detail::train_loop(x, cfg.base, cfg.nonlinearity, &a, L, n_train);
  return {std::move(w), std::move(mask), std::move(trace)};
}

}  // namespace df
