#include "driftfilter/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "driftfilter/rng.hpp"

namespace df {

namespace {

// Columns ordered by decreasing eigenvalue, largest-magnitude entry positive.
Matrix top_eigvecs(const Matrix& x, int d, const char* side) {
  Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("ssa_align: eigendecomposition failed");
  const auto& vals = es.eigenvalues();  // ascending
  double tol = std::max(vals.cwiseAbs().maxCoeff(), 1.0) * 1e-12;
  int rank = 0;
  for (int i = 0; i < vals.size(); ++i)
    if (vals(i) > tol) ++rank;
  if (rank < d)
    throw std::invalid_argument(std::string("ssa_align: ") + side +
                                " covariance rank " + std::to_string(rank) +
                                " is below requested d=" + std::to_string(d));
  int m = static_cast<int>(cov.rows());
  Matrix v(m, d);
  for (int j = 0; j < d; ++j) {
    Vector col = es.eigenvectors().col(m - 1 - j);
    int arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0) col = -col;
    v.col(j) = col;
  }
  return v;
}

}  // namespace

SsaAligned ssa_align(const Matrix& train, const Matrix& test, int d) {
  if (train.cols() != test.cols())
    throw std::invalid_argument("ssa_align: feature count mismatch");
  if (d < 1 || d > train.cols())
    throw std::invalid_argument("ssa_align: need 1 <= d <= M");
  if (train.rows() < 2 || test.rows() < 2)
    throw std::invalid_argument("ssa_align: each split needs >= 2 samples");
  if (train.rows() < d || test.rows() < d)
    throw std::invalid_argument("ssa_align: each split needs >= d samples");
  SsaAligned out;
  out.model.t = top_eigvecs(train, d, "train");
  out.model.u = top_eigvecs(test, d, "test");
  out.model.d = d;
  out.z_train = train * out.model.t * out.model.t.transpose() * out.model.u;
  out.z_test = test * out.model.u;
  return out;
}

LinearClassifier svm_train(const LabeledDataset& data, double c_penalty,
                           uint64_t seed, int epochs) {
  if (c_penalty <= 0) throw std::invalid_argument("svm_train: C must be positive");
  int lo = 0, hi = 0;
  {
    std::vector<int> classes;
    for (int i = 0; i < data.y.size(); ++i) {
      int c = data.y(i);
      if (std::find(classes.begin(), classes.end(), c) == classes.end())
        classes.push_back(c);
    }
    if (classes.size() != 2)
      throw std::invalid_argument("svm_train: need exactly two classes, got " +
                                  std::to_string(classes.size()));
    lo = std::min(classes[0], classes[1]);
    hi = std::max(classes[0], classes[1]);
  }
  const int n = data.n();
  const int m = data.m();
  Vector yy(n);
  for (int i = 0; i < n; ++i) yy(i) = data.y(i) == lo ? 1.0 : -1.0;

  const double lam = 1.0 / (n * c_penalty);
  Rng rng(seed);
  Vector w = Vector::Zero(m);
  double b = 0.0;
  LinearClassifier best{w, b, c_penalty, lo, hi};
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  long t = 0;
  for (int ep = 0; ep < epochs; ++ep) {
    rng.shuffle(order);
    for (int i : order) {
      ++t;
      double eta = 1.0 / (lam * (t + n));
      double margin = yy(i) * (data.x.row(i).dot(w) + b);
      w *= (1.0 - eta * lam);
      if (margin < 1.0) {
        w += eta * yy(i) * data.x.row(i).transpose();
        b += eta * yy(i);
      }
    }
    LinearClassifier cand{w, b, c_penalty, lo, hi};
    double obj = svm_objective(cand, data);
    if (obj < best_obj) {
      best_obj = obj;
      best = cand;
    }
  }
  return best;
}

Labels svm_predict(const LinearClassifier& model, const Matrix& x) {
  if (x.cols() != model.weights.size())
    throw std::invalid_argument("svm_predict: feature count mismatch");
  Labels y(x.rows());
  for (int i = 0; i < x.rows(); ++i) {
    double v = x.row(i).dot(model.weights) + model.bias;
    y(i) = v >= 0.0 ? model.positive_class : model.negative_class;
  }
  return y;
}

double svm_objective(const LinearClassifier& model, const LabeledDataset& data) {
  double hinge = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    double yy = data.y(i) == model.positive_class ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - yy * (data.x.row(i).dot(model.weights) + model.bias));
  }
  return 0.5 * model.weights.squaredNorm() + model.c_penalty * hinge;
}

}  // namespace df
