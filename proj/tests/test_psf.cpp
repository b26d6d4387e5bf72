#include <doctest.h>

#include <cmath>

#include "driftfilter/psf.hpp"
#include "driftfilter/rng.hpp"
#include "test_util.hpp"

using namespace df;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

PsfConfig basic_config(int L, double lambda = 1.0,
                       Nonlinearity g = Nonlinearity::Sine) {
  PsfConfig cfg;
  cfg.base.features = L;
  cfg.lambda = {lambda};
  cfg.nonlinearity = g;
  return cfg;
}

}  // namespace

TEST_CASE("default masks assign features to classes evenly and contiguously") {
  FeatureMask m = build_mask(2, 2);
  Eigen::MatrixXi expected(3, 2);
  expected << 1, 0, 0, 1, 0, 0;
  CHECK(same(m.m, expected));

  std::vector<int> sizes{2, 2, 1};
  FeatureMask m5 = build_mask(2, 5, &sizes);
  Eigen::MatrixXi e5(3, 5);
  e5 << 1, 1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 1;
  CHECK(same(m5.m, e5));

  // Default split with remainder: two classes over five features.
  FeatureMask md = build_mask(2, 5);
  CHECK(same(md.m, e5));
  for (int j = 0; j < 5; ++j) CHECK(md.m.col(j).sum() == 1);
}

TEST_CASE("mask construction rejects impossible partitions") {
  CHECK_THROWS_AS(build_mask(3, 2), std::invalid_argument);
  std::vector<int> bad_sum{2, 2, 2};
  CHECK_THROWS_AS(build_mask(2, 5, &bad_sum), std::invalid_argument);
  std::vector<int> empty_class{0, 4, 1};
  CHECK_THROWS_AS(build_mask(2, 5, &empty_class), std::invalid_argument);
}

TEST_CASE("zero weights give the uniform representation") {
  for (auto g : {Nonlinearity::Sine, Nonlinearity::Cosine}) {
    PsfConfig cfg = basic_config(2, 1.0, g);
    Matrix w = Matrix::Zero(2, 3);
    Rng rng(1);
    Matrix x = random_matrix(rng, 4, 3);
    ForwardCache c = psf_forward(w, x, cfg);
    CHECK((c.z.array() - 1.0 / std::sqrt(2.0)).abs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("forward outputs satisfy the range and norm invariants") {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    int L = rng.uniform_int(2, 8);
    int m = rng.uniform_int(2, 5);
    int n = rng.uniform_int(1, 30);
    PsfConfig cfg = basic_config(L);
    Matrix w = random_matrix(rng, L, m);
    Matrix x = random_matrix(rng, n, m);
    ForwardCache c = psf_forward(w, x, cfg);
    CHECK(c.z.minCoeff() >= 0.0);
    CHECK(c.z.maxCoeff() <= 1.0);
    for (int i = 0; i < n; ++i) CHECK(std::abs(c.z.row(i).norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("zero lambda reduces the loss to the plain l1 objective") {
  Rng rng(17);
  Matrix w = random_matrix(rng, 3, 2);
  Matrix x = random_matrix(rng, 8, 2);
  Labels y(8);
  for (int i = 0; i < 8; ++i) y(i) = 1 + (i % 2);
  FeatureMask mask = build_mask(2, 3);
  PsfConfig cfg = basic_config(3, 0.0);
  auto [loss, grad] = psf_objective_and_gradient(w, x, y, mask, cfg);
  CHECK(loss == doctest::Approx(psf_forward(w, x, cfg).z.sum()).epsilon(1e-12));
}

TEST_CASE("hand-evaluated block loss for zero weights") {
  // Four samples of class 1, two features, one per class, lambda = 1:
  // all entries 1/sqrt(2), loss = 8/sqrt(2) - 4/sqrt(2).
  Matrix w = Matrix::Zero(2, 3);
  Matrix x = Matrix::Ones(4, 3);
  Labels y = Labels::Constant(4, 1);
  FeatureMask mask = build_mask(2, 2);
  PsfConfig cfg = basic_config(2, 1.0);
  double loss = psf_objective_and_gradient(w, x, y, mask, cfg).first;
  CHECK(loss == doctest::Approx(4.0 / std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("analytic gradient agrees with central differences") {
  Rng rng(19);
  const double h = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    int L = rng.uniform_int(2, 5);
    int m = rng.uniform_int(2, 4);
    int n = rng.uniform_int(4, 10);
    Matrix w = random_matrix(rng, L, m);
    Matrix x = random_matrix(rng, n, m);
    Labels y(n);
    for (int i = 0; i < n; ++i) {
      int draw = rng.uniform_int(0, 2);
      y(i) = draw == 2 ? UNLABELED : draw + 1;  // unlabeled rows included
    }
    y(0) = 1;
    y(1) = 2;
    FeatureMask mask = build_mask(2, L);
    PsfConfig cfg = basic_config(L, 0.7);
    Matrix grad = psf_objective_and_gradient(w, x, y, mask, cfg).second;
    double worst = 0.0;
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < m; ++j) {
        Matrix wp = w, wm = w;
        wp(i, j) += h;
        wm(i, j) -= h;
        double fd = (psf_objective_and_gradient(wp, x, y, mask, cfg).first -
                     psf_objective_and_gradient(wm, x, y, mask, cfg).first) /
                    (2 * h);
        double rel = std::abs(grad(i, j) - fd) /
                     std::max({std::abs(grad(i, j)), std::abs(fd), 1e-10});
        worst = std::max(worst, rel);
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("loss is affine and non-increasing in each lambda") {
  Rng rng(29);
  Matrix w = random_matrix(rng, 4, 3);
  Matrix x = random_matrix(rng, 10, 3);
  Labels y(10);
  for (int i = 0; i < 10; ++i) y(i) = 1 + (i % 2);
  FeatureMask mask = build_mask(2, 4);
  double prev = std::numeric_limits<double>::infinity();
  std::vector<double> losses;
  for (double lam : {0.0, 0.5, 1.0, 2.0}) {
    PsfConfig cfg = basic_config(4, lam);
    double loss = psf_objective_and_gradient(w, x, y, mask, cfg).first;
    CHECK(loss <= prev + 1e-12);
    prev = loss;
    losses.push_back(loss);
  }
  // affine: equal lambda increments give equal decrements
  CHECK(losses[2] - losses[1] == doctest::Approx(losses[1] - losses[0]).epsilon(1e-9));
}

TEST_CASE("shifting by an even period leaves representations unchanged") {
  Rng rng(37);
  const double pi = 3.14159265358979323846;
  Matrix w;
  do {
    w = random_matrix(rng, 2, 2);
  } while (std::abs(w.determinant()) < 1e-2);
  Matrix x = random_matrix(rng, 6, 2);
  Vector kappa(2);
  kappa << 2, -4;
  Vector shift = w.colPivHouseholderQr().solve(kappa * pi);
  Matrix batch(12, 2);
  batch.topRows(6) = x;
  batch.bottomRows(6) = x.rowwise() + shift.transpose();
  PsfConfig cfg = basic_config(2);
  ForwardCache c = psf_forward(w, batch, cfg);
  for (int i = 0; i < 6; ++i)
    CHECK((c.z.row(i) - c.z.row(6 + i)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("training is deterministic and honors early stopping") {
  auto make_data = [](uint64_t seed) {
    Rng rng(seed);
    LabeledDataset train;
    train.x = random_matrix(rng, 30, 2);
    train.y.resize(30);
    for (int i = 0; i < 30; ++i) train.y(i) = 1 + (i % 2);
    Matrix target = random_matrix(rng, 15, 2);
    return std::make_pair(train, target);
  };
  auto [train, target] = make_data(101);
  PsfConfig cfg = basic_config(2);
  cfg.base.max_iters = 40;
  cfg.base.seed = 5;
  auto r1 = psf_train(train, target, cfg);
  auto r2 = psf_train(train, target, cfg);
  CHECK(same(r1.w, r2.w));

  cfg.base.early_stop_window = 15;
  auto r3 = psf_train(train, target, cfg);
  REQUIRE(r3.trace.ks.size() == 15);
  CHECK(r3.trace.ks.size() <= 50);
  int argmin = 0;
  for (size_t i = 1; i < r3.trace.ks.size(); ++i)
    if (r3.trace.ks[i] < r3.trace.ks[argmin]) argmin = static_cast<int>(i);
  CHECK(r3.trace.selected == argmin);
}

TEST_CASE("invalid labels and configs are rejected") {
  Matrix w = Matrix::Ones(2, 2);
  Matrix x = Matrix::Ones(4, 2);
  Labels y = Labels::Constant(4, 3);  // class 3 with a two-class mask
  FeatureMask mask = build_mask(2, 2);
  PsfConfig cfg = basic_config(2);
  CHECK_THROWS_AS(psf_objective_and_gradient(w, x, y, mask, cfg),
                  std::invalid_argument);
  cfg.nonlinearity = Nonlinearity::SoftAbs;
  CHECK_THROWS_AS(psf_forward(w, x, cfg), std::invalid_argument);

  LabeledDataset train;
  train.x = x;
  train.y = Labels::Constant(4, UNLABELED);
  PsfConfig cfg2 = basic_config(2);
  CHECK_THROWS_AS(psf_train(train, x, cfg2), std::invalid_argument);
}
