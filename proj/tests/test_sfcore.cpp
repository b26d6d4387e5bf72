#include <doctest.h>

#include <cmath>

#include "driftfilter/rng.hpp"
#include "driftfilter/sfcore.hpp"
#include "test_util.hpp"

using namespace df;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("soft_abs matches its defining formula") {
  CHECK(soft_abs(0.0, 1e-8) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(soft_abs(3.0, 1e-8) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(soft_abs(-3.0, 1e-8) == soft_abs(3.0, 1e-8));
  CHECK(soft_abs(0.0, 0.25) == doctest::Approx(0.5));
}

TEST_CASE("identity input yields the identity representation") {
  Matrix w = Matrix::Identity(2, 2);
  Matrix x = Matrix::Identity(2, 2);
  ForwardCache c = sf_forward(w, x, 1e-16);
  CHECK((c.z - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
  auto [loss, grad] = sf_objective_and_gradient(w, x, 1e-16);
  CHECK(loss == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(grad.rows() == 2);
  CHECK(grad.cols() == 2);
}

TEST_CASE("outputs satisfy the range and unit-norm invariants") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    int L = rng.uniform_int(1, 8);
    int m = rng.uniform_int(2, 6);
    int n = rng.uniform_int(1, 40);
    Matrix w = random_matrix(rng, L, m);
    Matrix x = random_matrix(rng, n, m);
    ForwardCache c = sf_forward(w, x, 1e-8);
    CHECK(c.z.minCoeff() >= 0.0);
    CHECK(c.z.maxCoeff() <= 1.0);
    for (int i = 0; i < n; ++i)
      CHECK(std::abs(c.z.row(i).norm() - 1.0) < 1e-9);
    CHECK((c.row_norms.array() > 0).all());
    CHECK((c.col_norms.array() > 0).all());
  }
}

TEST_CASE("positive scaling of the data cancels in normalization") {
  // Inputs bounded away from zero keep the soft-abs smoothing negligible.
  Rng rng(5);
  Matrix w(3, 2), x(6, 2);
  for (int i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(0.5, 2.0);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(0.5, 2.0);
  Matrix z1 = sf_forward(w, x, 1e-14).z;
  for (double c : {0.5, 2.0, 100.0}) {
    Matrix z2 = sf_forward(w, c * x, 1e-14).z;
    CHECK((z1 - z2).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("objective stays within the l1/l2 bounds for unit rows") {
  Rng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    int L = rng.uniform_int(2, 8);
    int n = rng.uniform_int(2, 30);
    Matrix w = random_matrix(rng, L, 3);
    Matrix x = random_matrix(rng, n, 3);
    double loss = sf_objective_and_gradient(w, x, 1e-8).first;
    CHECK(loss >= n - 1e-9);
    CHECK(loss <= n * std::sqrt(static_cast<double>(L)) + 1e-9);
  }
}

TEST_CASE("analytic gradient agrees with central differences") {
  Rng rng(31);
  const double h = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    int L = rng.uniform_int(2, 5);
    int m = rng.uniform_int(2, 4);
    int n = rng.uniform_int(3, 10);
    Matrix w = random_matrix(rng, L, m);
    Matrix x = random_matrix(rng, n, m);
    Matrix grad = sf_objective_and_gradient(w, x, 1e-8).second;
    double worst = 0.0;
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < m; ++j) {
        Matrix wp = w, wm = w;
        wp(i, j) += h;
        wm(i, j) -= h;
        double fd = (sf_objective_and_gradient(wp, x, 1e-8).first -
                     sf_objective_and_gradient(wm, x, 1e-8).first) /
                    (2 * h);
        double rel = std::abs(grad(i, j) - fd) /
                     std::max({std::abs(grad(i, j)), std::abs(fd), 1e-10});
        worst = std::max(worst, rel);
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("training is deterministic given seed and data") {
  Rng rng(47);
  Matrix x = random_matrix(rng, 30, 2);
  TrainConfig cfg;
  cfg.features = 2;
  cfg.max_iters = 50;
  cfg.seed = 9;
  auto [w1, t1] = sf_train(x, cfg);
  auto [w2, t2] = sf_train(x, cfg);
  CHECK(same(w1, w2));
  CHECK(t1.loss == t2.loss);
  CHECK(t1.selected == cfg.max_iters - 1);
}

TEST_CASE("line search makes the loss trace non-increasing") {
  Rng rng(53);
  Matrix x = random_matrix(rng, 40, 3);
  TrainConfig cfg;
  cfg.features = 3;
  cfg.max_iters = 80;
  cfg.line_search = true;
  auto [w, trace] = sf_train(x, cfg);
  for (size_t i = 1; i < trace.loss.size(); ++i)
    CHECK(trace.loss[i] <= trace.loss[i - 1] + 1e-12);
}

TEST_CASE("early stopping returns the KS-argmin snapshot") {
  Rng rng(61);
  Matrix x = random_matrix(rng, 50, 2);
  TrainConfig cfg;
  cfg.features = 2;
  cfg.max_iters = 500;
  cfg.early_stop_window = 12;
  cfg.seed = 3;
  auto [w, trace] = sf_train(x, cfg, 30);
  REQUIRE(trace.ks.size() == 12);
  int argmin = 0;
  for (size_t i = 1; i < trace.ks.size(); ++i)
    if (trace.ks[i] < trace.ks[argmin]) argmin = static_cast<int>(i);
  CHECK(trace.selected == argmin);

  // The snapshot equals plain training stopped at the selected iteration.
  TrainConfig plain = cfg;
  plain.early_stop_window = 0;
  plain.max_iters = trace.selected + 1;
  auto [w_plain, t_plain] = sf_train(x, plain);
  CHECK(same(w, w_plain));

  CHECK_THROWS_AS(sf_train(x, cfg), std::invalid_argument);  // missing split
}

TEST_CASE("transform matches the training-time representation") {
  Rng rng(71);
  Matrix x = random_matrix(rng, 20, 2);
  TrainConfig cfg;
  cfg.features = 2;
  cfg.max_iters = 30;
  auto [w, trace] = sf_train(x, cfg);
  Matrix z = transform(w, x, cfg.epsilon);
  CHECK(same(z, sf_forward(w, x, cfg.epsilon).z));

  Matrix one = x.topRows(1);
  Matrix z1 = transform(w, one, cfg.epsilon);
  CHECK(std::abs(z1.row(0).norm() - 1.0) < 1e-12);
  CHECK(z.minCoeff() >= 0.0);
  CHECK(z.maxCoeff() <= 1.0);
}

TEST_CASE("shape and argument mismatches are rejected") {
  Matrix w = Matrix::Identity(2, 2);
  Matrix x = Matrix::Ones(3, 3);
  CHECK_THROWS_AS(sf_forward(w, x, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(sf_forward(w, Matrix::Ones(3, 2), 0.0), std::invalid_argument);
  TrainConfig bad;
  bad.features = 0;
  CHECK_THROWS_AS(sf_train(Matrix::Ones(4, 2), bad), std::invalid_argument);
}
