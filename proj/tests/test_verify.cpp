#include <doctest.h>

#include <cmath>

#include "driftfilter/verify.hpp"

using namespace df;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("range and norm check passes on real outputs and flags violations") {
  Rng rng(3);
  Matrix w = random_matrix(rng, 3, 2);
  Matrix x = random_matrix(rng, 10, 2);
  CHECK(check_range_and_norm(sf_forward(w, x, 1e-8).z).passed);

  Matrix basis(1, 3);
  basis << 1.0, 0.0, 0.0;
  CHECK(check_range_and_norm(basis).passed);

  Matrix bad(1, 2);
  bad << 1.5, 0.0;
  CheckReport r = check_range_and_norm(bad);
  CHECK_FALSE(r.passed);
  CHECK(r.worst_violation == doctest::Approx(0.5));
}

TEST_CASE("moment bounds follow the closed forms") {
  Prop2Bounds b = prop2_bounds(100, 5, 0.0);
  CHECK(b.mean_lo == doctest::Approx(0.01));
  CHECK(b.mean_hi == doctest::Approx(0.05));
  CHECK(b.var_lo == doctest::Approx(0.0075));
  CHECK(b.var_hi == doctest::Approx(0.0499));

  Prop2Bounds two = prop2_bounds(2, 1, 0.0);
  CHECK(two.mean_lo == doctest::Approx(0.5));
  CHECK(two.mean_hi == doctest::Approx(0.5));
  CHECK(two.var_lo == doctest::Approx(0.25));
  CHECK(two.var_hi == doctest::Approx(0.25));
  // cross-check with the exact two-sample one-hot feature (values 1 and 0):
  // mean 1/2, population variance 1/4
  CHECK(two.var_lo == doctest::Approx(0.25));

  CHECK_THROWS_AS(prop2_bounds(5, 5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prop2_bounds(5, 0, 0.0), std::invalid_argument);
}

TEST_CASE("sparsity-free bounds contain the k-sparse bounds when k <= sqrt(n)") {
  for (int n = 2; n <= 50; ++n) {
    for (int k = 1; k * k <= n; ++k) {
      Prop2Bounds b = prop2_bounds(n, k, 0.0);
      CHECK(b.mean_lo >= b.gen_mean_lo);
      CHECK(b.mean_hi <= b.gen_mean_hi);
      CHECK(b.var_lo >= b.gen_var_lo);
      CHECK(b.var_hi <= b.gen_var_hi);
    }
  }
}

TEST_CASE("empirical moment check passes loose bounds and reports k") {
  Rng rng(5);
  Matrix w = random_matrix(rng, 4, 2);
  Matrix x = random_matrix(rng, 30, 2);
  CheckReport r = check_prop2_empirical(sf_forward(w, x, 1e-8).z);
  CHECK(r.passed);
  CHECK(r.details.find("estimated k=") != std::string::npos);

  // all-equal rows: per-feature variance zero, still inside the loose bounds
  Matrix uniform = Matrix::Constant(10, 4, 0.5);
  CHECK(check_prop2_empirical(uniform).passed);

  CheckReport vac = check_prop2_empirical(uniform, 2.0);
  CHECK(vac.details.find("vacuous") != std::string::npos);
}

TEST_CASE("even-period shifts leave representations identical") {
  PsfConfig cfg;
  cfg.base.features = 2;
  cfg.lambda = {1.0};

  Matrix eye = Matrix::Identity(2, 2);
  Matrix x(3, 2);
  x << 0.3, -1.2, 2.0, 0.1, -0.7, 0.9;
  Labels kappa(2);
  kappa << 2, 0;
  CheckReport r = check_periodicity(eye, x, kappa, cfg);
  CHECK(r.passed);
  CHECK(r.worst_violation <= 1e-8);

  kappa << 0, 0;
  CHECK(check_periodicity(eye, x, kappa, cfg).passed);

  Rng rng(7);
  PsfConfig cfg3;
  cfg3.base.features = 3;
  cfg3.lambda = {1.0};
  Labels k3(3);
  k3 << 2, 4, -2;
  for (int rep = 0; rep < 5; ++rep) {
    Matrix w;
    do {
      w = random_matrix(rng, 3, 3);
    } while (std::abs(w.determinant()) < 1e-2);
    Matrix pts = random_matrix(rng, 20, 3);
    CHECK(check_periodicity(w, pts, k3, cfg3).passed);
  }
}

TEST_CASE("odd-period shifts are reported, not asserted") {
  PsfConfig cfg;
  cfg.base.features = 2;
  cfg.lambda = {1.0};
  Rng rng(9);
  Matrix w;
  do {
    w = random_matrix(rng, 2, 2);
  } while (std::abs(w.determinant()) < 1e-2);
  Matrix x = random_matrix(rng, 5, 2);
  Labels kappa(2);
  kappa << 1, 2;
  CheckReport r = check_periodicity(w, x, kappa, cfg);
  CHECK(r.passed);
  CHECK(r.details.find("odd-kappa") != std::string::npos);
}

TEST_CASE("periodicity preconditions") {
  PsfConfig cfg;
  cfg.base.features = 2;
  cfg.lambda = {1.0};
  Matrix singular = Matrix::Ones(2, 2);
  Matrix x = Matrix::Ones(3, 2);
  Labels kappa(2);
  kappa << 2, 2;
  CHECK_THROWS_AS(check_periodicity(singular, x, kappa, cfg), std::invalid_argument);
  Matrix rect = Matrix::Ones(2, 3);
  CHECK_THROWS_AS(check_periodicity(rect, x, kappa, cfg), std::invalid_argument);
}

TEST_CASE("near-collinear pairs respect the distance bound") {
  Rng rng(101);
  int passes = 0;
  for (int i = 0; i < 100; ++i) {
    int L = rng.uniform_int(2, 8);
    int m = rng.uniform_int(2, 5);
    Matrix w = random_matrix(rng, L, m);
    Vector x1(m);
    for (int j = 0; j < m; ++j) x1(j) = rng.uniform(0.1, 2.0);
    double k = 1.0 + rng.uniform(0.01, 2.0);
    CheckReport r = check_cosine_bound(w, x1, k, 1e-3, rng);
    if (r.passed) ++passes;
  }
  CHECK(passes == 100);
}

TEST_CASE("a vanishing budget approaches the collinear case with slack") {
  Rng rng(103);
  Matrix w = random_matrix(rng, 3, 2);
  Vector x1(2);
  x1 << 1.0, 0.5;
  CheckReport r = check_cosine_bound(w, x1, 2.0, 1e-12, rng);
  CHECK(r.passed);
}

TEST_CASE("the constructed pair stays within the cosine budget") {
  // Worst-case bias b = x1 * sqrt(2*delta - delta^2) keeps the cosine
  // distance within delta.
  double delta = 1e-3;
  double c = std::sqrt(2 * delta - delta * delta);
  Vector x1(3);
  x1 << 0.4, 1.1, 2.0;
  Vector x2 = 2.5 * x1 + c * x1;
  double cos_dist = 1.0 - x1.dot(x2) / (x1.norm() * x2.norm());
  CHECK(cos_dist <= delta);
}

TEST_CASE("cosine bound preconditions") {
  Rng rng(107);
  Matrix w = Matrix::Identity(2, 2);
  Vector x1(2);
  x1 << 1.0, 1.0;
  CHECK_THROWS_AS(check_cosine_bound(w, x1, 1.0, 1e-3, rng), std::invalid_argument);
  CHECK_THROWS_AS(check_cosine_bound(w, x1, 2.0, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(check_cosine_bound(w, Vector::Zero(2), 2.0, 1e-3, rng),
                  std::invalid_argument);
}

TEST_CASE("gradient checks pass for both objectives") {
  CHECK(gradient_check(Objective::SF, 3, 2, 5, 1).passed);
  CHECK(gradient_check(Objective::PSF, 4, 3, 6, 2).passed);
  // zero-adjacent weights still give a numerically sound comparison
  CHECK(gradient_check(Objective::PSF, 2, 2, 4, 3).passed);
  CHECK_THROWS_AS(gradient_check(Objective::SF, 2, 2, 3, 1, 1e-2),
                  std::invalid_argument);
}

TEST_CASE("the aggregated suite runs and reports per-check names") {
  auto reports = run_all_checks(17);
  REQUIRE(reports.size() >= 4);
  for (const auto& r : reports) {
    CHECK(r.passed);
    CHECK(r.instances > 0);
    CHECK_FALSE(r.name.empty());
  }
}
