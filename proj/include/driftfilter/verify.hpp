#pragma once

#include <string>
#include <vector>

#include "driftfilter/data.hpp"
#include "driftfilter/psf.hpp"
#include "driftfilter/rng.hpp"
#include "driftfilter/sfcore.hpp"

namespace df {

struct CheckReport {
  std::string name;
  bool passed = false;
  double worst_violation = 0.0;
  int instances = 0;
  std::string details;
};

// Moment bounds for a representation with n samples and (for the first pair)
// per-feature sparsity level k.
struct Prop2Bounds {
  int n = 0;
  int k = 0;
  double epsilon = 0.0;
  double mean_lo = 0.0, mean_hi = 0.0;
  double var_lo = 0.0, var_hi = 0.0;
  // sparsity-free bounds: mean in (epsilon, 1], variance in [0, 1 - epsilon^2)
  double gen_mean_lo = 0.0, gen_mean_hi = 1.0;
  double gen_var_lo = 0.0, gen_var_hi = 1.0;
};

// Entries in [0,1] and unit per-sample l2 norm (tolerance 1e-9).
CheckReport check_range_and_norm(const Matrix& z);

Prop2Bounds prop2_bounds(int n, int k, double epsilon);

// Loose moment bounds asserted; k-sparse bounds reported only.
CheckReport check_prop2_empirical(const Matrix& z, double activity_threshold = 0.01);

// Pairs each sample x with x + W^{-1} * kappa * pi in one batch. Even kappa
// components are asserted to give identical representations (l-inf <= 1e-8);
// odd components are measured and reported without an assertion.
CheckReport check_periodicity(const Matrix& w, const Matrix& x, const Labels& kappa,
                              const PsfConfig& cfg);

// Builds x2 = k * x1 + b with per-component bias budget
// b_j <= x1_j * sqrt(2*delta - delta^2), rejection-sampled so that
// |W b| <= sqrt(2*delta - delta^2) * |W x1| holds row-wise (the regime the
// displacement bound is derived in), then asserts the measured representation
// distance against the bound computed from the cached per-sample norms.
CheckReport check_cosine_bound(const Matrix& w, const Vector& x1, double k_col,
                               double delta, Rng& rng, int filler_samples = 18);

enum class Objective { SF, PSF };

// Central-difference comparison per weight entry; relative error
// |g_an - g_fd| / max(|g_an|, |g_fd|, 1e-10) must stay within tol.
CheckReport gradient_check(Objective obj, int L, int M, int N, uint64_t seed,
                           double h = 1e-6, double tol = 1e-4);

// Full suite with the given base seed, as emitted by the `verify` subcommand.
std::vector<CheckReport> run_all_checks(uint64_t seed);

}  // namespace df
