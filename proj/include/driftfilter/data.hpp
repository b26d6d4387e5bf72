#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace df {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = Eigen::VectorXi;

inline constexpr int UNLABELED = -1;

// Sample-major: N rows (samples) x M columns (features).
struct LabeledDataset {
  Matrix x;
  Labels y;  // entries in {1..C} or UNLABELED

  int n() const { return static_cast<int>(x.rows()); }
  int m() const { return static_cast<int>(x.cols()); }
};

// Train/target/test triple. Target labels are kept for diagnostics; adapters
// must treat the target split as unlabeled.
struct ShiftedBenchmark {
  LabeledDataset train;
  LabeledDataset target;
  LabeledDataset test;
  uint64_t seed = 0;
};

// Two Gaussian cones, shifted center between domains.
ShiftedBenchmark gen_radial(int n_train, int n_test, uint64_t seed);
// Periodic label stripes, domain centers a full period apart.
ShiftedBenchmark gen_periodic(int n_train, int n_test, uint64_t seed);
// Two-component Gaussian mixtures with a smooth tanh label boundary.
ShiftedBenchmark gen_smooth(int n_train, int n_test, uint64_t seed);
// Noisy diagonal band, mirrored to the opposite quadrant at test time.
ShiftedBenchmark gen_diagonal(int n_train, int n_test, uint64_t seed);

ShiftedBenchmark gen_benchmark(const std::string& name, int n_train, int n_test,
                               uint64_t seed);

void write_csv(const std::string& path, const LabeledDataset& d);
LabeledDataset read_csv(const std::string& path);

}  // namespace df
