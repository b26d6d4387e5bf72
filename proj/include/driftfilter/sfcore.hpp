#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "driftfilter/data.hpp"

namespace df {

using WeightMatrix = Matrix;  // L rows (learned features) x M columns (inputs)

enum class Nonlinearity { SoftAbs, Sine, Cosine };

// Intermediates of the forward pass. h, f, f_tilde are L x N (feature-major);
// z is N x L (sample-major) so downstream code can treat rows as samples.
struct ForwardCache {
  Matrix h;        // W * X^T
  Matrix f;        // nonlinearity applied to h
  Matrix f_tilde;  // f, each feature row scaled to unit l2 norm over samples
  Matrix z;        // f_tilde columns scaled to unit l2 norm, transposed to N x L
  Vector row_norms;  // per-feature constants, length L
  Vector col_norms;  // per-sample constants, length N
};

struct TrainConfig {
  int features = 2;  // L, rows of the learned weight matrix
  double epsilon = 1e-8;
  double step = 0.01;
  int max_iters = 500;
  uint64_t seed = 0;
  int early_stop_window = 0;  // 0 disables the KS-argmin rule
  bool line_search = false;
};

struct TrainTrace {
  std::vector<double> loss;
  std::vector<double> ks;  // filled only when early stopping is on
  int selected = -1;       // iteration whose weights were returned
};

double soft_abs(double x, double epsilon);

// Shared forward pass; the weighting of the objective is what differs between
// the unsupervised and supervised variants.
ForwardCache forward_pass(const Matrix& w, const Matrix& x, double epsilon,
                          Nonlinearity g);

// loss = sum of entry_weights .* Z (feature-major L x N view of Z);
// entry_weights == nullptr means all-ones. Returns (loss, dloss/dW).
std::pair<double, Matrix> weighted_objective_and_gradient(
    const Matrix& w, const Matrix& x, double epsilon, Nonlinearity g,
    const Matrix* entry_weights);

ForwardCache sf_forward(const Matrix& w, const Matrix& x, double epsilon);

std::pair<double, Matrix> sf_objective_and_gradient(const Matrix& w, const Matrix& x,
                                                    double epsilon);

// Trains on the concatenated adaptation batch. n_train (leading rows of
// x_adapt) is required when the KS early-stop window is set; the remaining
// rows are treated as the target split for the stopping metric.
std::pair<WeightMatrix, TrainTrace> sf_train(const Matrix& x_adapt,
                                             const TrainConfig& cfg, int n_train = 0);

Matrix transform(const Matrix& w, const Matrix& batch, double epsilon,
                 Nonlinearity g = Nonlinearity::SoftAbs);

namespace detail {
// Gradient-descent loop shared by the unsupervised and supervised trainers.
std::pair<WeightMatrix, TrainTrace> train_loop(const Matrix& x_adapt,
                                               const TrainConfig& cfg, Nonlinearity g,
                                               const Matrix* entry_weights, int L,
                                               int n_train);
}  // namespace detail

}  // namespace df
