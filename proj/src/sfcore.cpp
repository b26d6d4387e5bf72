#include "driftfilter/sfcore.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "driftfilter/metrics.hpp"
#include "driftfilter/rng.hpp"

namespace df {

double soft_abs(double x, double epsilon) { return std::sqrt(x * x + epsilon); }

ForwardCache forward_pass(const Matrix& w, const Matrix& x, double epsilon,
                          Nonlinearity g) {
  if (w.cols() != x.cols())
    throw std::invalid_argument("forward_pass: feature count mismatch");
  if (epsilon <= 0) throw std::invalid_argument("forward_pass: epsilon must be > 0");
  ForwardCache c;
  c.h = w * x.transpose();  // L x N
  switch (g) {
    case Nonlinearity::SoftAbs:
      c.f = (c.h.array().square() + epsilon).sqrt();
      break;
    case Nonlinearity::Sine:
      c.f = 1.0 + epsilon + c.h.array().sin();
      break;
    case Nonlinearity::Cosine:
      c.f = 1.0 + epsilon + c.h.array().cos();
      break;
  }
  c.row_norms = c.f.rowwise().norm();
  if ((c.row_norms.array() <= 0).any())
    throw std::runtime_error("forward_pass: zero feature norm");
  c.f_tilde = c.f.array().colwise() / c.row_norms.array();
  c.col_norms = c.f_tilde.colwise().norm();
  if ((c.col_norms.array() <= 0).any())
    throw std::runtime_error("forward_pass: zero sample norm");
  Matrix z_fm = c.f_tilde.array().rowwise() / c.col_norms.transpose().array();
  c.z = z_fm.transpose();
  if (!c.z.allFinite()) throw std::runtime_error("forward_pass: non-finite output");
  return c;
}

std::pair<double, Matrix> weighted_objective_and_gradient(
    const Matrix& w, const Matrix& x, double epsilon, Nonlinearity g,
    const Matrix* entry_weights) {
  ForwardCache c = forward_pass(w, x, epsilon, g);
  Matrix z = c.z.transpose();  // L x N, feature-major like the cache
  Matrix a = entry_weights ? *entry_weights : Matrix::Ones(z.rows(), z.cols());
  if (a.rows() != z.rows() || a.cols() != z.cols())
    throw std::invalid_argument("weighted_objective_and_gradient: weight shape mismatch");
  double loss = (a.array() * z.array()).sum();

  // Backprop through the per-sample normalization, the per-feature
  // normalization, then the nonlinearity.
  Vector col_dot = (a.array() * z.array()).colwise().sum();
  Matrix d_ft = (a.array() - z.array().rowwise() * col_dot.transpose().array())
                    .rowwise() /
                c.col_norms.transpose().array();
  Vector row_dot = (d_ft.array() * c.f_tilde.array()).rowwise().sum();
  Matrix d_f = (d_ft.array() - c.f_tilde.array().colwise() * row_dot.array())
                   .colwise() /
               c.row_norms.array();
  Matrix d_h;
  switch (g) {
    case Nonlinearity::SoftAbs:
      d_h = d_f.array() * (c.h.array() / c.f.array());
      break;
    case Nonlinearity::Sine:
      d_h = d_f.array() * c.h.array().cos();
      break;
    case Nonlinearity::Cosine:
      d_h = d_f.array() * (-c.h.array().sin());
      break;
  }
  Matrix grad = d_h * x;  // L x M
  if (!std::isfinite(loss) || !grad.allFinite())
    throw std::runtime_error("weighted_objective_and_gradient: non-finite gradient");
  return {loss, grad};
}

ForwardCache sf_forward(const Matrix& w, const Matrix& x, double epsilon) {
  return forward_pass(w, x, epsilon, Nonlinearity::SoftAbs);
}

std::pair<double, Matrix> sf_objective_and_gradient(const Matrix& w, const Matrix& x,
                                                    double epsilon) {
  return weighted_objective_and_gradient(w, x, epsilon, Nonlinearity::SoftAbs, nullptr);
}

namespace detail {

std::pair<WeightMatrix, TrainTrace> train_loop(const Matrix& x_adapt,
                                               const TrainConfig& cfg, Nonlinearity g,
                                               const Matrix* entry_weights, int L,
                                               int n_train) {
  if (cfg.max_iters < 1) throw std::invalid_argument("train_loop: max_iters >= 1");
  if (cfg.step <= 0) throw std::invalid_argument("train_loop: step must be > 0");
  const bool early = cfg.early_stop_window > 0;
  if (early && (n_train <= 0 || n_train >= x_adapt.rows()))
    throw std::invalid_argument("train_loop: early stopping needs a train/target split");

  Rng rng(cfg.seed);
  Matrix w(L, x_adapt.cols());
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) w(i, j) = rng.normal();

  const int iters = early ? cfg.early_stop_window : cfg.max_iters;
  TrainTrace trace;
  Matrix best_w = w;
  double best_ks = std::numeric_limits<double>::infinity();
  double step = cfg.step;
  auto eval = [&](const Matrix& wm) {
    return weighted_objective_and_gradient(wm, x_adapt, cfg.epsilon, g, entry_weights);
  };
  auto [loss, grad] = eval(w);
  for (int it = 0; it < iters; ++it) {
    if (cfg.line_search) {
      double s = std::min(step * 2.0, 1e6);
      bool moved = false;
      while (s > 1e-14) {
        Matrix w2 = w - s * grad;
        auto [l2, g2] = eval(w2);
        if (l2 < loss) {
          w = std::move(w2);
          loss = l2;
          grad = std::move(g2);
          step = s;
          moved = true;
          break;
        }
        s /= 2.0;
      }
      if (!moved) {
        // Stationary to machine precision; hold the weights for the
        // remaining iterations so the trace keeps its promised length.
      }
    } else {
      w -= step * grad;
      std::tie(loss, grad) = eval(w);
    }
    if (!std::isfinite(loss))
      throw std::runtime_error("training diverged at iteration " + std::to_string(it));
    trace.loss.push_back(loss);
    if (early) {
      ForwardCache c = forward_pass(w, x_adapt, cfg.epsilon, g);
      Matrix z_tr = c.z.topRows(n_train);
      Matrix z_tar = c.z.bottomRows(c.z.rows() - n_train);
      double ks = mean_feature_ks(z_tr, z_tar).value;
      trace.ks.push_back(ks);
      if (ks < best_ks) {
        best_ks = ks;
        best_w = w;
        trace.selected = it;
      }
    }
  }
  if (!early) {
    best_w = w;
    trace.selected = iters - 1;
  }
  return {best_w, trace};
}

}  // namespace detail

std::pair<WeightMatrix, TrainTrace> sf_train(const Matrix& x_adapt,
                                             const TrainConfig& cfg, int n_train) {
  if (cfg.features < 1) throw std::invalid_argument("sf_train: features >= 1");
  return detail::train_loop(x_adapt, cfg, Nonlinearity::SoftAbs, nullptr, cfg.features,
                            n_train);
}

Matrix transform(const Matrix& w, const Matrix& batch, double epsilon, Nonlinearity g) {
  return forward_pass(w, batch, epsilon, g).z;
}

}  // namespace df
