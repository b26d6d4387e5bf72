#include "driftfilter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace df {

namespace {

double mean_kernel(const Matrix& a, const Matrix& b, double sigma) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double sum = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.rows(); ++j)
      sum += std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
  return sum / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double median_heuristic_bandwidth(const Matrix& a, const Matrix& b) {
  Matrix pool(a.rows() + b.rows(), a.cols());
  pool << a, b;
  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(pool.rows()) * (pool.rows() - 1) / 2);
  for (int i = 0; i < pool.rows(); ++i)
    for (int j = i + 1; j < pool.rows(); ++j)
      dists.push_back((pool.row(i) - pool.row(j)).norm());
  if (dists.empty()) return 0.0;
  std::sort(dists.begin(), dists.end());
  size_t n = dists.size();
  return n % 2 == 1 ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
}

MetricValue mmd2(const Matrix& a, const Matrix& b, double bandwidth) {
  if (a.cols() != b.cols()) throw std::invalid_argument("mmd2: feature count mismatch");
  if (a.rows() < 1 || b.rows() < 1) throw std::invalid_argument("mmd2: empty sample");
  MetricValue m;
  m.estimator = "mmd2-vstat-gaussian";
  double sigma = bandwidth;
  if (sigma <= 0.0) {
    sigma = median_heuristic_bandwidth(a, b);
    if (sigma <= 0.0) {
      sigma = 1.0;
      m.bandwidth_fallback = true;
    }
  }
  m.bandwidth = sigma;
  m.value = mean_kernel(a, a, sigma) + mean_kernel(b, b, sigma) -
            2.0 * mean_kernel(a, b, sigma);
  if (m.value < 0.0 && m.value > -1e-15) m.value = 0.0;  // rounding guard
  return m;
}

double mmd_percent_change(const MetricValue& before, const MetricValue& after) {
  if (before.value <= 0.0)
    throw std::invalid_argument("mmd_percent_change: undefined baseline (before == 0)");
  return 100.0 * (after.value - before.value) / before.value;
}

MetricValue ks_statistic(std::vector<double> u, std::vector<double> v) {
  if (u.empty() || v.empty()) throw std::invalid_argument("ks_statistic: empty input");
  std::sort(u.begin(), u.end());
  std::sort(v.begin(), v.end());
  size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < u.size() && j < v.size()) {
    double t = std::min(u[i], v[j]);
    while (i < u.size() && u[i] <= t) ++i;
    while (j < v.size() && v[j] <= t) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / u.size() -
                                 static_cast<double>(j) / v.size()));
  }
  MetricValue m;
  m.estimator = "ks-two-sample";
  m.value = sup;
  return m;
}

MetricValue mean_feature_ks(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("mean_feature_ks: feature count mismatch");
  double sum = 0.0;
  for (int j = 0; j < a.cols(); ++j) {
    std::vector<double> u(a.col(j).data(), a.col(j).data() + a.rows());
    std::vector<double> v(b.col(j).data(), b.col(j).data() + b.rows());
    sum += ks_statistic(std::move(u), std::move(v)).value;
  }
  MetricValue m;
  m.estimator = "mean-feature-ks";
  m.value = sum / a.cols();
  return m;
}

MetricValue uar(const Labels& predicted, const Labels& actual) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("uar: length mismatch");
  std::map<int, std::pair<int, int>> per_class;  // class -> (hits, total)
  for (int i = 0; i < actual.size(); ++i) {
    auto& [hits, total] = per_class[actual(i)];
    ++total;
    if (predicted(i) == actual(i)) ++hits;
  }
  if (per_class.empty()) throw std::invalid_argument("uar: no samples");
  double sum = 0.0;
  for (auto& [cls, counts] : per_class) {
    if (counts.second == 0) throw std::invalid_argument("uar: empty class");
    sum += static_cast<double>(counts.first) / counts.second;
  }
  MetricValue m;
  m.estimator = "uar";
  m.value = sum / per_class.size();
  return m;
}

double accuracy_percent_change(double base, double adapted) {
  if (base <= 0.0)
    throw std::invalid_argument("accuracy_percent_change: undefined baseline");
  return 100.0 * (adapted - base) / base;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    bool force_normal) {
  if (a.size() != b.size())
    throw std::invalid_argument("wilcoxon_signed_rank: length mismatch");
  std::vector<double> diffs;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty())
    throw std::invalid_argument("wilcoxon_signed_rank: all differences zero");
  int n = static_cast<int>(diffs.size());
  if (n < 5)
    throw std::invalid_argument("wilcoxon_signed_rank: need >= 5 nonzero differences");

  // Average ranks of |d| with ties shared.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(diffs[i]) < std::abs(diffs[j]);
  });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n &&
           std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]]))
      ++j;
    double avg = (i + j) / 2.0 + 1.0;
    for (int k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  double w_plus = 0.0;
  for (int k = 0; k < n; ++k)
    if (diffs[k] > 0) w_plus += ranks[k];

  WilcoxonResult r;
  r.statistic = w_plus;
  r.n = n;
  if (n <= 12 && !force_normal) {
    // Exact null: every sign assignment equally likely.
    r.exact = true;
    const uint64_t total = 1ull << n;
    uint64_t le = 0, ge = 0;
    for (uint64_t mask = 0; mask < total; ++mask) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        if (mask & (1ull << k)) s += ranks[k];
      if (s <= w_plus) ++le;
      if (s >= w_plus) ++ge;
    }
    double p = 2.0 * std::min(le, ge) / static_cast<double>(total);
    r.p_value = std::min(1.0, p);
  } else {
    double mu = n * (n + 1) / 4.0;
    double var = n * (n + 1) * (2 * n + 1) / 24.0;
    // Tie correction over groups of equal |d|.
    std::map<double, int> tie_counts;
    for (int k = 0; k < n; ++k) ++tie_counts[std::abs(diffs[k])];
    for (auto& [v, t] : tie_counts)
      if (t > 1) var -= t * (static_cast<double>(t) * t - 1.0) / 48.0;
    double z = (std::abs(w_plus - mu) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
  }
  return r;
}

}  // namespace df
