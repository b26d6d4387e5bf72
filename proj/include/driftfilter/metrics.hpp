#pragma once

#include <string>
#include <vector>

#include "driftfilter/data.hpp"

namespace df {

struct MetricValue {
  double value = 0.0;
  std::string estimator;
  double bandwidth = 0.0;        // Gaussian kernel sigma where applicable
  bool bandwidth_fallback = false;  // degenerate pool, sigma forced to 1
};

// Median pairwise Euclidean distance over the pooled rows of a and b.
double median_heuristic_bandwidth(const Matrix& a, const Matrix& b);

// Biased V-statistic squared MMD with Gaussian kernel. bandwidth <= 0 selects
// the median heuristic over the pooled sample.
MetricValue mmd2(const Matrix& a, const Matrix& b, double bandwidth = 0.0);

double mmd_percent_change(const MetricValue& before, const MetricValue& after);

// Exact sup distance between the two empirical CDFs.
MetricValue ks_statistic(std::vector<double> u, std::vector<double> v);

MetricValue mean_feature_ks(const Matrix& a, const Matrix& b);

MetricValue uar(const Labels& predicted, const Labels& actual);

double accuracy_percent_change(double base, double adapted);

struct WilcoxonResult {
  double statistic = 0.0;  // sum of positive-difference ranks
  double p_value = 1.0;    // two-sided
  int n = 0;               // pairs remaining after dropping zero differences
  bool exact = false;
};

// Exact enumeration for n <= 12 unless force_normal; otherwise normal
// approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    bool force_normal = false);

}  // namespace df
