#include "driftfilter/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "driftfilter/rng.hpp"

namespace df {

namespace {

void require_counts(int n_train, int n_test) {
  if (n_train < 2 || n_test < 2 || n_test % 2 != 0)
    throw std::invalid_argument("benchmark counts: need n_train >= 2, n_test >= 2 and even");
}

// Splits the test-domain draw evenly: first half target, second half test.
ShiftedBenchmark assemble(LabeledDataset train, LabeledDataset test_domain,
                          uint64_t seed) {
  int half = test_domain.n() / 2;
  ShiftedBenchmark b;
  b.train = std::move(train);
  b.target.x = test_domain.x.topRows(half);
  b.target.y = test_domain.y.head(half);
  b.test.x = test_domain.x.bottomRows(test_domain.n() - half);
  b.test.y = test_domain.y.tail(test_domain.n() - half);
  b.seed = seed;
  return b;
}

Matrix gaussian_cloud(Rng& rng, int n, double mx, double my, double sx, double sy) {
  Matrix x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.normal(mx, sx);
    x(i, 1) = rng.normal(my, sy);
  }
  return x;
}

template <typename LabelFn>
Labels apply_labels(const Matrix& x, LabelFn fn) {
  Labels y(x.rows());
  for (int i = 0; i < x.rows(); ++i) y(i) = fn(x(i, 0), x(i, 1)) ? 1 : 2;
  return y;
}

}  // namespace

ShiftedBenchmark gen_radial(int n_train, int n_test, uint64_t seed) {
  require_counts(n_train, n_test);
  Rng rng(seed);
  auto label = [](double x1, double x2) { return std::abs(x1) > std::abs(x2); };
  LabeledDataset tr, te;
  tr.x = gaussian_cloud(rng, n_train, 0.5, 0.0, 0.2, 0.5);
  tr.y = apply_labels(tr.x, label);
  te.x = gaussian_cloud(rng, n_test, -0.5, 0.0, 0.2, 0.5);
  te.y = apply_labels(te.x, label);
  return assemble(std::move(tr), std::move(te), seed);
}

ShiftedBenchmark gen_periodic(int n_train, int n_test, uint64_t seed) {
  require_counts(n_train, n_test);
  Rng rng(seed);
  const double pi = 3.14159265358979323846;
  auto label = [](double x1, double) { return std::sin(std::abs(x1)) > 0.0; };
  LabeledDataset tr, te;
  tr.x = gaussian_cloud(rng, n_train, 2 * pi, 0.0, 2.0, 0.5);
  tr.y = apply_labels(tr.x, label);
  te.x = gaussian_cloud(rng, n_test, -2 * pi, 0.0, 2.0, 0.5);
  te.y = apply_labels(te.x, label);
  return assemble(std::move(tr), std::move(te), seed);
}

ShiftedBenchmark gen_smooth(int n_train, int n_test, uint64_t seed) {
  if (n_train < 2 || n_test < 2 || n_train % 2 != 0 || n_test % 2 != 0)
    throw std::invalid_argument("gen_smooth: counts must be even and >= 2");
  Rng rng(seed);
  auto label = [](double x1, double x2) {
    return (1.0 + std::tanh(x1 + std::min(0.0, x2))) / 2.0 > 0.5;
  };
  LabeledDataset tr, te;
  tr.x.resize(n_train, 2);
  tr.x.topRows(n_train / 2) = gaussian_cloud(rng, n_train / 2, 2.0, 3.0, 1.0, 2.0);
  tr.x.bottomRows(n_train / 2) = gaussian_cloud(rng, n_train / 2, -2.0, 3.0, 1.0, 2.0);
  tr.y = apply_labels(tr.x, label);
  te.x.resize(n_test, 2);
  te.x.topRows(n_test / 2) = gaussian_cloud(rng, n_test / 2, 3.0, -1.0, 1.0, 1.0);
  te.x.bottomRows(n_test / 2) = gaussian_cloud(rng, n_test / 2, 0.0, -1.0, 1.0, 1.0);
  te.y = apply_labels(te.x, label);
  return assemble(std::move(tr), std::move(te), seed);
}

ShiftedBenchmark gen_diagonal(int n_train, int n_test, uint64_t seed) {
  require_counts(n_train, n_test);
  Rng rng(seed);
  auto label = [](double, double x2) { return std::abs(x2) > 1.5; };
  LabeledDataset tr, te;
  tr.x.resize(n_train, 2);
  for (int i = 0; i < n_train; ++i) {
    double x1 = rng.uniform(0.0, 3.0);
    tr.x(i, 0) = x1;
    tr.x(i, 1) = x1 + rng.normal(0.0, 0.2);
  }
  tr.y = apply_labels(tr.x, label);
  // Test domain sits on the opposite (anti-)diagonal so the band orientation
  // itself shifts, not just the support.
  te.x.resize(n_test, 2);
  for (int i = 0; i < n_test; ++i) {
    double x1 = rng.uniform(-3.0, 0.0);
    te.x(i, 0) = x1;
    te.x(i, 1) = -x1 + rng.normal(0.0, 0.2);
  }
  te.y = apply_labels(te.x, label);
  return assemble(std::move(tr), std::move(te), seed);
}

ShiftedBenchmark gen_benchmark(const std::string& name, int n_train, int n_test,
                               uint64_t seed) {
  if (name == "radial") return gen_radial(n_train, n_test, seed);
  if (name == "periodic") return gen_periodic(n_train, n_test, seed);
  if (name == "smooth") return gen_smooth(n_train, n_test, seed);
  if (name == "diagonal") return gen_diagonal(n_train, n_test, seed);
  throw std::invalid_argument("unknown benchmark: " + name);
}

void write_csv(const std::string& path, const LabeledDataset& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (int j = 0; j < d.m(); ++j) out << "f" << (j + 1) << ",";
  out << "label\n";
  char buf[40];
  for (int i = 0; i < d.n(); ++i) {
    for (int j = 0; j < d.m(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.x(i, j));
      out << buf << ",";
    }
    out << d.y(i) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

LabeledDataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ":1: missing header");
  int m = 0;
  {
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.empty() || fields.back() != "label")
      throw std::runtime_error(path + ":1: header must end with 'label'");
    m = static_cast<int>(fields.size()) - 1;
    if (m < 1) throw std::runtime_error(path + ":1: no feature columns");
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) != m + 1)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(m + 1) + " fields, got " +
                               std::to_string(fields.size()));
    std::vector<double> row(m);
    try {
      size_t pos = 0;
      for (int j = 0; j < m; ++j) {
        row[j] = std::stod(fields[j], &pos);
        if (pos != fields[j].size()) throw std::invalid_argument("trailing junk");
      }
      labels.push_back(std::stoi(fields[m]));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed value");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  LabeledDataset d;
  d.x.resize(static_cast<int>(rows.size()), m);
  d.y.resize(static_cast<int>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < m; ++j) d.x(static_cast<int>(i), j) = rows[i][j];
    d.y(static_cast<int>(i)) = labels[i];
  }
  return d;
}

}  // namespace df
