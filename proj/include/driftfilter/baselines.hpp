#pragma once

#include <cstdint>

#include "driftfilter/data.hpp"

namespace df {

struct SsaModel {
  Matrix t;  // M x d, top-d eigenvectors of the train covariance
  Matrix u;  // M x d, test-side eigenvectors
  int d = 0;
};

struct SsaAligned {
  Matrix z_train;
  Matrix z_test;
  SsaModel model;
};

// Projects the train split through t * t^T * u and the test split through u,
// aligning the two principal subspaces. Eigenvector signs are fixed by making
// each column's largest-magnitude entry positive.
SsaAligned ssa_align(const Matrix& train, const Matrix& test, int d);

struct LinearClassifier {
  Vector weights;
  double bias = 0.0;
  double c_penalty = 1.0;
  int positive_class = 1;  // decision value > 0 (or exactly 0) maps here
  int negative_class = 2;
};

// Hinge-loss primal subgradient training with seeded shuffling; returns the
// parameters with the best training objective over a fixed epoch budget.
LinearClassifier svm_train(const LabeledDataset& data, double c_penalty,
                           uint64_t seed, int epochs = 40);

Labels svm_predict(const LinearClassifier& model, const Matrix& x);

double svm_objective(const LinearClassifier& model, const LabeledDataset& data);

}  // namespace df
