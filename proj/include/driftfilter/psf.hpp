#pragma once

#include <vector>

#include "driftfilter/data.hpp"
#include "driftfilter/sfcore.hpp"

namespace df {

// Binary (C+1) x L assignment of learned features to class groups; the last
// row is the unlabeled-sample group. Every feature belongs to exactly one
// group and every labeled group is nonempty.
struct FeatureMask {
  Eigen::MatrixXi m;

  int classes() const { return static_cast<int>(m.rows()) - 1; }
  int features() const { return static_cast<int>(m.cols()); }
};

struct PsfConfig {
  TrainConfig base;
  std::vector<double> lambda;  // per-class scaling; scalar input broadcasts
  Nonlinearity nonlinearity = Nonlinearity::Sine;
  std::vector<int> group_sizes;  // optional, length C+1, sums to base.features
};

// Contiguous assignment: group c owns features [offset_c, offset_c + size_c).
// When sizes are omitted, classes share L as evenly as possible and the
// remainder goes to the unlabeled group.
FeatureMask build_mask(int num_classes, int num_features,
                       const std::vector<int>* group_sizes = nullptr);

ForwardCache psf_forward(const Matrix& w, const Matrix& x, const PsfConfig& cfg);

// loss = sum(Z) - sum_c lambda_c * sum over the class-c block of Z.
std::pair<double, Matrix> psf_objective_and_gradient(const Matrix& w, const Matrix& x,
                                                     const Labels& y,
                                                     const FeatureMask& mask,
                                                     const PsfConfig& cfg);

struct PsfResult {
  WeightMatrix w;
  FeatureMask mask;
  TrainTrace trace;
};

PsfResult psf_train(const LabeledDataset& train, const Matrix& target,
                    const PsfConfig& cfg);

}  // namespace df
