#pragma once

#include <optional>
#include <string>
#include <vector>

#include "driftfilter/data.hpp"
#include "driftfilter/psf.hpp"
#include "driftfilter/sfcore.hpp"

namespace df {

// One experiment: adapter + benchmark + classifier, repeated over trials with
// derived seeds.
struct PipelineSpec {
  std::string adapter = "none";      // none | sf | psf | ssa
  std::string benchmark = "radial";  // radial | periodic | smooth | diagonal | dir path
  int trials = 10;
  uint64_t seed = 0;
  double classifier_c = 1.0;
  int n_train = 500;
  int n_test = 500;
  TrainConfig train;                  // sf and psf optimizer settings
  std::vector<double> lambda = {1.0};
  std::string nonlinearity = "cosine";  // psf: sine | cosine
  std::vector<int> group_sizes;         // psf, optional
  int ssa_d = 2;
  bool joint_normalization = false;  // transform all splits as one batch
  bool mmd_before_on_representation = false;  // default: before on raw data
};

struct TrialResult {
  double baseline_accuracy = 0.0;
  double adapted_accuracy = 0.0;
  double accuracy_percent_change = 0.0;
  double mmd_before = 0.0;
  double mmd_after = 0.0;
  double mmd_percent_change = 0.0;
  double adapted_uar = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(trials)
};

struct EvalReport {
  PipelineSpec spec;
  std::vector<TrialResult> trials;
  Aggregate baseline_accuracy, adapted_accuracy, accuracy_percent_change;
  Aggregate mmd_before, mmd_after, mmd_percent_change;
  Aggregate adapted_uar;
  // Paired test of adapted vs baseline accuracy across trials; absent when
  // degenerate (all differences zero) or too few pairs.
  std::optional<double> wilcoxon_p;
};

EvalReport run_benchmark(const PipelineSpec& spec);

void emit_report(const EvalReport& report, const std::string& format,
                 const std::string& path);
std::string report_to_json(const EvalReport& report);

PipelineSpec spec_from_json_file(const std::string& path);
PipelineSpec spec_from_json_text(const std::string& text);

// CSV `x,y,label` (first two columns when wider, flagged in the header line).
void export_scatter(const Matrix& x, const Labels* y, const std::string& path);

}  // namespace df
