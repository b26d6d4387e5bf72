#include "driftfilter/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "driftfilter/baselines.hpp"
#include "driftfilter/metrics.hpp"
#include "driftfilter/rng.hpp"

namespace df {

namespace {

using nlohmann::json;

bool is_named_benchmark(const std::string& b) {
  return b == "radial" || b == "periodic" || b == "smooth" || b == "diagonal";
}

ShiftedBenchmark load_benchmark(const PipelineSpec& spec, uint64_t trial_seed) {
  if (is_named_benchmark(spec.benchmark))
    return gen_benchmark(spec.benchmark, spec.n_train, spec.n_test, trial_seed);
  ShiftedBenchmark b;
  b.train = read_csv(spec.benchmark + "/train.csv");
  b.target = read_csv(spec.benchmark + "/target.csv");
  b.test = read_csv(spec.benchmark + "/test.csv");
  b.seed = trial_seed;
  return b;
}

Nonlinearity parse_nonlinearity(const std::string& s) {
  if (s == "sine") return Nonlinearity::Sine;
  if (s == "cosine") return Nonlinearity::Cosine;
  throw std::invalid_argument("nonlinearity must be sine or cosine, got " + s);
}

void validate(const PipelineSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("spec: trials >= 1");
  if (spec.adapter != "none" && spec.adapter != "sf" && spec.adapter != "psf" &&
      spec.adapter != "ssa")
    throw std::invalid_argument("spec: unknown adapter " + spec.adapter);
  if (spec.adapter == "psf") parse_nonlinearity(spec.nonlinearity);
  if (spec.classifier_c <= 0) throw std::invalid_argument("spec: classifier_c > 0");
}

struct Representations {
  Matrix train;
  Matrix test;
  Matrix initial_train;  // only for sf/psf when requested
  Matrix initial_test;
  bool has_initial = false;
};

Representations adapt(const PipelineSpec& spec, const ShiftedBenchmark& b,
                      uint64_t trial_seed, bool want_initial) {
  Representations rep;
  if (spec.adapter == "none") {
    rep.train = b.train.x;
    rep.test = b.test.x;
    return rep;
  }
  if (spec.adapter == "ssa") {
    auto aligned = ssa_align(b.train.x, b.target.x, spec.ssa_d);
    rep.train = aligned.z_train;
    rep.test = b.test.x * aligned.model.u;
    return rep;
  }

  TrainConfig cfg = spec.train;
  cfg.seed = mix_seed(trial_seed, 2);
  Matrix x_adapt(b.train.n() + b.target.n(), b.train.m());
  x_adapt << b.train.x, b.target.x;

  WeightMatrix w;
  Nonlinearity g = Nonlinearity::SoftAbs;
  if (spec.adapter == "sf") {
    w = sf_train(x_adapt, cfg, b.train.n()).first;
  } else {
    PsfConfig pcfg;
    pcfg.base = cfg;
    pcfg.lambda = spec.lambda;
    pcfg.nonlinearity = parse_nonlinearity(spec.nonlinearity);
    pcfg.group_sizes = spec.group_sizes;
    g = pcfg.nonlinearity;
    w = psf_train(b.train, b.target.x, pcfg).w;
  }

  auto represent = [&](const Matrix& weights, Matrix& out_tr, Matrix& out_te) {
    if (spec.joint_normalization) {
      Matrix all(b.train.n() + b.target.n() + b.test.n(), b.train.m());
      all << b.train.x, b.target.x, b.test.x;
      Matrix z = transform(weights, all, cfg.epsilon, g);
      out_tr = z.topRows(b.train.n());
      out_te = z.bottomRows(b.test.n());
    } else {
      out_tr = transform(weights, b.train.x, cfg.epsilon, g);
      out_te = transform(weights, b.test.x, cfg.epsilon, g);
    }
  };
  represent(w, rep.train, rep.test);
  if (want_initial) {
    // Representation under the untrained (freshly seeded) weights.
    Rng rng(cfg.seed);
    WeightMatrix w0(cfg.features, b.train.m());
    for (int i = 0; i < w0.rows(); ++i)
      for (int j = 0; j < w0.cols(); ++j) w0(i, j) = rng.normal();
    represent(w0, rep.initial_train, rep.initial_test);
    rep.has_initial = true;
  }
  return rep;
}

TrialResult run_trial(const PipelineSpec& spec, int trial) {
  uint64_t trial_seed = mix_seed(spec.seed, static_cast<uint64_t>(trial));
  ShiftedBenchmark b = load_benchmark(spec, trial_seed);
  uint64_t svm_seed = mix_seed(trial_seed, 1);

  LinearClassifier base_model = svm_train(b.train, spec.classifier_c, svm_seed);
  Labels base_pred = svm_predict(base_model, b.test.x);
  double base_acc =
      (base_pred.array() == b.test.y.array()).cast<double>().mean();

  double sigma = median_heuristic_bandwidth(b.train.x, b.test.x);
  if (sigma <= 0) sigma = 1.0;

  Representations rep =
      adapt(spec, b, trial_seed, spec.mmd_before_on_representation);

  MetricValue before =
      rep.has_initial ? mmd2(rep.initial_train, rep.initial_test, sigma)
                      : mmd2(b.train.x, b.test.x, sigma);
  MetricValue after = mmd2(rep.train, rep.test, sigma);

  LabeledDataset adapted_train{rep.train, b.train.y};
  LinearClassifier model = svm_train(adapted_train, spec.classifier_c, svm_seed);
  Labels pred = svm_predict(model, rep.test);
  double adapted_acc = (pred.array() == b.test.y.array()).cast<double>().mean();

  TrialResult t;
  t.baseline_accuracy = base_acc;
  t.adapted_accuracy = adapted_acc;
  t.accuracy_percent_change = accuracy_percent_change(base_acc, adapted_acc);
  t.mmd_before = before.value;
  t.mmd_after = after.value;
  t.mmd_percent_change =
      before.value > 0 ? mmd_percent_change(before, after) : 0.0;
  t.adapted_uar = uar(pred, b.test.y).value;
  return t;
}

Aggregate aggregate(const std::vector<TrialResult>& trials,
                    double TrialResult::* field) {
  Aggregate a;
  const int n = static_cast<int>(trials.size());
  for (const auto& t : trials) a.mean += t.*field;
  a.mean /= n;
  if (n > 1) {
    double ss = 0.0;
    for (const auto& t : trials) ss += (t.*field - a.mean) * (t.*field - a.mean);
    a.stderr_ = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return a;
}

int thread_budget(int trials) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("DRIFTFILTER_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return std::min(hw, trials);
}

json aggregate_json(const Aggregate& a) {
  return json{{"mean", a.mean}, {"stderr", a.stderr_}};
}

json spec_to_json(const PipelineSpec& s) {
  return json{{"adapter", s.adapter},
              {"benchmark", s.benchmark},
              {"trials", s.trials},
              {"seed", s.seed},
              {"classifier_c", s.classifier_c},
              {"n_train", s.n_train},
              {"n_test", s.n_test},
              {"train",
               {{"features", s.train.features},
                {"epsilon", s.train.epsilon},
                {"step", s.train.step},
                {"max_iters", s.train.max_iters},
                {"early_stop_window", s.train.early_stop_window},
                {"line_search", s.train.line_search}}},
              {"lambda", s.lambda},
              {"nonlinearity", s.nonlinearity},
              {"group_sizes", s.group_sizes},
              {"ssa_d", s.ssa_d},
              {"joint_normalization", s.joint_normalization},
              {"mmd_before_on_representation", s.mmd_before_on_representation}};
}

}  // namespace

EvalReport run_benchmark(const PipelineSpec& spec) {
  validate(spec);
  if (spec.adapter == "ssa") {
    ShiftedBenchmark probe = load_benchmark(spec, mix_seed(spec.seed, 0));
    if (spec.ssa_d > probe.train.m())
      throw std::invalid_argument("spec: ssa_d exceeds feature count");
  }

  EvalReport report;
  report.spec = spec;
  report.trials.resize(spec.trials);

  const int workers = thread_budget(spec.trials);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&]() {
    for (;;) {
      int t = next.fetch_add(1);
      if (t >= spec.trials) return;
      try {
        report.trials[t] = run_trial(spec, t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  report.baseline_accuracy = aggregate(report.trials, &TrialResult::baseline_accuracy);
  report.adapted_accuracy = aggregate(report.trials, &TrialResult::adapted_accuracy);
  report.accuracy_percent_change =
      aggregate(report.trials, &TrialResult::accuracy_percent_change);
  report.mmd_before = aggregate(report.trials, &TrialResult::mmd_before);
  report.mmd_after = aggregate(report.trials, &TrialResult::mmd_after);
  report.mmd_percent_change =
      aggregate(report.trials, &TrialResult::mmd_percent_change);
  report.adapted_uar = aggregate(report.trials, &TrialResult::adapted_uar);

  std::vector<double> base, adapted;
  for (const auto& t : report.trials) {
    base.push_back(t.baseline_accuracy);
    adapted.push_back(t.adapted_accuracy);
  }
  try {
    report.wilcoxon_p = wilcoxon_signed_rank(adapted, base).p_value;
  } catch (const std::invalid_argument&) {
    report.wilcoxon_p = std::nullopt;
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  json j;
  j["spec"] = spec_to_json(report.spec);
  j["trials"] = json::array();
  for (const auto& t : report.trials) {
    j["trials"].push_back({{"baseline_accuracy", t.baseline_accuracy},
                           {"adapted_accuracy", t.adapted_accuracy},
                           {"accuracy_percent_change", t.accuracy_percent_change},
                           {"mmd_before", t.mmd_before},
                           {"mmd_after", t.mmd_after},
                           {"mmd_percent_change", t.mmd_percent_change},
                           {"adapted_uar", t.adapted_uar}});
  }
  j["aggregates"] = {
      {"baseline_accuracy", aggregate_json(report.baseline_accuracy)},
      {"adapted_accuracy", aggregate_json(report.adapted_accuracy)},
      {"accuracy_percent_change", aggregate_json(report.accuracy_percent_change)},
      {"mmd_before", aggregate_json(report.mmd_before)},
      {"mmd_after", aggregate_json(report.mmd_after)},
      {"mmd_percent_change", aggregate_json(report.mmd_percent_change)},
      {"adapted_uar", aggregate_json(report.adapted_uar)}};
  if (report.wilcoxon_p)
    j["wilcoxon_p"] = *report.wilcoxon_p;
  else
    j["wilcoxon_p"] = nullptr;
  return j.dump(2) + "\n";
}

void emit_report(const EvalReport& report, const std::string& format,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_report: cannot open " + path);
  if (format == "json") {
    out << report_to_json(report);
  } else if (format == "csv") {
    out << "trial,baseline_accuracy,adapted_accuracy,accuracy_percent_change,"
           "mmd_before,mmd_after,mmd_percent_change,adapted_uar\n";
    char buf[64];
    auto row = [&](const std::string& tag, double a, double b, double c, double d,
                   double e, double f, double g) {
      out << tag;
      for (double v : {a, b, c, d, e, f, g}) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << "," << buf;
      }
      out << "\n";
    };
    for (size_t i = 0; i < report.trials.size(); ++i) {
      const auto& t = report.trials[i];
      row(std::to_string(i), t.baseline_accuracy, t.adapted_accuracy,
          t.accuracy_percent_change, t.mmd_before, t.mmd_after,
          t.mmd_percent_change, t.adapted_uar);
    }
    row("MEAN", report.baseline_accuracy.mean, report.adapted_accuracy.mean,
        report.accuracy_percent_change.mean, report.mmd_before.mean,
        report.mmd_after.mean, report.mmd_percent_change.mean,
        report.adapted_uar.mean);
    row("SE", report.baseline_accuracy.stderr_, report.adapted_accuracy.stderr_,
        report.accuracy_percent_change.stderr_, report.mmd_before.stderr_,
        report.mmd_after.stderr_, report.mmd_percent_change.stderr_,
        report.adapted_uar.stderr_);
  } else {
    throw std::invalid_argument("emit_report: format must be json or csv");
  }
  if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

PipelineSpec spec_from_json_text(const std::string& text) {
  json j = json::parse(text);
  PipelineSpec s;
  s.adapter = j.value("adapter", s.adapter);
  s.benchmark = j.value("benchmark", s.benchmark);
  s.trials = j.value("trials", s.trials);
  s.seed = j.value("seed", s.seed);
  s.classifier_c = j.value("classifier_c", s.classifier_c);
  s.n_train = j.value("n_train", s.n_train);
  s.n_test = j.value("n_test", s.n_test);
  if (j.contains("train")) {
    const json& t = j["train"];
    s.train.features = t.value("features", s.train.features);
    s.train.epsilon = t.value("epsilon", s.train.epsilon);
    s.train.step = t.value("step", s.train.step);
    s.train.max_iters = t.value("max_iters", s.train.max_iters);
    s.train.early_stop_window = t.value("early_stop_window", s.train.early_stop_window);
    s.train.line_search = t.value("line_search", s.train.line_search);
  }
  if (j.contains("lambda")) s.lambda = j["lambda"].get<std::vector<double>>();
  s.nonlinearity = j.value("nonlinearity", s.nonlinearity);
  if (j.contains("group_sizes"))
    s.group_sizes = j["group_sizes"].get<std::vector<int>>();
  s.ssa_d = j.value("ssa_d", s.ssa_d);
  s.joint_normalization = j.value("joint_normalization", s.joint_normalization);
  s.mmd_before_on_representation =
      j.value("mmd_before_on_representation", s.mmd_before_on_representation);
  validate(s);
  return s;
}

PipelineSpec spec_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return spec_from_json_text(text);
}

void export_scatter(const Matrix& x, const Labels* y, const std::string& path) {
  if (x.cols() < 2) throw std::invalid_argument("export_scatter: need >= 2 columns");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_scatter: cannot open " + path);
  if (x.cols() > 2)
    out << "# truncated: showing first 2 of " << x.cols() << " features\n";
  out << "x,y,label\n";
  char buf[40];
  for (int i = 0; i < x.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", x(i, 0));
    out << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", x(i, 1));
    out << buf << "," << (y ? (*y)(i) : UNLABELED) << "\n";
  }
  if (!out) throw std::runtime_error("export_scatter: write failed for " + path);
}

}  // namespace df
