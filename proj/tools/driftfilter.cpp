#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "driftfilter/baselines.hpp"
#include "driftfilter/data.hpp"
#include "driftfilter/harness.hpp"
#include "driftfilter/metrics.hpp"
#include "driftfilter/psf.hpp"
#include "driftfilter/sfcore.hpp"
#include "driftfilter/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_weights_csv(const std::string& path, const df::Matrix& w) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  char buf[40];
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", w(i, j));
      out << buf << (j + 1 < w.cols() ? "," : "");
    }
    out << "\n";
  }
}

void write_mask_csv(const std::string& path, const df::FeatureMask& mask) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (int i = 0; i < mask.m.rows(); ++i) {
    for (int j = 0; j < mask.m.cols(); ++j)
      out << mask.m(i, j) << (j + 1 < mask.m.cols() ? "," : "");
    out << "\n";
  }
}

int cmd_gen(const std::string& benchmark, int n_train, int n_test, uint64_t seed,
            const std::string& out_dir) {
  df::ShiftedBenchmark b = df::gen_benchmark(benchmark, n_train, n_test, seed);
  fs::create_directories(out_dir);
  df::write_csv(out_dir + "/train.csv", b.train);
  df::write_csv(out_dir + "/target.csv", b.target);
  df::write_csv(out_dir + "/test.csv", b.test);
  std::cout << "wrote " << out_dir << "/{train,target,test}.csv\n";
  return 0;
}

int cmd_train(const std::string& spec_path, const std::string& out_dir) {
  df::PipelineSpec spec = df::spec_from_json_file(spec_path);
  if (spec.adapter != "sf" && spec.adapter != "psf")
    throw std::invalid_argument("train: adapter must be sf or psf");
  uint64_t trial_seed = df::mix_seed(spec.seed, 0);
  df::ShiftedBenchmark b =
      df::gen_benchmark(spec.benchmark, spec.n_train, spec.n_test, trial_seed);
  df::TrainConfig cfg = spec.train;
  cfg.seed = df::mix_seed(trial_seed, 2);
  fs::create_directories(out_dir);

  json echo;
  if (spec.adapter == "sf") {
    df::Matrix x(b.train.n() + b.target.n(), b.train.m());
    x << b.train.x, b.target.x;
    auto [w, trace] = df::sf_train(x, cfg, b.train.n());
    write_weights_csv(out_dir + "/weights.csv", w);
    echo["final_loss"] = trace.loss.back();
  } else {
    df::PsfConfig pcfg;
    pcfg.base = cfg;
    pcfg.lambda = spec.lambda;
    pcfg.nonlinearity =
        spec.nonlinearity == "sine" ? df::Nonlinearity::Sine : df::Nonlinearity::Cosine;
    pcfg.group_sizes = spec.group_sizes;
    auto result = df::psf_train(b.train, b.target.x, pcfg);
    write_weights_csv(out_dir + "/weights.csv", result.w);
    write_mask_csv(out_dir + "/mask.csv", result.mask);
    echo["final_loss"] = result.trace.loss.back();
    echo["selected_iteration"] = result.trace.selected;
  }
  echo["adapter"] = spec.adapter;
  echo["benchmark"] = spec.benchmark;
  echo["features"] = cfg.features;
  echo["max_iters"] = cfg.max_iters;
  echo["seed"] = spec.seed;
  std::ofstream(out_dir + "/config.json") << echo.dump(2) << "\n";
  std::cout << "wrote " << out_dir << "/weights.csv\n";
  return 0;
}

int cmd_eval(const std::string& spec_path, const std::string& out_path,
             const std::string& format) {
  df::PipelineSpec spec = df::spec_from_json_file(spec_path);
  df::EvalReport report = df::run_benchmark(spec);
  if (out_path.empty()) {
    std::cout << df::report_to_json(report);
  } else {
    df::emit_report(report, format, out_path);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_verify(uint64_t seed, const std::string& out_path) {
  auto reports = df::run_all_checks(seed);
  json arr = json::array();
  bool all_passed = true;
  for (const auto& r : reports) {
    arr.push_back({{"name", r.name},
                   {"passed", r.passed},
                   {"worst_violation", r.worst_violation},
                   {"instances", r.instances},
                   {"details", r.details}});
    all_passed = all_passed && r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name
              << " (instances=" << r.instances
              << ", worst=" << r.worst_violation << ")\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for write: " + out_path);
    out << arr.dump(2) << "\n";
  }
  return all_passed ? 0 : 1;
}

int cmd_bench(uint64_t seed, int trials, const std::string& out_dir) {
  std::vector<std::pair<std::string, df::PipelineSpec>> jobs;
  for (const char* b : {"radial", "periodic", "smooth", "diagonal"}) {
    df::PipelineSpec s;
    s.adapter = "sf";
    s.benchmark = b;
    s.trials = trials;
    s.seed = seed;
    jobs.emplace_back(std::string("sf-") + b, s);
  }
  {
    df::PipelineSpec s;
    s.adapter = "psf";
    s.benchmark = "periodic";
    s.trials = trials;
    s.seed = seed;
    s.train.line_search = true;
    jobs.emplace_back("psf-periodic", s);
  }
  {
    df::PipelineSpec s;
    s.adapter = "ssa";
    s.benchmark = "diagonal";
    s.trials = trials;
    s.seed = seed;
    jobs.emplace_back("ssa-diagonal", s);
  }
  fs::create_directories(out_dir);
  json summary;
  for (auto& [name, spec] : jobs) {
    df::EvalReport report = df::run_benchmark(spec);
    df::emit_report(report, "json", out_dir + "/" + name + ".json");
    summary[name] = {
        {"baseline_accuracy", report.baseline_accuracy.mean},
        {"adapted_accuracy", report.adapted_accuracy.mean},
        {"accuracy_percent_change", report.accuracy_percent_change.mean},
        {"mmd_percent_change", report.mmd_percent_change.mean}};
    std::cout << name << ": base=" << report.baseline_accuracy.mean
              << " adapted=" << report.adapted_accuracy.mean
              << " acc%=" << report.accuracy_percent_change.mean
              << " mmd%=" << report.mmd_percent_change.mean << "\n";
  }
  std::ofstream(out_dir + "/summary.json") << summary.dump(2) << "\n";
  std::cout << "wrote " << out_dir << "/summary.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariate-shift adaptation toolkit"};
  app.require_subcommand(1);

  std::string benchmark = "radial", out_dir = "out", spec_path, out_path,
              format = "json";
  int n_train = 500, n_test = 500, trials = 10;
  uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen", "generate a benchmark and write CSV splits");
  gen->add_option("--benchmark", benchmark, "radial|periodic|smooth|diagonal");
  gen->add_option("--n-train", n_train);
  gen->add_option("--n-test", n_test);
  gen->add_option("--seed", seed);
  gen->add_option("--out", out_dir, "output directory");

  auto* train = app.add_subcommand("train", "fit an adapter and write the model bundle");
  train->add_option("--spec", spec_path, "pipeline spec JSON")->required();
  train->add_option("--out", out_dir, "output directory");

  auto* eval = app.add_subcommand("eval", "run a pipeline spec and emit a report");
  eval->add_option("--spec", spec_path, "pipeline spec JSON")->required();
  eval->add_option("--out", out_path, "report path (stdout if omitted)");
  eval->add_option("--format", format, "json|csv");

  auto* verify = app.add_subcommand("verify", "run the numerical verification suite");
  verify->add_option("--seed", seed);
  verify->add_option("--out", out_path, "JSON report path");

  auto* bench = app.add_subcommand("bench", "full synthetic comparison across adapters");
  bench->add_option("--seed", seed);
  bench->add_option("--trials", trials);
  bench->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(benchmark, n_train, n_test, seed, out_dir);
    if (train->parsed()) return cmd_train(spec_path, out_dir);
    if (eval->parsed()) return cmd_eval(spec_path, out_path, format);
    if (verify->parsed()) return cmd_verify(seed, out_path);
    if (bench->parsed()) return cmd_bench(seed, trials, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
