#include "experiment.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace lifts;
using namespace lifts::cli;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> trials;
  std::string entry;
  std::string regime;
  std::string csv;
  std::string plot = "auto";
  int threads = 0;
};

Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidInput, "cannot open config " + path);
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::InvalidInput, std::string("config parse error: ") + e.what());
  }
}

/// Config file merged with command-line overrides.
Json experiment_json(const Flags& f) {
  Json j = f.config.empty() ? Json::object() : read_config(f.config);
  if (!f.entry.empty()) j["entry"] = f.entry;
  if (!f.regime.empty()) j["point"] = {{"regime", f.regime}};
  if (f.seed) j["seed"] = *f.seed;
  if (f.trials) j["trials"] = *f.trials;
  return j;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::InvalidInput, "cannot write " + path);
  out << text;
}

void write_csv(const Flags& f, const Json& report) {
  if (f.csv.empty()) return;
  PlotKind kind = PlotKind::Taylor;
  if (f.plot == "trace") kind = PlotKind::Trace;
  else if (f.plot == "auto") {
    try {
      write_output(f.csv, emit_plot_data(report, PlotKind::Taylor));
      return;
    } catch (const Error& e) {
      if (e.code() != Errc::NoData) throw;
    }
    kind = PlotKind::Trace;
  }
  write_output(f.csv, emit_plot_data(report, kind));
}

int finish(const Flags& f, const Json& report, const std::string& out_path, double seconds) {
  write_output(out_path, report.dump(1) + "\n");
  write_csv(f, report);
  const Json& s = report["summary"];
  fmt::print(std::cerr, "expectations matched: {}  witnesses verified: {}  wall-clock: {:.2f} s\n",
             s["all_expectations_matched"].get<bool>(), s["all_witnesses_verified"].get<bool>(), seconds);
  return report_ok(report) ? 0 : 1;
}

int run_task(Task task, const Flags& f) {
  auto t0 = std::chrono::steady_clock::now();
  Json j = experiment_json(f);
  j["tasks"] = Json::array({task_name(task)});
  ExperimentConfig cfg = parse_experiment(j);
  Json report = run_experiment(cfg, {f.threads});
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish(f, report, f.out.empty() ? cfg.output : f.out, secs);
}

int run_suite_cmd(const Flags& f) {
  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t seed = f.seed.value_or(0);
  std::vector<ExperimentConfig> exps;
  std::string out = f.out;
  if (f.config.empty()) {
    exps = default_suite(seed);
  } else {
    Json j = read_config(f.config);
    if (!j.contains("experiments") || !j["experiments"].is_array())
      throw Error(Errc::InvalidInput, "suite config: expected an 'experiments' array");
    if (!f.seed && j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (out.empty() && j.contains("output")) out = j["output"].get<std::string>();
    std::uint64_t k = 0;
    for (Json e : j["experiments"]) {
      if (!e.contains("seed")) e["seed"] = split_seed(seed, k);
      if (f.trials) e["trials"] = *f.trials;
      ++k;
      exps.push_back(parse_experiment(e));
    }
  }
  if (f.trials && f.config.empty())
    for (auto& e : exps) e.trials = *f.trials;
  Json report = run_suite(exps, seed, {f.threads});
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish(f, report, out, secs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order calculus of smooth lifts: property checks, witnesses and solves"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "Experiment config (JSON)");
    sub->add_option("--seed", f.seed, "Base seed");
    sub->add_option("--out", f.out, "Report path (default: config output, else stdout)");
    sub->add_option("--trials", f.trials, "Number of trials")->check(CLI::PositiveNumber);
    sub->add_option("--csv", f.csv, "Write plot data (CSV) to this path");
    sub->add_option("--plot", f.plot, "Plot data kind")->check(CLI::IsMember({"auto", "taylor", "trace"}));
    sub->add_option("--threads", f.threads, "Worker threads (0: hardware)")->check(CLI::NonNegativeNumber);
  };
  std::vector<std::pair<CLI::App*, Task>> tasks;
  for (Task t : {Task::Check, Task::Witness, Task::Optimize, Task::Taylor, Task::SlpEvidence}) {
    CLI::App* sub = app.add_subcommand(task_name(t), std::string("Run the ") + task_name(t) + " task");
    common(sub);
    sub->add_option("--entry", f.entry, "Catalog entry id (overrides config)");
    sub->add_option("--regime", f.regime, "Point regime (overrides config)");
    tasks.emplace_back(sub, t);
  }
  CLI::App* suite = app.add_subcommand("suite", "Run the acceptance matrix, or the experiments of --config");
  common(suite);
  CLI11_PARSE(app, argc, argv);
  try {
    if (suite->parsed()) return run_suite_cmd(f);
    for (auto& [sub, t] : tasks)
      if (sub->parsed()) return run_task(t, f);
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 2;
  }
  return 2;
}
