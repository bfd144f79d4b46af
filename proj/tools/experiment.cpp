#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace lifts::cli {

namespace {

constexpr Task kAllTasks[] = {Task::Check, Task::Witness, Task::Optimize, Task::Taylor, Task::SlpEvidence};

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidInput, what); }

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) bad(where + ": unknown key '" + k + "'");
}

const char* cost_kind_str(CostSpec::Kind k) {
  switch (k) {
    case CostSpec::Kind::RandomConvex: return "random_convex";
    case CostSpec::Kind::QuadraticQuartic: return "quadratic_quartic";
    case CostSpec::Kind::Linear: return "linear";
  }
  return "?";
}

/// Finite numbers only; infinities and NaN become null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Cost make_cost(const CostSpec& spec, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  switch (spec.kind) {
    case CostSpec::Kind::Linear: {
      if (spec.w.size() && spec.w.size() != dim) bad("cost.w: expected " + std::to_string(dim) + " entries");
      return Cost::linear(spec.w.size() ? spec.w : gaussian_vec(dim, rng));
    }
    case CostSpec::Kind::QuadraticQuartic: {
      Mat G = gaussian(dim, dim, rng);
      Mat A = sym(G) / std::sqrt(static_cast<double>(dim));
      return Cost::quadratic_quartic(A, gaussian_vec(dim, rng), spec.quartic);
    }
    case CostSpec::Kind::RandomConvex:
    default: {
      Mat G = gaussian(dim, dim, rng);
      Mat A = G * G.transpose() / static_cast<double>(dim) + 0.1 * Mat::Identity(dim, dim);
      return Cost::quadratic_quartic(A, gaussian_vec(dim, rng), 0.0);
    }
  }
}

Vec trial_point(const CatalogEntry& entry, const PointSpec& p, std::uint64_t seed) {
  switch (p.kind) {
    case PointSpec::Kind::Coords: return p.coords;
    case PointSpec::Kind::Regime: {
      Rng rng(seed);
      return entry.sample_point(p.regime, rng);
    }
    case PointSpec::Kind::Random:
    default: return random_point(entry.lift.manifold, seed);
  }
}

Json check_record(const CatalogEntry& entry, const PropertyReport& rep) {
  Json j;
  Json exp = Json::object();
  bool all = true;
  for (const auto& [p, ve] : rep.verdicts) {
    Expectation e = entry.expect(p, rep.y);
    bool ok = matches(e, ve.verdict);
    all = all && ok;
    exp[property_name(p)] = {{"expected", expectation_name(e)}, {"computed", verdict_name(ve.verdict)}, {"matched", ok}};
  }
  j["expectations"] = exp;
  j["monotone"] = rep.monotone;
  j["matched"] = all && rep.monotone;
  j["report"] = rep.to_json();
  return j;
}

Json witness_record(const CatalogEntry& entry, const PropertyReport& rep) {
  Json j;
  bool verified = true;
  int required = 0;
  auto need = [&](Property p, const std::optional<WitnessCost>& w, const char* key) {
    const auto it = rep.verdicts.find(p);
    bool fails = entry.expect(p, rep.y) == Expectation::Fails ||
                 (it != rep.verdicts.end() && it->second.verdict == Verdict::Fails);
    if (w) j[key] = w->to_json();
    else j[key] = nullptr;
    if (!fails) return;
    ++required;
    verified = verified && w && w->valid();
  };
  need(Property::OneToOne, rep.linear_witness, "linear");
  need(Property::TwoToOne, rep.quadratic_witness, "quadratic");

  Json cands = Json::array();
  if (entry.witness_candidates) {
    LQData d = lq(entry.lift, rep.y);
    TangentCone cone = cone_at(entry.set, d.x);
    for (const Vec& w : entry.witness_candidates(rep.y)) {
      double residual = (d.im_L.transpose() * w).norm();
      double gap = stationarity_gap(cone, w);
      cands.push_back({{"w", to_json(w)},
                       {"im_L_residual", residual},
                       {"grad_norm_upstairs", (d.L.transpose() * w).norm()},
                       {"downstream_gap", gap},
                       {"valid", residual <= 1e-8 && gap <= -1e-4}});
    }
  }
  j["catalog_candidates"] = cands;
  j["required"] = required;
  j["verified"] = verified;
  return j;
}

Json trace_json(const std::vector<TraceRow>& trace) {
  Json it = Json::array(), val = Json::array(), gn = Json::array(), me = Json::array();
  for (const TraceRow& r : trace) {
    it.push_back(r.iter);
    val.push_back(num(r.value));
    gn.push_back(num(r.grad_norm));
    me.push_back(num(r.min_eig));
  }
  return {{"iter", it}, {"value", val}, {"gradnorm", gn}, {"mineig", me}};
}

Json optimize_record(const CatalogEntry& entry, const ExperimentConfig& cfg, const Vec& y0, std::uint64_t seed) {
  Cost f = make_cost(cfg.cost, entry.lift.ambient_dim(), split_seed(seed, 1));
  SolverParams sp;
  sp.seed = split_seed(seed, 2);
  SolverResult res;
  bool converged = true;
  try {
    res = find_second_order_point(entry.lift, f, y0, sp);
  } catch (const NotConvergedError& e) {
    res = e.best();
    converged = false;
  }
  TangentCone cone = cone_at(entry.set, value(entry.lift, res.y));
  Json j;
  j["cost"] = cost_kind_str(cfg.cost.kind);
  j["start"] = to_json(y0);
  j["converged"] = converged;
  j["iterations"] = res.iterations;
  j["value"] = num(res.value);
  j["grad_norm"] = num(res.grad_norm);
  j["min_eig"] = num(res.min_eig);
  j["y"] = to_json(res.y);
  j["x"] = to_json(value(entry.lift, res.y));
  j["downstream_gap"] = num(downstream_stationarity(entry.lift, f, res.y, cone));
  j["trace"] = trace_json(res.trace);
  return j;
}

Json taylor_record(const CatalogEntry& entry, const ExperimentConfig& cfg, const Vec& y, std::uint64_t seed) {
  TaylorReport t = taylor_check(entry.lift, y, split_seed(seed, 1));
  Json j;
  Json tj = Json::array(), r1 = Json::array(), r2 = Json::array();
  for (std::size_t i = 0; i < t.t.size(); ++i) {
    tj.push_back(t.t[i]);
    r1.push_back(t.first[i]);
    r2.push_back(t.second[i]);
  }
  j["t"] = tj;
  j["residual1"] = r1;
  j["residual2"] = r2;
  j["first_slope"] = num(t.first_slope);
  j["second_slope"] = num(t.second_slope);
  j["first_exact"] = t.first_exact;
  j["second_exact"] = t.second_exact;
  j["passed"] = t.passed;

  CostSpec cs = cfg.cost;
  if (cs.kind == CostSpec::Kind::RandomConvex) cs = {CostSpec::Kind::QuadraticQuartic, 0.1, {}};
  Cost f = make_cost(cs, entry.lift.ambient_dim(), split_seed(seed, 2));
  SlopeReport s = fd_validate(entry.lift, f, y, split_seed(seed, 3));
  j["fd"] = {{"cost", cost_kind_str(cs.kind)},
             {"grad_slope", num(s.grad_slope)},
             {"hess_slope", num(s.hess_slope)},
             {"grad_at_noise", s.grad_at_noise},
             {"hess_at_noise", s.hess_at_noise},
             {"passed", s.passed}};
  return j;
}

Json slp_record(const CatalogEntry& entry, const Vec& y, const CheckOptions& opt) {
  VerdictEvidence ve = local_to_local_verdict(&entry, y, opt);
  Json j;
  j["verdict"] = verdict_name(ve.verdict);
  j["evidence"] = ve.evidence;
  // a sequence, when present, must leave the fiber while x_i approaches x
  bool supported = true;
  const Json& seq = ve.evidence.contains("sequence") ? ve.evidence["sequence"] : Json();
  if (seq.is_array()) {
    for (const Json& row : seq) {
      double i = row["i"].get<double>();
      supported = supported && row["fiber_distance"].get<double>() >= 0.1 &&
                  row["x_distance"].get<double>() <= (1.0 + 1e-9) / i;
    }
    j["supported"] = supported;
  } else {
    j["supported"] = nullptr;
  }
  return j;
}

Json run_trial(const CatalogEntry& entry, const ExperimentConfig& cfg, int trial) {
  const std::uint64_t ts = split_seed(cfg.seed, static_cast<std::uint64_t>(trial));
  Json j;
  j["trial"] = trial;
  j["seed"] = ts;
  try {
    Vec y = trial_point(entry, cfg.point, split_seed(ts, 1));
    j["y"] = to_json(y);
    CheckOptions opt;
    opt.seed = split_seed(ts, 2);
    auto has = [&](Task t) { return std::find(cfg.tasks.begin(), cfg.tasks.end(), t) != cfg.tasks.end(); };
    std::optional<PropertyReport> rep;
    if (has(Task::Check) || has(Task::Witness)) rep = check_point(entry, y, opt);
    if (has(Task::Check)) j["check"] = check_record(entry, *rep);
    if (has(Task::Witness)) j["witness"] = witness_record(entry, *rep);
    if (has(Task::Optimize)) j["optimize"] = optimize_record(entry, cfg, y, split_seed(ts, 3));
    if (has(Task::Taylor)) j["taylor"] = taylor_record(entry, cfg, y, split_seed(ts, 4));
    if (has(Task::SlpEvidence)) j["slp-evidence"] = slp_record(entry, y, opt);
  } catch (const Error& e) {
    j["error"] = {{"code", errc_name(e.code())}, {"what", e.what()}};
  }
  return j;
}

struct MinTracker {
  double v = std::numeric_limits<double>::infinity();
  void add(const Json& x) {
    if (x.is_number()) v = std::min(v, x.get<double>());
  }
};

struct MaxTracker {
  double v = -std::numeric_limits<double>::infinity();
  void add(const Json& x) {
    if (x.is_number()) v = std::max(v, x.get<double>());
  }
};

Json summarize(const ExperimentConfig& cfg, const Json& records) {
  int errors = 0;
  int chk = 0, chk_ok = 0, non_mono = 0;
  int wit = 0, wit_req = 0, wit_ok = 0;
  int opt = 0, opt_conv = 0;
  MinTracker opt_gap;
  MaxTracker opt_grad;
  int tay = 0, tay_ok = 0, fd_ok = 0;
  MinTracker s1, s2;
  int slp = 0, slp_seq = 0, slp_ok = 0;
  MinTracker margin;
  for (const Json& r : records) {
    if (r.contains("error")) ++errors;
    if (r.contains("check")) {
      ++chk;
      chk_ok += r["check"]["matched"].get<bool>();
      non_mono += !r["check"]["monotone"].get<bool>();
    }
    if (r.contains("witness")) {
      ++wit;
      wit_req += r["witness"]["required"].get<int>();
      wit_ok += r["witness"]["verified"].get<bool>();
    }
    if (r.contains("optimize")) {
      ++opt;
      opt_conv += r["optimize"]["converged"].get<bool>();
      opt_gap.add(r["optimize"]["downstream_gap"]);
      opt_grad.add(r["optimize"]["grad_norm"]);
    }
    if (r.contains("taylor")) {
      ++tay;
      tay_ok += r["taylor"]["passed"].get<bool>();
      fd_ok += r["taylor"]["fd"]["passed"].get<bool>();
      s1.add(r["taylor"]["first_slope"]);
      s2.add(r["taylor"]["second_slope"]);
    }
    if (r.contains("slp-evidence")) {
      ++slp;
      const Json& s = r["slp-evidence"];
      if (s["supported"].is_boolean()) {
        ++slp_seq;
        slp_ok += s["supported"].get<bool>();
        margin.add(s["evidence"]["margin"]);
      }
    }
  }
  Json j;
  j["trials"] = cfg.trials;
  j["errors"] = errors;
  if (chk) j["check"] = {{"records", chk}, {"matched", chk_ok}, {"mismatched", chk - chk_ok}, {"non_monotone", non_mono}};
  if (wit) j["witness"] = {{"records", wit}, {"required", wit_req}, {"verified", wit_ok}, {"unverified", wit - wit_ok}};
  if (opt)
    j["optimize"] = {{"runs", opt},
                     {"converged", opt_conv},
                     {"min_downstream_gap", num(opt_gap.v)},
                     {"max_grad_norm", num(opt_grad.v)}};
  if (tay)
    j["taylor"] = {{"runs", tay},
                   {"passed", tay_ok},
                   {"fd_passed", fd_ok},
                   {"min_first_slope", num(s1.v)},
                   {"min_second_slope", num(s2.v)}};
  if (slp)
    j["slp-evidence"] = {{"records", slp}, {"sequences", slp_seq}, {"supported", slp_ok}, {"min_margin", num(margin.v)}};
  j["all_expectations_matched"] = errors == 0 && chk_ok == chk && slp_ok == slp_seq;
  j["all_witnesses_verified"] = errors == 0 && wit_ok == wit;
  return j;
}

int thread_count(const RunOptions& opt, int work) {
  int n = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(work, 1));
}

}  // namespace

const char* task_name(Task t) {
  switch (t) {
    case Task::Check: return "check";
    case Task::Witness: return "witness";
    case Task::Optimize: return "optimize";
    case Task::Taylor: return "taylor";
    case Task::SlpEvidence: return "slp-evidence";
  }
  return "?";
}

Task parse_task(const std::string& s) {
  for (Task t : kAllTasks)
    if (s == task_name(t)) return t;
  bad("unknown task '" + s + "'");
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["entry"] = entry;
  j["params"] = params;
  Json p;
  switch (point.kind) {
    case PointSpec::Kind::Regime: p["regime"] = point.regime; break;
    case PointSpec::Kind::Coords: p["coords"] = lifts::to_json(point.coords); break;
    case PointSpec::Kind::Random: p["random"] = true; break;
  }
  j["point"] = p;
  Json t = Json::array();
  for (Task k : tasks) t.push_back(task_name(k));
  j["tasks"] = t;
  j["trials"] = trials;
  j["seed"] = seed;
  Json c;
  c["kind"] = cost_kind_str(cost.kind);
  if (cost.kind == CostSpec::Kind::QuadraticQuartic) c["quartic"] = cost.quartic;
  if (cost.kind == CostSpec::Kind::Linear && cost.w.size()) c["w"] = lifts::to_json(cost.w);
  j["cost"] = c;
  return j;
}

EntryParams entry_params(const std::string& entry, const Json& params) {
  if (!params.is_object()) bad("params: expected a table");
  reject_unknown(params, {"n", "m", "r", "r1", "r2", "dims", "perm", "constraints", "seed"}, "params");
  EntryParams p = default_params(entry);
  auto idx = [&](const char* k, Index& out) {
    if (!params.contains(k)) return;
    if (!params[k].is_number_integer() || params[k].get<long long>() < 1) bad(std::string("params.") + k + ": expected a positive integer");
    out = params[k].get<Index>();
  };
  idx("n", p.n);
  idx("m", p.m);
  idx("r", p.r);
  idx("constraints", p.constraints);
  if (params.contains("r1")) p.r1 = params["r1"].get<double>();
  if (params.contains("r2")) p.r2 = params["r2"].get<double>();
  if (params.contains("dims")) p.dims = params["dims"].get<std::vector<Index>>();
  if (params.contains("perm")) p.perm = params["perm"].get<std::vector<Index>>();
  if (params.contains("seed")) p.seed = params["seed"].get<std::uint64_t>();
  return p;
}

ExperimentConfig parse_experiment(const Json& j) {
  if (!j.is_object()) bad("experiment: expected a table");
  reject_unknown(j, {"entry", "params", "point", "tasks", "trials", "seed", "output", "cost"}, "experiment");
  ExperimentConfig c;
  try {
    if (!j.contains("entry") || !j["entry"].is_string()) bad("experiment: 'entry' is required");
    c.entry = j["entry"].get<std::string>();
    const auto ids = catalog_ids();
    if (std::find(ids.begin(), ids.end(), c.entry) == ids.end()) bad("unknown entry '" + c.entry + "'");
    if (j.contains("params")) c.params = j["params"];
    CatalogEntry e = build(c.entry, entry_params(c.entry, c.params));

    if (j.contains("point")) {
      const Json& p = j["point"];
      if (p.is_string()) {
        c.point.kind = PointSpec::Kind::Regime;
        c.point.regime = p.get<std::string>();
      } else {
        if (!p.is_object() || p.size() != 1) bad("point: expected one of regime, coords, random");
        reject_unknown(p, {"regime", "coords", "random"}, "point");
        if (p.contains("regime")) {
          c.point.kind = PointSpec::Kind::Regime;
          c.point.regime = p["regime"].get<std::string>();
        } else if (p.contains("coords")) {
          c.point.kind = PointSpec::Kind::Coords;
          c.point.coords = vec_from_json(p["coords"]);
        } else {
          c.point.kind = PointSpec::Kind::Random;
        }
      }
    }
    if (c.point.kind == PointSpec::Kind::Regime &&
        std::find(e.regimes.begin(), e.regimes.end(), c.point.regime) == e.regimes.end())
      bad("regime '" + c.point.regime + "' is not valid for " + c.entry);
    if (c.point.kind == PointSpec::Kind::Coords) {
      if (c.point.coords.size() != e.lift.manifold.ambient_dim())
        bad("point.coords: expected " + std::to_string(e.lift.manifold.ambient_dim()) + " coordinates");
      if (manifold_residual(e.lift.manifold, c.point.coords) > 1e-8) bad("point.coords: not on the manifold");
    }

    if (j.contains("tasks")) {
      for (const Json& t : j["tasks"]) {
        Task k = parse_task(t.get<std::string>());
        if (std::find(c.tasks.begin(), c.tasks.end(), k) == c.tasks.end()) c.tasks.push_back(k);
      }
    }
    if (j.contains("trials")) {
      if (!j["trials"].is_number_integer() || j["trials"].get<long long>() < 1) bad("trials: expected a positive integer");
      c.trials = j["trials"].get<int>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    if (j.contains("cost")) {
      const Json& cj = j["cost"];
      reject_unknown(cj, {"kind", "quartic", "w"}, "cost");
      std::string kind = cj.value("kind", "random_convex");
      if (kind == "random_convex") c.cost.kind = CostSpec::Kind::RandomConvex;
      else if (kind == "quadratic_quartic") c.cost.kind = CostSpec::Kind::QuadraticQuartic;
      else if (kind == "linear") c.cost.kind = CostSpec::Kind::Linear;
      else bad("cost.kind: unknown '" + kind + "'");
      c.cost.quartic = cj.value("quartic", 0.1);
      if (cj.contains("w")) c.cost.w = vec_from_json(cj["w"]);
      if (c.cost.w.size() && c.cost.w.size() != e.lift.ambient_dim()) bad("cost.w: wrong dimension");
    }
  } catch (const nlohmann::json::exception& ex) {
    bad(std::string("config: ") + ex.what());
  }
  return c;
}

Json run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  const CatalogEntry entry = build(cfg.entry, entry_params(cfg.entry, cfg.params));
  std::vector<Json> records(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < cfg.trials; t = next++) records[static_cast<std::size_t>(t)] = run_trial(entry, cfg, t);
  };
  {
    std::vector<std::jthread> pool;
    const int n = thread_count(opt, cfg.trials);
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }
  Json out;
  out["config"] = cfg.to_json();
  out["trials"] = Json(records);
  out["summary"] = summarize(cfg, out["trials"]);
  return out;
}

std::vector<ExperimentConfig> default_suite(std::uint64_t seed) {
  std::vector<ExperimentConfig> out;
  std::uint64_t k = 0;
  auto add = [&](ExperimentConfig c) {
    c.seed = split_seed(seed, k++);
    out.push_back(std::move(c));
  };
  for (const std::string& id : catalog_ids()) {
    const CatalogEntry e = build(id);
    for (const std::string& reg : e.regimes) {
      ExperimentConfig c;
      c.entry = id;
      c.point = {PointSpec::Kind::Regime, reg, {}};
      c.tasks = {Task::Check, Task::Witness, Task::Taylor};
      c.trials = 20;
      add(c);
    }
  }
  {
    ExperimentConfig c;
    c.entry = "hadamard";
    c.params = {{"n", 10}};
    c.tasks = {Task::Optimize};
    c.trials = 20;
    add(c);
  }
  for (auto [id, reg] : {std::pair{"desing_chart", "rank_deficient"}, std::pair{"svd", "repeated"},
                         std::pair{"lr", "unbalanced"}, std::pair{"nodal_cubic", "node"}}) {
    ExperimentConfig c;
    c.entry = id;
    c.point = {PointSpec::Kind::Regime, reg, {}};
    c.tasks = {Task::SlpEvidence};
    c.trials = 5;
    add(c);
  }
  return out;
}

Json run_suite(const std::vector<ExperimentConfig>& experiments, std::uint64_t seed, const RunOptions& opt) {
  Json out;
  out["suite"] = {{"seed", seed}, {"experiments", experiments.size()}};
  Json reports = Json::array();
  bool matched = true, verified = true;
  int trials = 0, errors = 0;
  for (const ExperimentConfig& c : experiments) {
    Json r = run_experiment(c, opt);
    matched = matched && r["summary"]["all_expectations_matched"].get<bool>();
    verified = verified && r["summary"]["all_witnesses_verified"].get<bool>();
    trials += c.trials;
    errors += r["summary"]["errors"].get<int>();
    reports.push_back(std::move(r));
  }
  out["experiments"] = reports;
  out["summary"] = {{"experiments", experiments.size()},
                    {"trials", trials},
                    {"errors", errors},
                    {"all_expectations_matched", matched},
                    {"all_witnesses_verified", verified}};
  return out;
}

bool report_ok(const Json& report) {
  const Json& s = report.at("summary");
  return s.at("all_expectations_matched").get<bool>() && s.at("all_witnesses_verified").get<bool>();
}

std::string emit_plot_data(const Json& report, PlotKind kind) {
  std::vector<const Json*> reports;
  if (report.contains("experiments")) {
    for (const Json& r : report["experiments"]) reports.push_back(&r);
  } else {
    reports.push_back(&report);
  }
  std::ostringstream os;
  os.precision(17);
  os << (kind == PlotKind::Taylor ? "trial,t,residual1,residual2\n" : "trial,iter,gradnorm,mineig\n");
  auto cell = [&](const Json& v) {
    if (v.is_number()) os << v.get<double>();
    else os << "nan";
  };
  int rows = 0;
  int trial_id = 0;
  for (const Json* r : reports) {
    for (const Json& t : r->at("trials")) {
      if (kind == PlotKind::Taylor && t.contains("taylor")) {
        const Json& tj = t["taylor"];
        for (std::size_t i = 0; i < tj["t"].size(); ++i, ++rows) {
          os << trial_id << ',';
          cell(tj["t"][i]);
          os << ',';
          cell(tj["residual1"][i]);
          os << ',';
          cell(tj["residual2"][i]);
          os << '\n';
        }
      }
      if (kind == PlotKind::Trace && t.contains("optimize")) {
        const Json& tr = t["optimize"]["trace"];
        for (std::size_t i = 0; i < tr["iter"].size(); ++i, ++rows) {
          os << trial_id << ',' << tr["iter"][i].get<int>() << ',';
          cell(tr["gradnorm"][i]);
          os << ',';
          cell(tr["mineig"][i]);
          os << '\n';
        }
      }
      ++trial_id;
    }
  }
  if (rows == 0)
    throw Error(Errc::NoData, kind == PlotKind::Taylor ? "report has no taylor task" : "report has no optimize task");
  return os.str();
}

}  // namespace lifts::cli
