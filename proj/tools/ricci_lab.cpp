// ricci_lab: batch runs and the verdict table.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 divergence, 4 resolution exhausted.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "ricci/acceptance.hpp"
#include "ricci/canonical_neighborhoods.hpp"
#include "ricci/config.hpp"
#include "ricci/deturck.hpp"
#include "ricci/io.hpp"
#include "ricci/monitors.hpp"
#include "ricci/presets.hpp"
#include "ricci/surgery.hpp"

using namespace ricci;
using io::Json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kDivergence = 3, kResolution = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::pair<int, int>> markers_for(const RunConfig& cfg, int labels) {
  if (!cfg.distances || labels < 2) return {};
  std::vector<std::pair<int, int>> m{{0, labels - 1}, {0, labels / 2}};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick(0, labels - 1);
  for (int k = 0; k < cfg.random_markers; ++k) {
    int a = pick(rng), b = pick(rng);
    if (a == b) b = (b + 1) % labels;
    m.emplace_back(std::min(a, b), std::max(a, b));
  }
  return m;
}

MonitorTrace trace_for(const RunConfig& cfg, const FlowHistory& h) {
  int labels = h.material.empty() ? 0 : static_cast<int>(h.material[0].size());
  auto tr = compute_trace(h, markers_for(cfg, labels));
  if (!cfg.distances) {
    tr.markers.clear();
    for (auto& r : tr.records) r.distances.clear();
  }
  if (!cfg.harnack)
    for (auto& r : tr.records) r.harnack = std::numeric_limits<double>::quiet_NaN();
  return tr;
}

Json verdict_json(const Verdict& v) {
  return {{"pass", v.pass}, {"min_gap", io::number(v.min_gap)}, {"max_gap", io::number(v.max_gap)},
          {"intervals", v.intervals.size()}};
}

Json monitor_verdicts(const RunConfig& cfg, const FlowHistory& h, const MonitorTrace& tr) {
  Json v;
  v["rmin_ode"] = verdict_json(check_rmin_ode(tr));
  auto w = check_w2_ode(tr);
  v["w2_ode"] = w.intervals.empty() ? Json{{"pass", true}, {"skipped", "no poles"}} : verdict_json(w);
  v["volume_bound"] = verdict_json(volume_bound_check(tr));
  if (cfg.distances && tr.nonneg_start)
    v["distance_contraction"] = verdict_json(distance_contraction_check(tr));
  else
    v["distance_contraction"] = {{"pass", true}, {"skipped", cfg.distances ? "negative curvature at t = 0" : "off"}};
  if (h.status.kind == TerminalKind::singular && !h.material.empty()) {
    auto pr = pinching_at_label(h, blowup_label(h));
    double ratio = pr.front() > 0 ? pr.back() / pr.front() : 0;
    v["pinching"] = {{"pass", pr.front() <= 0 || ratio < 0.1}, {"final_over_initial", io::number(ratio)}};
  }
  if (cfg.harnack) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : tr.records)
      if (r.t > 0 && std::isfinite(r.harnack) && r.r_max > 0) worst = std::min(worst, r.harnack / (r.r_max * r.r_max));
    if (std::isfinite(worst) && tr.nonneg_start)
      v["harnack"] = {{"pass", worst >= -1e-3}, {"min_over_R2", io::number(worst)}};
  }
  return v;
}

Json neighbourhood_counts(const RunConfig& cfg, const WarpedProfile& p) {
  std::map<std::string, int> counts;
  for (const auto& l : classify_profile(p, cfg.eps, cfg.C)) ++counts[to_string(l.kind)];
  return counts;
}

bool all_pass(const Json& verdicts) {
  for (const auto& [k, v] : verdicts.items())
    if (!v.value("pass", true)) return false;
  return true;
}

struct Paths {
  std::string dir;
  std::string operator()(const char* name) const { return (std::filesystem::path(dir) / name).string(); }
};

Json component_summary(const RunConfig& cfg, int id, const FlowHistory& h, const MonitorTrace& tr) {
  Json c;
  c["id"] = id;
  c["status"] = io::to_json(h.status);
  c["snapshots"] = h.size();
  c["steps"] = h.steps;
  c["threshold"] = io::number(h.threshold);
  c["verdicts"] = monitor_verdicts(cfg, h, tr);
  if (!h.snapshots.empty()) c["neighbourhoods"] = neighbourhood_counts(cfg, h.snapshots.back());
  return c;
}

ComponentLedger single_ledger(const FlowHistory& h) {
  ComponentLedger l;
  int id = l.add_component(h.times.empty() ? 0 : h.times.front(), profile_topology(h.snapshots.front()));
  auto& c = l.component(id);
  if (h.status.kind == TerminalKind::extinct) {
    c.fate = ComponentFate::extinct;
    c.death = h.status.time;
  }
  return l;
}

// Writes trace, ledger and summary of a pure flow; returns whether every verdict passed.
bool write_flow_artifacts(const RunConfig& cfg, const FlowHistory& h, Json extra) {
  Paths at{cfg.out};
  auto tr = trace_for(cfg, h);
  io::write_file(at("trace.csv"), io::trace_csv_header(tr) + io::trace_csv_rows(tr, 0));
  io::write_json(at("ledger.json"), io::to_json(single_ledger(h)));
  Json s = std::move(extra);
  s["scenario"] = cfg.scenario;
  s["backend"] = cfg.backend;
  s["surgeries"] = 0;
  s["status"] = to_string(h.status.kind);
  if (h.status.kind == TerminalKind::extinct) s["extinction_time"] = io::number(h.status.time);
  if (h.status.kind == TerminalKind::singular) s["singular_time"] = io::number(h.status.time);
  s["trace_rows"] = tr.size();
  auto comp = component_summary(cfg, 0, h, tr);
  s["all_verdicts_pass"] = all_pass(comp["verdicts"]);
  s["components"] = Json::array({comp});
  io::write_json(at("summary.json"), s);
  return s["all_verdicts_pass"].get<bool>();
}

int run_flow(RunConfig cfg, const std::optional<io::Checkpoint>& resumed) {
  Paths at{cfg.out};
  RunnerState st;
  StepControl control = cfg.control;
  double t_end = cfg.t_end;
  if (resumed) {
    st = resumed->state;
    control = resumed->control;
    t_end = resumed->t_end;
  } else {
    st = start_run(warped_preset(cfg.scenario, cfg.nodes), control);
  }
  auto save = [&] {
    io::Checkpoint cp{st, control, t_end, Json::parse(render(cfg))};
    io::write_json(at("checkpoint.json"), io::to_json(cp));
  };
  try {
    long budget = cfg.checkpoint_every > 0 ? cfg.checkpoint_every : -1;
    while (!advance(st, control, t_end, budget)) save();
    if (cfg.checkpoint_every > 0) save();
  } catch (const DivergenceError& e) {
    write_flow_artifacts(cfg, st.history, {{"error", e.what()}, {"diverged", true}});
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  }
  bool ok = write_flow_artifacts(cfg, st.history, {{"diverged", false}});
  const auto& s = st.history.status;
  std::cout << cfg.scenario << ": " << to_string(s.kind) << " at t = " << io::format_double(s.time)
            << ", snapshots " << st.history.size() << ", verdicts " << (ok ? "pass" : "FAIL") << "\n";
  return kOk;
}

int run_surgery(const RunConfig& cfg) {
  Paths at{cfg.out};
  SurgeryRunResult res;
  try {
    res = run_with_surgery(warped_preset(cfg.scenario, cfg.nodes), cfg.control, cfg.surgery_params, cfg.t_end);
  } catch (const ResolutionError& e) {
    io::write_json(at("summary.json"), {{"scenario", cfg.scenario}, {"error", e.what()}, {"resolution_exhausted", true}});
    std::cerr << "resolution exhausted: " << e.what() << "\n";
    return kResolution;
  } catch (const DivergenceError& e) {
    io::write_json(at("summary.json"), {{"scenario", cfg.scenario}, {"error", e.what()}, {"diverged", true}});
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  }
  std::string csv;
  Json comps = Json::array();
  std::size_t rows = 0, snaps = 0;
  bool ok = true;
  for (const auto& r : res.runs) {
    auto tr = trace_for(cfg, r.history);
    if (csv.empty()) csv = io::trace_csv_header(tr);
    csv += io::trace_csv_rows(tr, r.id);
    rows += tr.size();
    snaps += r.history.size();
    auto c = component_summary(cfg, r.id, r.history, tr);
    ok = ok && all_pass(c["verdicts"]);
    comps.push_back(std::move(c));
  }
  io::write_file(at("trace.csv"), csv);
  io::write_json(at("ledger.json"), io::to_json(res.ledger));
  Json books = Json::array();
  for (const auto& b : res.books)
    books.push_back({{"time", io::number(b.time)},
                     {"h", io::number(b.h)},
                     {"nodes", b.nodes},
                     {"volume_before", io::number(b.volume_before)},
                     {"volume_after", io::number(b.volume_after)},
                     {"volume_removed", io::number(b.volume_removed)},
                     {"volume_tolerance", io::number(b.volume_tolerance)},
                     {"closes", std::abs(b.volume_before - b.volume_after - b.volume_removed) <= b.volume_tolerance},
                     {"max_blend_wss", io::number(b.max_blend_wss)},
                     {"min_sectional", io::number(b.min_sectional)}});
  Json topo = Json::array();
  for (const auto& t : reconstruct_presurgery_topology(res.ledger, 0.0))
    topo.push_back({{"id", t.id}, {"topology", t.topology.to_string()}, {"partial", t.topology.partial}});
  Json s{{"scenario", cfg.scenario},
         {"backend", cfg.backend},
         {"surgeries", res.ledger.surgery_count()},
         {"extinctions", res.extinctions},
         {"extinction_time", io::number(res.extinction_time)},
         {"finished", res.finished},
         {"h", io::number(res.h)},
         {"volume_budget", io::number(res.volume_budget)},
         {"discreteness_ok", res.discreteness_ok},
         {"books", books},
         {"initial_topology", topo},
         {"notes", res.notes},
         {"trace_rows", rows},
         {"snapshots", snaps},
         {"all_verdicts_pass", ok},
         {"components", comps}};
  io::write_json(at("summary.json"), s);
  std::cout << cfg.scenario << ": " << res.ledger.surgery_count() << " surgeries, " << res.extinctions
            << " extinctions, last at t = " << io::format_double(res.extinction_time) << ", initial topology "
            << (topo.empty() ? std::string("?") : topo[0]["topology"].get<std::string>()) << "\n";
  return kOk;
}

int run_deturck(const RunConfig& cfg) {
  Paths at{cfg.out};
  auto m = flat_torus_perturbed(cfg.torus_dims, cfg.torus_eps, cfg.torus_mode, 0);
  DeturckTrace tr;
  try {
    tr = deturck_flow(m, cfg.t_end, cfg.control.cfl_fraction, 1);
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  }
  std::string csv = "t,energy\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    csv += io::format_double(tr.times[i]) + "," + io::format_double(tr.energy[i]) + "\n";
  io::write_file(at("trace.csv"), csv);
  io::write_json(at("final_chart.json"), io::chart_to_json(m));
  bool mono = std::is_sorted(tr.energy.rbegin(), tr.energy.rend());
  double ratio = tr.energy.back() / tr.energy.front();
  io::write_json(at("summary.json"), {{"scenario", cfg.scenario},
                                      {"backend", cfg.backend},
                                      {"trace_rows", tr.times.size()},
                                      {"initial_energy", io::number(tr.energy.front())},
                                      {"final_energy", io::number(tr.energy.back())},
                                      {"decay_ratio", io::number(ratio)},
                                      {"monotone", mono}});
  std::cout << cfg.scenario << ": energy ratio " << io::format_double(ratio) << (mono ? ", monotone" : ", NOT monotone")
            << "\n";
  return kOk;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--resolution-sweep: '" + item + "' is not an integer");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ricci flow with surgery on rotationally symmetric 3-manifolds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ricci_lab 1.0");

  RunConfig cfg;
  std::string config_file, surgery_flag = "off";
  auto* run = app.add_subcommand("run", "run one scenario and write trace, ledger, summary and checkpoints");
  run->add_option("--config", config_file, "JSON config; flags and RICCI_LAB_* variables override it")
      ->envname("RICCI_LAB_CONFIG");
  std::map<std::string, CLI::Option*> o;
  o["scenario"] = run->add_option("--scenario", cfg.scenario, "scenario preset")->envname("RICCI_LAB_SCENARIO");
  o["nodes"] = run->add_option("--nodes", cfg.nodes, "grid nodes")->envname("RICCI_LAB_NODES");
  o["t_end"] = run->add_option("--t-end", cfg.t_end, "final time")->envname("RICCI_LAB_T_END");
  o["backend"] = run->add_option("--backend", cfg.backend, "warped or deturck")->envname("RICCI_LAB_BACKEND");
  o["surgery"] = run->add_option("--surgery", surgery_flag, "on or off")->envname("RICCI_LAB_SURGERY");
  o["eps"] = run->add_option("--eps", cfg.eps, "neighbourhood classifier eps")->envname("RICCI_LAB_EPS");
  o["delta"] = run->add_option("--delta", cfg.surgery_params.delta, "delta-neck tolerance")->envname("RICCI_LAB_DELTA");
  o["A"] = run->add_option("--A", cfg.surgery_params.A, "cut distance beyond the site, in units of h")
               ->envname("RICCI_LAB_A");
  o["h_scale"] = run->add_option("--h-scale", cfg.surgery_params.h_scale, "h as a fraction of the low-curvature scale")
                     ->envname("RICCI_LAB_H_SCALE");
  o["out"] = run->add_option("--out", cfg.out, "output directory")->envname("RICCI_LAB_OUT");
  o["checkpoint_every"] =
      run->add_option("--checkpoint-every", cfg.checkpoint_every, "steps between checkpoints (0: none)")
          ->envname("RICCI_LAB_CHECKPOINT_EVERY");
  o["resume"] = run->add_option("--resume", cfg.resume, "checkpoint to resume from")->envname("RICCI_LAB_RESUME");
  o["seed"] = run->add_option("--seed", cfg.seed, "seed for the random distance markers")->envname("RICCI_LAB_SEED");
  o["cfl"] = run->add_option("--cfl", cfg.control.cfl_fraction, "CFL fraction")->envname("RICCI_LAB_CFL");
  o["beta"] = run->add_option("--monitor-beta", cfg.control.monitor_beta, "curvature weight of the regrid monitor")
                  ->envname("RICCI_LAB_MONITOR_BETA");
  bool print_config = false;
  run->add_flag("--print-config", print_config, "print the effective config and exit");

  std::string only, sweep, verify_out;
  bool serial = false, as_json = false;
  auto* verify = app.add_subcommand("verify", "run the acceptance checks and print one row per criterion");
  verify->add_option("--only", only, "comma-separated criterion names or ids")->envname("RICCI_LAB_ONLY");
  verify->add_option("--resolution-sweep", sweep, "comma-separated node counts for the convergence checks")
      ->envname("RICCI_LAB_RESOLUTION_SWEEP");
  verify->add_option("--out", verify_out, "also write verdicts.json here");
  verify->add_flag("--serial", serial, "one criterion at a time");
  verify->add_flag("--json", as_json, "print JSON instead of the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) {
      // config file first, then anything given on the command line or in the environment
      RunConfig base;
      if (!config_file.empty()) base = parse_run_config(io::read_file(config_file));
      std::optional<io::Checkpoint> resumed;
      std::string resume_path = o["resume"]->count() ? cfg.resume : base.resume;
      if (!resume_path.empty()) {
        resumed = io::checkpoint_from_json(io::read_json(resume_path));
        if (!resumed->config.is_null()) base = parse_run_config(resumed->config.dump());
      }
      RunConfig flags = cfg;
      cfg = base;
      auto given = [&](const char* k) { return o[k]->count() > 0; };
      if (given("scenario")) cfg.scenario = flags.scenario;
      if (given("nodes")) cfg.nodes = flags.nodes;
      if (given("t_end")) cfg.t_end = flags.t_end;
      if (given("backend")) cfg.backend = flags.backend;
      if (given("surgery")) {
        if (surgery_flag != "on" && surgery_flag != "off") throw ConfigError("surgery: must be on or off");
        cfg.surgery = surgery_flag == "on";
      }
      if (given("eps")) cfg.eps = flags.eps;
      if (given("delta")) cfg.surgery_params.delta = flags.surgery_params.delta;
      if (given("A")) cfg.surgery_params.A = flags.surgery_params.A;
      if (given("h_scale")) cfg.surgery_params.h_scale = flags.surgery_params.h_scale;
      if (given("out")) cfg.out = flags.out;
      if (given("checkpoint_every")) cfg.checkpoint_every = flags.checkpoint_every;
      if (given("seed")) cfg.seed = flags.seed;
      if (given("cfl")) cfg.control.cfl_fraction = flags.control.cfl_fraction;
      if (given("beta")) cfg.control.monitor_beta = flags.control.monitor_beta;
      cfg.resume = resume_path;
      if (cfg.scenario == "flat-torus-perturbed" && !given("backend") && config_file.empty()) cfg.backend = "deturck";
      if (resumed && (given("t_end") || given("nodes") || given("scenario") || given("backend")))
        throw ConfigError("resume: scenario, nodes, t-end and backend come from the checkpoint");

      auto errs = validate(cfg);
      if (!errs.empty()) {
        for (const auto& e : errs) std::cerr << "config error: " << e << "\n";
        return kConfig;
      }
      if (print_config) {
        std::cout << render(cfg);
        return kOk;
      }
      std::filesystem::create_directories(cfg.out);
      io::write_file((std::filesystem::path(cfg.out) / "config.json").string(), render(cfg));
      if (cfg.backend == "deturck") return run_deturck(cfg);
      if (cfg.surgery) return run_surgery(cfg);
      return run_flow(cfg, resumed);
    }

    AcceptanceOptions ao;
    ao.parallel = !serial;
    if (!only.empty()) {
      std::stringstream ss(only);
      std::string item;
      while (std::getline(ss, item, ',')) ao.only.push_back(item);
    }
    if (!sweep.empty()) ao.resolutions = parse_int_list(sweep);
    std::vector<CriterionResult> results;
    try {
      results = run_acceptance(ao);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
    Json rows = Json::array();
    for (const auto& r : results) {
      Json m = Json::object();
      for (const auto& [k, v] : r.metrics) m[k] = io::number(v);
      rows.push_back({{"id", r.info.id},
                      {"criterion", r.info.slug},
                      {"pass", r.pass},
                      {"order", std::isnan(r.order) ? Json() : io::number(r.order)},
                      {"seconds", r.seconds},
                      {"metrics", m},
                      {"failures", r.failures},
                      {"error", r.error}});
    }
    if (!verify_out.empty()) {
      std::filesystem::create_directories(verify_out);
      io::write_json((std::filesystem::path(verify_out) / "verdicts.json").string(), rows);
    }
    if (as_json) {
      std::cout << rows.dump(1) << "\n";
    } else {
      std::printf("%-3s %-15s %-5s %-7s %-8s %s\n", "id", "criterion", "pass", "order", "seconds", "detail");
      for (const auto& r : results) {
        std::string detail = !r.error.empty() ? "error: " + r.error : r.failures.empty() ? "" : r.failures.front();
        std::string order = std::isnan(r.order) ? "-" : io::format_double(std::round(r.order * 100) / 100);
        std::printf("%-3d %-15s %-5s %-7s %-8.1f %s\n", r.info.id, r.info.slug.c_str(), r.pass ? "yes" : "NO",
                    order.c_str(), r.seconds, detail.c_str());
      }
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const FormatError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ResolutionError& e) {
    std::cerr << "resolution exhausted: " << e.what() << "\n";
    return kResolution;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
