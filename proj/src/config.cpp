#include "ricci/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ricci/io.hpp"
#include "ricci/presets.hpp"

namespace ricci {

using io::Json;

std::vector<std::string> scenario_names() { return preset_names(); }

namespace {

Json render_json(const RunConfig& c) {
  const auto& s = c.surgery_params;
  Json j;
  j["scenario"] = c.scenario;
  j["nodes"] = c.nodes;
  j["t_end"] = io::number(c.t_end);
  j["backend"] = c.backend;
  j["control"] = io::to_json(c.control);
  j["surgery"] = {{"enabled", c.surgery},
                  {"r_fraction", io::number(s.r_fraction)},
                  {"h_scale", io::number(s.h_scale)},
                  {"A", io::number(s.A)},
                  {"delta", io::number(s.delta)},
                  {"horn_half_length", io::number(s.horn_neck.half_length)},
                  {"horn_tolerance", io::number(s.horn_neck.tolerance)},
                  {"transition_length", io::number(s.transition_length)},
                  {"smoothness_order", s.smoothness_order},
                  {"max_refinements", s.max_refinements},
                  {"max_h_halvings", s.max_h_halvings},
                  {"max_surgeries", s.max_surgeries},
                  {"glue_nodes", s.glue.nodes},
                  {"glue_monitor_beta", io::number(s.glue.monitor_beta)},
                  {"glue_half_length", io::number(s.glue.half_length)}};
  j["classifier"] = {{"eps", io::number(c.eps)}, {"C", io::number(c.C)}};
  j["monitors"] = {{"harnack", c.harnack},
                   {"distances", c.distances},
                   {"seed", c.seed},
                   {"random_markers", c.random_markers}};
  j["output"] = {{"out", c.out}, {"checkpoint_every", c.checkpoint_every}, {"resume", c.resume}};
  j["torus"] = {{"dims", c.torus_dims}, {"eps", io::number(c.torus_eps)}, {"mode", c.torus_mode}};
  return j;
}

// Reads the keys present in `src` into `dst`, rejecting unknown ones.
struct Reader {
  const Json& src;
  std::string prefix;
  std::set<std::string> seen;

  Reader(const Json& j, std::string p) : src(j), prefix(std::move(p)) {}

  template <typename T>
  void operator()(const char* key, T& dst) {
    seen.insert(key);
    auto it = src.find(key);
    if (it == src.end()) return;
    try {
      if constexpr (std::is_same_v<T, double>)
        dst = io::to_double(*it);
      else
        dst = it->get<T>();
    } catch (const std::exception& e) {
      throw FormatError(prefix + key + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = src.begin(); it != src.end(); ++it)
      if (!seen.count(it.key())) throw FormatError(prefix + it.key() + ": unknown field");
  }
};

const Json& section(const Json& j, const char* key) {
  static const Json empty = Json::object();
  auto it = j.find(key);
  if (it == j.end()) return empty;
  if (!it->is_object()) throw FormatError(std::string(key) + ": expected an object");
  return *it;
}

}  // namespace

bool RunConfig::operator==(const RunConfig& o) const { return render_json(*this) == render_json(o); }

std::string render(const RunConfig& c) { return render_json(c).dump(2) + "\n"; }

RunConfig parse_run_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config: expected an object");
  RunConfig c;
  Reader top{j, ""};
  top("scenario", c.scenario);
  top("nodes", c.nodes);
  top("t_end", c.t_end);
  top("backend", c.backend);
  for (const char* k : {"control", "surgery", "classifier", "monitors", "output", "torus"}) top.seen.insert(k);
  top.finish();

  Reader ctl{section(j, "control"), "control."};
  auto& sc = c.control;
  ctl("cfl_fraction", sc.cfl_fraction);
  ctl("max_R_threshold", sc.max_R_threshold);
  ctl("regrid_interval", sc.regrid_interval);
  ctl("curvature_dt", sc.curvature_dt);
  ctl("monitor_beta", sc.monitor_beta);
  ctl("regrid_tolerance", sc.regrid_tolerance);
  ctl("snapshot_dt", sc.snapshot_dt);
  ctl("snapshot_growth", sc.snapshot_growth);
  ctl("extinct_fraction", sc.extinct_fraction);
  ctl("max_steps", sc.max_steps);
  ctl("material_labels", sc.material_labels);
  ctl.finish();

  Reader sur{section(j, "surgery"), "surgery."};
  auto& sp = c.surgery_params;
  sur("enabled", c.surgery);
  sur("r_fraction", sp.r_fraction);
  sur("h_scale", sp.h_scale);
  sur("A", sp.A);
  sur("delta", sp.delta);
  sur("horn_half_length", sp.horn_neck.half_length);
  sur("horn_tolerance", sp.horn_neck.tolerance);
  sur("transition_length", sp.transition_length);
  sur("smoothness_order", sp.smoothness_order);
  sur("max_refinements", sp.max_refinements);
  sur("max_h_halvings", sp.max_h_halvings);
  sur("max_surgeries", sp.max_surgeries);
  sur("glue_nodes", sp.glue.nodes);
  sur("glue_monitor_beta", sp.glue.monitor_beta);
  sur("glue_half_length", sp.glue.half_length);
  sur.finish();

  Reader cls{section(j, "classifier"), "classifier."};
  cls("eps", c.eps);
  cls("C", c.C);
  cls.finish();

  Reader mon{section(j, "monitors"), "monitors."};
  mon("harnack", c.harnack);
  mon("distances", c.distances);
  mon("seed", c.seed);
  mon("random_markers", c.random_markers);
  mon.finish();

  Reader out{section(j, "output"), "output."};
  out("out", c.out);
  out("checkpoint_every", c.checkpoint_every);
  out("resume", c.resume);
  out.finish();

  Reader tor{section(j, "torus"), "torus."};
  tor("dims", c.torus_dims);
  tor("eps", c.torus_eps);
  tor("mode", c.torus_mode);
  tor.finish();
  return c;
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> errs;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  auto names = scenario_names();
  need(std::find(names.begin(), names.end(), c.scenario) != names.end(), "scenario: unknown '" + c.scenario + "'");
  need(c.backend == "warped" || c.backend == "deturck", "backend: must be warped or deturck");
  if (c.backend == "deturck")
    need(c.scenario == "flat-torus-perturbed", "scenario: the deturck backend runs flat-torus-perturbed only");
  if (c.backend == "warped")
    need(c.scenario != "flat-torus-perturbed", "scenario: flat-torus-perturbed needs --backend deturck");
  need(c.nodes >= 16 && c.nodes <= (1 << 20), "nodes: must lie in [16, 1048576]");
  need(std::isfinite(c.t_end) && c.t_end > 0, "t_end: must be positive");
  try {
    c.control.validate();
  } catch (const ParameterError& e) {
    errs.push_back(std::string("control: ") + e.what());
  }
  const auto& s = c.surgery_params;
  need(s.r_fraction > 0 && s.r_fraction < 1, "surgery.r_fraction: must lie in (0,1)");
  need(s.h_scale > 0 && s.h_scale <= 1, "surgery.h_scale: must lie in (0,1]");
  need(s.A > 0, "surgery.A: must be positive");
  need(s.delta > 0 && s.delta < 1, "surgery.delta: must lie in (0,1)");
  need(s.horn_neck.half_length > 0, "surgery.horn_half_length: must be positive");
  need(s.horn_neck.tolerance > 0, "surgery.horn_tolerance: must be positive");
  need(s.transition_length >= 1 && s.transition_length <= 4, "surgery.transition_length: must lie in [1,4]");
  need(s.smoothness_order >= 1, "surgery.smoothness_order: must be at least 1");
  need(s.max_refinements >= 0, "surgery.max_refinements: must be >= 0");
  need(s.max_h_halvings >= 0, "surgery.max_h_halvings: must be >= 0");
  need(s.max_surgeries >= 1, "surgery.max_surgeries: must be at least 1");
  need(s.glue.nodes == 0 || s.glue.nodes >= 16, "surgery.glue_nodes: must be 0 or at least 16");
  need(s.glue.monitor_beta >= 0, "surgery.glue_monitor_beta: must be >= 0");
  need(s.glue.half_length > 0, "surgery.glue_half_length: must be positive");
  need(c.eps > 0 && c.eps < 1, "classifier.eps: must lie in (0,1)");
  need(c.C > 1, "classifier.C: must exceed 1");
  need(c.random_markers >= 0, "monitors.random_markers: must be >= 0");
  need(!c.out.empty(), "output.out: must not be empty");
  need(c.checkpoint_every >= 0, "output.checkpoint_every: must be >= 0");
  if (c.surgery) {
    need(c.checkpoint_every == 0, "output.checkpoint_every: checkpoints need surgery off");
    need(c.resume.empty(), "output.resume: resuming needs surgery off");
    need(c.backend == "warped", "surgery.enabled: surgery needs the warped backend");
  }
  if (c.backend == "deturck") {
    need(c.checkpoint_every == 0 && c.resume.empty(), "output: checkpoints cover the warped backend only");
    for (int d : c.torus_dims) need(d >= 5, "torus.dims: each extent must be at least 5");
    need(std::abs(c.torus_eps) < 0.5, "torus.eps: must be below 0.5 in size");
    need(c.torus_mode >= 1, "torus.mode: must be at least 1");
  }
  return errs;
}

}  // namespace ricci
