#include "ricci/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace ricci::io {

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw FormatError("expected a number, got " + j.dump());
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = to_double(j[i]);
  return v;
}

namespace {

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

double getd(const Json& j, const char* key) { return to_double(field(j, key)); }

}  // namespace

template <int Dim>
Json chart_to_json(const GridMetric<double, Dim>& m) {
  Json j;
  j["dim"] = Dim;
  j["dims"] = m.dims;
  Json sp = Json::array();
  for (double h : m.spacing) sp.push_back(number(h));
  j["spacing"] = sp;
  j["periodic"] = m.periodic;
  Json comp = Json::array();
  for (const auto& g : m.g)
    for (int a = 0; a < Dim; ++a)
      for (int b = 0; b < Dim; ++b) comp.push_back(number(g(a, b)));
  j["components"] = std::move(comp);
  return j;
}

template <int Dim>
GridMetric<double, Dim> chart_from_json(const Json& j) {
  if (get<int>(j, "dim") != Dim) throw FormatError("chart dimension mismatch");
  auto dims = get<std::array<int, Dim>>(j, "dims");
  auto per = get<std::array<bool, Dim>>(j, "periodic");
  const auto& sp = field(j, "spacing");
  if (!sp.is_array() || sp.size() != Dim) throw FormatError("spacing needs one entry per axis");
  std::array<double, Dim> h{};
  for (int a = 0; a < Dim; ++a) {
    h[a] = to_double(sp[a]);
    if (!(h[a] > 0)) throw FormatError("spacing must be positive");
    if (dims[a] < 1) throw FormatError("dims must be positive");
  }
  GridMetric<double, Dim> m(dims, h, per);
  const auto& comp = field(j, "components");
  if (!comp.is_array() || comp.size() != m.node_count() * Dim * Dim)
    throw FormatError("components: expected " + std::to_string(m.node_count() * Dim * Dim) + " values");
  std::size_t k = 0;
  for (std::size_t n = 0; n < m.node_count(); ++n) {
    for (int a = 0; a < Dim; ++a)
      for (int b = 0; b < Dim; ++b) m.g[n](a, b) = to_double(comp[k++]);
    double scale = m.g[n].cwiseAbs().maxCoeff();
    if ((m.g[n] - m.g[n].transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw DegenerateMetricError("metric not symmetric at node " + std::to_string(n), static_cast<long>(n));
  }
  validate(m);
  return m;
}

template Json chart_to_json<2>(const GridMetric<double, 2>&);
template Json chart_to_json<3>(const GridMetric<double, 3>&);
template GridMetric<double, 2> chart_from_json<2>(const Json&);
template GridMetric<double, 3> chart_from_json<3>(const Json&);

Json to_json(const WarpedProfile& p) {
  return {{"phi", to_json(p.phi)},        {"w", to_json(p.w)},
          {"left", to_string(p.left)},    {"right", to_string(p.right)},
          {"pin_left", number(p.pin_left)}, {"pin_right", number(p.pin_right)},
          {"t", number(p.t)}};
}

WarpedProfile profile_from_json(const Json& j) {
  WarpedProfile p;
  p.phi = vector_from_json(field(j, "phi"));
  p.w = vector_from_json(field(j, "w"));
  try {
    p.left = end_mode_from_string(get<std::string>(j, "left"));
    p.right = end_mode_from_string(get<std::string>(j, "right"));
  } catch (const ParameterError& e) {
    throw FormatError(e.what());
  }
  p.pin_left = getd(j, "pin_left");
  p.pin_right = getd(j, "pin_right");
  p.t = getd(j, "t");
  if (p.phi.size() != p.w.size()) throw FormatError("phi and w differ in length");
  return p;
}

Json to_json(const StepControl& c) {
  return {{"cfl_fraction", number(c.cfl_fraction)},
          {"max_R_threshold", number(c.max_R_threshold)},
          {"regrid_interval", c.regrid_interval},
          {"curvature_dt", number(c.curvature_dt)},
          {"monitor_beta", number(c.monitor_beta)},
          {"regrid_tolerance", number(c.regrid_tolerance)},
          {"snapshot_dt", number(c.snapshot_dt)},
          {"snapshot_growth", number(c.snapshot_growth)},
          {"extinct_fraction", number(c.extinct_fraction)},
          {"max_steps", c.max_steps},
          {"material_labels", c.material_labels}};
}

StepControl step_control_from_json(const Json& j) {
  StepControl c;
  c.cfl_fraction = getd(j, "cfl_fraction");
  c.max_R_threshold = getd(j, "max_R_threshold");
  c.regrid_interval = get<int>(j, "regrid_interval");
  c.curvature_dt = getd(j, "curvature_dt");
  c.monitor_beta = getd(j, "monitor_beta");
  c.regrid_tolerance = getd(j, "regrid_tolerance");
  c.snapshot_dt = getd(j, "snapshot_dt");
  c.snapshot_growth = getd(j, "snapshot_growth");
  c.extinct_fraction = getd(j, "extinct_fraction");
  c.max_steps = get<long>(j, "max_steps");
  c.material_labels = get<int>(j, "material_labels");
  return c;
}

Json to_json(const TerminalStatus& s) {
  return {{"kind", to_string(s.kind)}, {"time", number(s.time)}, {"node", s.node},
          {"s", number(s.s)},          {"x", number(s.x)},       {"R", number(s.R)}};
}

TerminalStatus terminal_status_from_json(const Json& j) {
  TerminalStatus s;
  auto k = get<std::string>(j, "kind");
  if (k == "running") s.kind = TerminalKind::running;
  else if (k == "singular") s.kind = TerminalKind::singular;
  else if (k == "extinct") s.kind = TerminalKind::extinct;
  else throw FormatError("unknown terminal kind '" + k + "'");
  s.time = getd(j, "time");
  s.node = get<int>(j, "node");
  s.s = getd(j, "s");
  s.x = getd(j, "x");
  s.R = getd(j, "R");
  return s;
}

Json to_json(const FlowHistory& h) {
  Json snaps = Json::array(), mat = Json::array(), times = Json::array();
  for (double t : h.times) times.push_back(number(t));
  for (const auto& p : h.snapshots) snaps.push_back(to_json(p));
  for (const auto& m : h.material) mat.push_back(to_json(m));
  return {{"times", times},   {"snapshots", snaps},         {"material", mat},
          {"steps", h.steps}, {"threshold", number(h.threshold)}, {"status", to_json(h.status)}};
}

FlowHistory history_from_json(const Json& j) {
  FlowHistory h;
  for (const auto& t : field(j, "times")) h.times.push_back(to_double(t));
  for (const auto& p : field(j, "snapshots")) h.snapshots.push_back(profile_from_json(p));
  for (const auto& m : field(j, "material")) h.material.push_back(vector_from_json(m));
  if (h.snapshots.size() != h.times.size() || h.material.size() != h.times.size())
    throw FormatError("history arrays differ in length");
  h.steps = get<long>(j, "steps");
  h.threshold = getd(j, "threshold");
  h.status = terminal_status_from_json(field(j, "status"));
  return h;
}

Json to_json(const Checkpoint& c) {
  const auto& st = c.state;
  return {{"format", "ricci-checkpoint/1"},
          {"current", to_json(st.current)},
          {"labels", to_json(st.labels)},
          {"steps", st.steps},
          {"next_snapshot", number(st.next_snapshot)},
          {"last_snapshot_R", number(st.last_snapshot_R)},
          {"history", to_json(st.history)},
          {"control", to_json(c.control)},
          {"t_end", number(c.t_end)},
          {"config", c.config}};
}

Checkpoint checkpoint_from_json(const Json& j) {
  if (get<std::string>(j, "format") != "ricci-checkpoint/1") throw FormatError("not a checkpoint file");
  Checkpoint c;
  c.state.current = profile_from_json(field(j, "current"));
  c.state.labels = vector_from_json(field(j, "labels"));
  c.state.steps = get<long>(j, "steps");
  c.state.next_snapshot = getd(j, "next_snapshot");
  c.state.last_snapshot_R = getd(j, "last_snapshot_R");
  c.state.history = history_from_json(field(j, "history"));
  c.control = step_control_from_json(field(j, "control"));
  c.t_end = getd(j, "t_end");
  c.config = j.value("config", Json());
  return c;
}

Json to_json(const ComponentLedger& l) {
  Json comps = Json::array(), events = Json::array();
  for (const auto& c : l.components)
    comps.push_back({{"id", c.id},
                     {"birth", number(c.birth)},
                     {"death", number(c.death)},
                     {"label", to_string(c.label)},
                     {"fate", to_string(c.fate)}});
  for (const auto& e : l.events)
    events.push_back({{"time", number(e.time)},
                      {"horn", e.horn},
                      {"kind", to_string(e.kind)},
                      {"h", number(e.h)},
                      {"A", number(e.A)},
                      {"delta", number(e.delta)},
                      {"quality", number(e.quality)},
                      {"volume_removed", number(e.volume_removed)},
                      {"components_before", e.components_before},
                      {"components_after", e.components_after}});
  return {{"format", "ricci-ledger/1"}, {"components", comps}, {"events", events}};
}

ComponentLedger ledger_from_json(const Json& j) {
  if (get<std::string>(j, "format") != "ricci-ledger/1") throw FormatError("not a ledger file");
  ComponentLedger l;
  try {
    for (const auto& c : field(j, "components")) {
      LedgerComponent lc;
      lc.id = get<int>(c, "id");
      lc.birth = getd(c, "birth");
      lc.death = getd(c, "death");
      lc.label = topology_label_from_string(get<std::string>(c, "label"));
      lc.fate = component_fate_from_string(get<std::string>(c, "fate"));
      if (lc.id != static_cast<int>(l.components.size())) throw FormatError("component ids must be 0, 1, 2, ...");
      l.components.push_back(lc);
    }
    for (const auto& e : field(j, "events")) {
      SurgeryEvent ev;
      ev.time = getd(e, "time");
      ev.horn = get<int>(e, "horn");
      ev.kind = surgery_kind_from_string(get<std::string>(e, "kind"));
      ev.h = getd(e, "h");
      ev.A = getd(e, "A");
      ev.delta = getd(e, "delta");
      ev.quality = getd(e, "quality");
      ev.volume_removed = getd(e, "volume_removed");
      ev.components_before = get<std::vector<int>>(e, "components_before");
      ev.components_after = get<std::vector<int>>(e, "components_after");
      l.events.push_back(std::move(ev));
    }
  } catch (const ParameterError& e) {
    throw FormatError(e.what());
  }
  return l;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string trace_csv_header(const MonitorTrace& tr) {
  std::string s =
      "component,t,r_min,r_max,argmax,volume,min_sectional,pinching_max,pinching_at_rmax,w2,harnack";
  for (std::size_t k = 0; k < tr.markers.size(); ++k)
    s += ",dist_" + std::to_string(tr.markers[k].first) + "_" + std::to_string(tr.markers[k].second);
  return s + "\n";
}

std::string trace_csv_rows(const MonitorTrace& tr, int component) {
  std::string s;
  for (const auto& r : tr.records) {
    s += std::to_string(component);
    for (double v : {r.t, r.r_min, r.r_max}) s += "," + format_double(v);
    s += "," + std::to_string(r.argmax);
    for (double v : {r.volume, r.min_sectional, r.pinching_max, r.pinching_at_rmax, r.w2, r.harnack})
      s += "," + format_double(v);
    for (double d : r.distances) s += "," + format_double(d);
    s += "\n";
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp);
    out << text;
    if (!out.flush()) throw FormatError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) { write_file(path, j.dump(1) + "\n"); }

}  // namespace ricci::io
