#include "ricci/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "ricci/errors.hpp"

namespace ricci {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kPanels = 1024;

// 8-point Gauss-Legendre on [-1, 1]
constexpr double kGx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                           0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                           0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss(F&& f, double lo, double hi) {
  double m = 0.5 * (lo + hi), r = 0.5 * (hi - lo), acc = 0;
  for (int i = 0; i < 8; ++i) acc += kGw[i] * f(m + r * kGx[i]);
  return acc * r;
}

template <class F>
double gauss_panels(F&& f, double lo, double hi, int panels) {
  double acc = 0, d = (hi - lo) / panels;
  for (int i = 0; i < panels; ++i) acc += gauss(f, lo + i * d, lo + (i + 1) * d);
  return acc;
}

double bump(double u, double a, int k) {
  if (u <= 0) return 1;
  if (u >= 1) return 0;
  double q = 1 - u * u;
  return std::exp(-a * u * u / std::pow(q, k));
}

double bump_derivative(double u, double a, int k) {
  if (u <= 0 || u >= 1) return 0;
  double q = 1 - u * u;
  return -a * bump(u, a, k) * 2 * u * (q + k * u * u) / std::pow(q, k + 1);
}

// C-infinity step from 0 at x <= 0 to 1 at x >= 1 whose derivative is a flat-topped bump
// (max slope about 1.2, against 2 for the logistic-type step).
class FlatStep {
 public:
  static constexpr double kA = 0.25;
  FlatStep() : tab_(kSteps + 1, 0.0) {
    for (int i = 0; i < kSteps; ++i)
      tab_[i + 1] = tab_[i] + gauss([](double y) { return density(y); }, double(i) / kSteps, double(i + 1) / kSteps);
  }
  double operator()(double x) const {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    int i = std::min(static_cast<int>(x * kSteps), kSteps - 1);
    return (tab_[i] + gauss([](double y) { return density(y); }, double(i) / kSteps, x)) / tab_[kSteps];
  }
  double slope(double x) const { return density(x) / tab_[kSteps]; }

 private:
  static constexpr int kSteps = 256;
  static double density(double y) { return (y <= 0 || y >= 1) ? 0.0 : bump(std::abs(2 * y - 1), kA, 1); }
  std::vector<double> tab_;
};

template <class F>
double simpson(F&& f, double lo, double hi, double spacing) {
  if (!(hi > lo)) return 0;
  int n = std::max(64, static_cast<int>(std::ceil((hi - lo) / spacing)));
  if (n % 2) ++n;
  double d = (hi - lo) / n, acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4 : 2) * f(lo + i * d);
  return acc * d / 3;
}

}  // namespace

double StandardCap::w(double v) const {
  if (v <= 0) return 0;
  double s0 = transition_length;
  if (v >= s0) return 1;
  double u = v / s0;
  int i = std::min(static_cast<int>(u * kPanels), kPanels - 1);
  double lo = static_cast<double>(i) / kPanels;
  return s0 * (table_[i] + gauss([&](double x) { return bump(x, a, smoothness_order); }, lo, u));
}

double StandardCap::ws(double v) const {
  if (v <= 0) return 1;
  return bump(v / transition_length, a, smoothness_order);
}

double StandardCap::wss(double v) const {
  return bump_derivative(v / transition_length, a, smoothness_order) / transition_length;
}

double StandardCap::volume(double v) const {
  if (v <= 0) return 0;
  double s0 = transition_length, head = std::min(v, s0);
  double acc = gauss_panels([&](double x) { double r = w(x); return r * r; }, 0.0, head, 64);
  if (v > s0) acc += v - s0;
  return 4 * kPi * acc;
}

StandardCap build_standard_cap(double transition_length, int smoothness_order, int nodes, double cylinder_length) {
  if (!(transition_length >= 1 && transition_length <= 4))
    throw ParameterError("transition_length must lie in [1, 4]");
  if (smoothness_order < 1) throw ParameterError("smoothness_order must be at least 1");
  if (nodes < 16) throw ParameterError("standard cap needs at least 16 nodes");
  if (!(cylinder_length > 0)) throw ParameterError("cylinder_length must be positive");
  StandardCap cap;
  cap.transition_length = transition_length;
  cap.smoothness_order = smoothness_order;
  cap.cylinder_length = cylinder_length;
  int k = smoothness_order;
  double target = 1 / transition_length;
  auto mass = [&](double a) { return gauss_panels([&](double u) { return bump(u, a, k); }, 0.0, 1.0, 256); };
  if (target < 1) {
    double lo = 0, hi = 1;
    while (mass(hi) > target) lo = hi, hi *= 2;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (mass(mid) > target ? lo : hi) = mid;
    }
    cap.a = 0.5 * (lo + hi);
  }
  cap.table_.assign(kPanels + 1, 0.0);
  for (int i = 0; i < kPanels; ++i)
    cap.table_[i + 1] = cap.table_[i] + gauss([&](double u) { return bump(u, cap.a, k); },
                                              static_cast<double>(i) / kPanels, static_cast<double>(i + 1) / kPanels);

  // certificate on a fine sample of the transition; the pole limit is K = 2a / s0^2 for both planes
  const int samples = 8000;
  double s0 = transition_length;
  cap.min_sectional = 2 * cap.a / (s0 * s0);
  cap.min_R = 6 * cap.min_sectional;
  int worst = 0;
  for (int i = 1; i <= samples; ++i) {
    double v = s0 * i / samples;
    double w = cap.w(v), ws = cap.ws(v), wss = cap.wss(v);
    double ksph = (1 - ws * ws) / (w * w), kmix = -wss / w;
    double R = 4 * kmix + 2 * ksph;
    if (std::min(ksph, kmix) < cap.min_sectional) cap.min_sectional = std::min(ksph, kmix);
    if (R < cap.min_R) cap.min_R = R, worst = i;
    if (std::min(ksph, kmix) < -1e-12) throw ConstructionError("standard cap has negative sectional curvature", i);
  }
  if (!(cap.min_R > 1e-10)) throw ConstructionError("standard cap scalar curvature is not positive", worst);

  WarpedProfile& p = cap.profile;
  double total = s0 + cylinder_length;
  p.phi = Eigen::VectorXd::Constant(nodes, total);
  p.w.resize(nodes);
  for (int i = 0; i < nodes; ++i) p.w[i] = cap.w(total * i / (nodes - 1));
  p.left = EndMode::pole;
  p.right = EndMode::pinned;
  p.pin_right = 1;
  p.validate();
  return cap;
}

StandardCapReport evolve_standard_cap(const StandardCap& cap, const StepControl& control, const std::vector<double>& times) {
  for (double t : times)
    if (!(t > 0 && t < 1)) throw ParameterError("standard cap sample times must lie in (0, 1)");
  WarpedProfile q = rescale(cap.profile, std::sqrt(2.0));
  StandardCapReport rep;
  rep.history = sample_flow(q, control, times);
  rep.inf_rmin_scaled = std::numeric_limits<double>::infinity();
  // probe halfway along the cylinder, as a fraction of the total length
  double frac = (cap.transition_length + 0.5 * cap.cylinder_length) / (cap.transition_length + cap.cylinder_length);
  for (std::size_t k = 0; k < rep.history.size(); ++k) {
    const auto& p = rep.history.snapshots[k];
    double t = rep.history.times[k];
    auto c = warped_curvatures(p);
    int probe = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p.n(); ++i) {
      double d = std::abs(c.s[i] - frac * c.length);
      if (d < best) best = d, probe = i;
    }
    double exact = 1 / (1 - t);
    rep.far_R.push_back(c.R[probe]);
    rep.far_field_error = std::max(rep.far_field_error, std::abs(c.R[probe] / exact - 1));
    double rmin = c.R.minCoeff() * (1 - t);
    rep.rmin_scaled.push_back(rmin);
    rep.inf_rmin_scaled = std::min(rep.inf_rmin_scaled, rmin);
    double rmax = c.R.maxCoeff();
    for (int i = 0; i < p.n(); ++i) rep.min_sectional = std::min(rep.min_sectional, c.min_sectional(i) / rmax);
  }
  return rep;
}

SurgeryOutcome perform_surgery(const WarpedProfile& p, const std::vector<SurgeryCut>& cuts, double h, double A,
                               double delta, const StandardCap& cap, const SurgeryOptions& opt) {
  if (!(h > 0)) throw ParameterError("h must be positive");
  if (!(A >= 2)) throw ParameterError("A must be at least 2");
  if (!(delta > 0)) throw ParameterError("delta must be positive");
  if (cuts.empty()) throw ParameterError("surgery needs at least one cut");
  if (A > opt.half_length * (1 + 1e-12)) throw UnsafeSurgeryError("cut sphere lies beyond the delta-neck window; shrink A");
  ProfileInterpolant ip(p);
  const double L = ip.length();
  const bool per = p.periodic();
  const double depth = A * h;

  struct Cut {
    double at;
    int dir, region, index;
  };
  std::vector<Cut> cs;
  int regions = 0;
  for (int i = 0; i < static_cast<int>(cuts.size()); ++i) {
    const auto& k = cuts[i];
    if (k.direction != 1 && k.direction != -1) throw ParameterError("cut direction must be +1 or -1");
    if (k.site.quality > delta) throw UnsafeSurgeryError("site is not delta-good: quality " + std::to_string(k.site.quality));
    double at = k.site.s + k.direction * depth;
    if (per) {
      at = std::fmod(at, L);
      if (at < 0) at += L;
    } else if (!(at > 0 && at < L)) {
      throw UnsafeSurgeryError("cut sphere falls outside the profile");
    }
    cs.push_back({at, k.direction, k.region, i});
    regions = std::max(regions, k.region + 1);
  }
  std::sort(cs.begin(), cs.end(), [](const Cut& a, const Cut& b) { return a.at < b.at; });
  const int m = static_cast<int>(cs.size());
  for (int i = 0; i + 1 < m; ++i)
    if (cs[i].dir == cs[i + 1].dir) throw UnsafeSurgeryError("cuts do not bound the retained pieces consistently");
  if (per && (m % 2 || cs[0].dir == cs[m - 1].dir))
    throw UnsafeSurgeryError("cuts do not bound the retained pieces consistently");

  // retained arcs [a, b] in unwrapped arclength, with the capped ends
  struct Arc {
    double a, b;
    int left = -1, right = -1;  // positions in cs, -1 for an original end
  };
  std::vector<Arc> arcs;
  struct Gap {
    double a, b;
    int region;
  };
  std::vector<Gap> gaps;  // discarded arcs
  if (!per) {
    if (cs[0].dir == 1) arcs.push_back({0, cs[0].at, -1, 0});
    else gaps.push_back({0, cs[0].at, cs[0].region});
    for (int i = 0; i < m; ++i) {
      double next = i + 1 < m ? cs[i + 1].at : L;
      if (cs[i].dir == -1) arcs.push_back({cs[i].at, next, i, i + 1 < m ? i + 1 : -1});
      else if (i + 1 < m) gaps.push_back({cs[i].at, next, cs[i].region});
    }
    if (cs[m - 1].dir == 1) gaps.push_back({cs[m - 1].at, L, cs[m - 1].region});
  } else {
    for (int i = 0; i < m; ++i) {
      int j = (i + 1) % m;
      double next = cs[j].at + (j <= i ? L : 0);
      if (cs[i].dir == -1) arcs.push_back({cs[i].at, next, i, j});
      else gaps.push_back({cs[i].at, next, cs[i].region});
    }
  }

  auto w_old = [&](double s) { return ip.w(s); };
  SurgeryOutcome out;
  out.region_volume_removed.assign(regions, 0.0);
  out.volume_before = profile_volume(p);
  out.volume_tolerance = 2 * std::abs(profile_volume(resample(p, 2 * p.n(), opt.monitor_beta)) - out.volume_before);
  const double quad = depth / 256;
  for (const auto& g : gaps)
    out.region_volume_removed[g.region] +=
        4 * kPi * simpson([&](double s) { double r = w_old(s); return r * r; }, g.a, g.b, quad);

  const double s0 = cap.transition_length;
  const FlatStep step;
  const int n_out = opt.nodes > 0 ? opt.nodes : p.n();
  for (const auto& arc : arcs) {
    int ends = (arc.left >= 0) + (arc.right >= 0);
    if (arc.b - arc.a <= ends * depth) throw UnsafeSurgeryError("retained piece is shorter than its blend zones");
    // Slope blend over [site, cut]: w' = (1 - chi) w_old', integrated by parts so that
    // w = (1 - chi) w_old + int w_old dchi, constant beyond the cut.
    auto blended = [&](double site, double d, int sgn) {
      double x = d / depth;
      double acc = (1 - step(x)) * w_old(site + sgn * d);
      if (x > 0) {
        double top = std::min(x, 1.0);
        acc += gauss_panels([&](double y) { return w_old(site + sgn * y * depth) * step.slope(y); }, 0.0, top, 8);
      }
      return acc;
    };
    const double site_l = arc.a + depth, site_r = arc.b - depth;
    double wl = arc.left >= 0 ? blended(site_l, depth, -1) : 0, wr = arc.right >= 0 ? blended(site_r, depth, 1) : 0;
    double capl = arc.left >= 0 ? s0 * wl : 0, capr = arc.right >= 0 ? s0 * wr : 0;
    auto w_mid = [&](double s) {
      if (arc.left >= 0 && s < site_l) return blended(site_l, site_l - s, -1);
      if (arc.right >= 0 && s > site_r) return blended(site_r, s - site_r, 1);
      return w_old(s);
    };
    for (int side = 0; side < 2; ++side) {
      int ci = side == 0 ? arc.left : arc.right;
      if (ci < 0) continue;
      double lo = side == 0 ? arc.a : arc.b - depth, hi = lo + depth, wc = side == 0 ? wl : wr;
      double blend = 4 * kPi * simpson([&](double s) { double a = w_mid(s), b = w_old(s); return a * a - b * b; }, lo, hi, quad);
      double capv = wc * wc * wc * cap.volume(s0);
      out.region_volume_removed[cs[ci].region] += -blend - capv;
    }

    double Lp = capl + (arc.b - arc.a) + capr;
    double wmin = std::numeric_limits<double>::infinity();
    if (arc.left >= 0) wmin = std::min(wmin, wl);
    if (arc.right >= 0) wmin = std::min(wmin, wr);
    long nf = std::clamp(static_cast<long>(std::ceil(Lp / (wmin / 48))), 4001L, 1L << 21);
    WarpedProfile fine;
    fine.phi = Eigen::VectorXd::Constant(nf, Lp);
    fine.w.resize(nf);
    for (long i = 0; i < nf; ++i) {
      double sig = Lp * static_cast<double>(i) / (nf - 1);
      double w;
      if (sig < capl) w = wl * cap.w(sig / wl);
      else if (sig > Lp - capr) w = wr * cap.w((Lp - sig) / wr);
      else w = w_mid(arc.a + sig - capl);
      fine.w[i] = w;
    }
    fine.t = p.t;
    fine.left = arc.left >= 0 ? EndMode::pole : p.left;
    fine.right = arc.right >= 0 ? EndMode::pole : p.right;
    if (fine.left == EndMode::pole) fine.w[0] = 0;
    if (fine.right == EndMode::pole) fine.w[nf - 1] = 0;
    fine.pin_left = p.pin_left;
    fine.pin_right = p.pin_right;
    if (per && arc.left < 0) throw std::logic_error("periodic arc without cuts");

    WarpedProfile piece = resample(fine, n_out, opt.monitor_beta);
    piece.validate();
    auto c = warped_curvatures(piece);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < piece.n(); ++i) {
      worst = std::min(worst, c.min_sectional(i));
      double s = c.s[i];
      bool in_blend = (arc.left >= 0 && s >= capl && s <= capl + depth) ||
                      (arc.right >= 0 && s >= c.length - capr - depth && s <= c.length - capr);
      if (in_blend) out.max_blend_wss = std::max(out.max_blend_wss, std::abs(c.wss[i]));
    }
    out.min_sectional = out.pieces.empty() ? worst : std::min(out.min_sectional, worst);
    if (worst < -0.1 / (h * h)) throw BlendFailureError("glued piece has sectional curvature " + std::to_string(worst));
    double vp = profile_volume(piece);
    out.volume_after += vp;
    out.volume_tolerance += 2 * std::abs(profile_volume(resample(fine, 2 * n_out, opt.monitor_beta)) - vp);
    std::vector<int> on_piece;
    if (arc.left >= 0) on_piece.push_back(cs[arc.left].index);
    if (arc.right >= 0) on_piece.push_back(cs[arc.right].index);
    out.piece_cuts.push_back(on_piece);
    out.pieces.push_back(std::move(piece));
  }
  for (double v : out.region_volume_removed) out.volume_removed += v;
  return out;
}

std::string to_string(TopologyLabel t) {
  switch (t) {
    case TopologyLabel::S3: return "S3";
    case TopologyLabel::RP3_like: return "RP3";
    case TopologyLabel::S2xS1_like: return "S2xS1";
    case TopologyLabel::quotient: return "quotient";
    case TopologyLabel::unknown: return "unknown";
  }
  return "unknown";
}

TopologyLabel topology_label_from_string(const std::string& s) {
  for (auto t : {TopologyLabel::S3, TopologyLabel::RP3_like, TopologyLabel::S2xS1_like, TopologyLabel::quotient,
                 TopologyLabel::unknown})
    if (to_string(t) == s) return t;
  throw FormatError("unknown topology label '" + s + "'");
}

std::string to_string(ComponentFate f) {
  switch (f) {
    case ComponentFate::live: return "live";
    case ComponentFate::extinct: return "extinct";
    case ComponentFate::removed: return "removed";
    case ComponentFate::surgered: return "surgered";
  }
  return "live";
}

ComponentFate component_fate_from_string(const std::string& s) {
  for (auto f : {ComponentFate::live, ComponentFate::extinct, ComponentFate::removed, ComponentFate::surgered})
    if (to_string(f) == s) return f;
  throw FormatError("unknown component fate '" + s + "'");
}

std::string to_string(SurgeryKind k) {
  switch (k) {
    case SurgeryKind::neck: return "neck";
    case SurgeryKind::self_neck: return "self_neck";
    case SurgeryKind::end: return "end";
    case SurgeryKind::removal: return "removal";
  }
  return "neck";
}

SurgeryKind surgery_kind_from_string(const std::string& s) {
  for (auto k : {SurgeryKind::neck, SurgeryKind::self_neck, SurgeryKind::end, SurgeryKind::removal})
    if (to_string(k) == s) return k;
  throw FormatError("unknown surgery kind '" + s + "'");
}

int ComponentLedger::add_component(double birth, TopologyLabel label) {
  LedgerComponent c;
  c.id = static_cast<int>(components.size());
  c.birth = birth;
  c.label = label;
  components.push_back(c);
  return c.id;
}

LedgerComponent& ComponentLedger::component(int id) {
  if (id < 0 || id >= static_cast<int>(components.size())) throw DomainError("no ledger component " + std::to_string(id));
  return components[id];
}

const LedgerComponent& ComponentLedger::component(int id) const {
  if (id < 0 || id >= static_cast<int>(components.size())) throw DomainError("no ledger component " + std::to_string(id));
  return components[id];
}

std::vector<int> ComponentLedger::live_at(double t) const {
  std::vector<int> ids;
  for (const auto& c : components)
    if (c.birth <= t && t < c.death) ids.push_back(c.id);
  return ids;
}

int ComponentLedger::surgery_count() const {
  return static_cast<int>(std::count_if(events.begin(), events.end(),
                                        [](const SurgeryEvent& e) { return e.kind != SurgeryKind::removal; }));
}

std::string TopologyExpression::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < summands.size(); ++i) s += (i ? " # " : "") + ricci::to_string(summands[i]);
  if (summands.empty()) s = "S3";
  if (partial) s += " (partial)";
  return s;
}

TopologyExpression connected_sum(const TopologyExpression& a, const TopologyExpression& b) {
  TopologyExpression r;
  r.partial = a.partial || b.partial;
  for (const auto* e : {&a, &b})
    for (auto t : e->summands)
      if (t != TopologyLabel::S3) r.summands.push_back(t);
  if (r.summands.empty()) r.summands.push_back(TopologyLabel::S3);
  return r;
}

std::vector<ComponentTopology> reconstruct_presurgery_topology(const ComponentLedger& ledger, double time) {
  std::map<int, const SurgeryEvent*> outgoing;
  for (const auto& e : ledger.events)
    for (int id : e.components_before) outgoing[id] = &e;
  auto single = [](TopologyLabel t) {
    TopologyExpression e;
    e.summands.push_back(t);
    e.partial = t == TopologyLabel::unknown;
    return e;
  };
  std::function<TopologyExpression(int, int)> expr = [&](int id, int depth) -> TopologyExpression {
    if (depth > static_cast<int>(ledger.components.size())) throw FormatError("ledger has a cycle");
    const auto& c = ledger.component(id);
    auto it = outgoing.find(id);
    if (c.fate != ComponentFate::surgered || it == outgoing.end()) return single(c.label);
    const SurgeryEvent& e = *it->second;
    TopologyExpression acc = single(TopologyLabel::S3);
    for (int child : e.components_after) acc = connected_sum(acc, expr(child, depth + 1));
    if (e.kind == SurgeryKind::self_neck) acc = connected_sum(acc, single(TopologyLabel::S2xS1_like));
    return acc;
  };
  std::vector<ComponentTopology> out;
  for (int id : ledger.live_at(time)) out.push_back({id, expr(id, 0)});
  return out;
}

TopologyLabel profile_topology(const WarpedProfile& p) {
  if (p.periodic()) return TopologyLabel::S2xS1_like;
  if (p.topology() == Topology::closed_sphere) return TopologyLabel::S3;
  return TopologyLabel::unknown;
}

namespace {

struct Pending {
  int id;
  WarpedProfile profile;
  double threshold;
};

// Horn cuts for every region of a singular profile; empty optional when no delta-neck exists at this h.
struct CutPlan {
  WarpedProfile profile;  // possibly refined copy
  std::vector<SurgeryCut> cuts;
  std::vector<double> region_quality;
  std::vector<RegionKind> region_kind;
  bool whole_component = false;
};

std::optional<CutPlan> plan_cuts(const WarpedProfile& p, double r_threshold, double h, const SurgeryParams& sp,
                                 std::vector<std::string>& notes) {
  CutPlan plan;
  plan.profile = p;
  for (int refine = 0;; ++refine) {
    plan.cuts.clear();
    plan.region_quality.clear();
    plan.region_kind.clear();
    auto rep = find_horns(plan.profile, r_threshold, sp.horn_neck);
    try {
      for (const auto& reg : rep.regions) {
        if (reg.kind == RegionKind::component) {
          plan.whole_component = true;
          return plan;
        }
        int r = static_cast<int>(plan.region_kind.size());
        plan.region_kind.push_back(reg.kind);
        double q = 0;
        for (const auto& horn : reg.horns) {
          auto site = find_delta_neck(plan.profile, horn, h, sp.delta, sp.glue.half_length);
          if (!site) return std::nullopt;
          q = std::max(q, site->quality);
          plan.cuts.push_back({*site, horn.direction == 0 ? 1 : horn.direction, r});
        }
        plan.region_quality.push_back(q);
      }
      return plan;
    } catch (const ResolutionError& e) {
      if (refine >= sp.max_refinements) throw;
      notes.push_back(std::string("refining to ") + std::to_string(2 * plan.profile.n()) + " nodes: " + e.what());
      plan.profile = resample(plan.profile, 2 * plan.profile.n(), sp.glue.monitor_beta);
    }
  }
}

}  // namespace

SurgeryRunResult run_with_surgery(const WarpedProfile& initial, const StepControl& control, const SurgeryParams& params,
                                  double t_end) {
  control.validate();
  if (!(params.r_fraction > 0 && params.r_fraction < 1)) throw ParameterError("r_fraction must lie in (0, 1)");
  if (!(params.h_scale > 0 && params.h_scale <= 1)) throw ParameterError("h_scale must lie in (0, 1]");
  StandardCap cap = build_standard_cap(params.transition_length, params.smoothness_order);
  SurgeryRunResult res;
  auto& ledger = res.ledger;
  std::deque<Pending> queue;
  queue.push_back({ledger.add_component(initial.t), initial, control.max_R_threshold});
  const auto c0 = warped_curvatures(initial);
  const double vol0 = profile_volume(initial), rmin0 = c0.R.minCoeff();
  double t_last = initial.t;
  int removals = 0;
  res.finished = true;

  while (!queue.empty()) {
    // components of one wave are independent flows; results are consumed in id order
    std::vector<Pending> wave(std::make_move_iterator(queue.begin()), std::make_move_iterator(queue.end()));
    queue.clear();
    std::vector<std::future<FlowHistory>> flows;
    for (const auto& job : wave)
      flows.push_back(std::async(std::launch::async, [&control, &job, t_end] {
        StepControl cc = control;
        cc.max_R_threshold = job.threshold;
        return run(job.profile, cc, t_end);
      }));
    for (std::size_t wi = 0; wi < wave.size(); ++wi) {
      Pending& job = wave[wi];
      FlowHistory hist = flows[wi].get();
      const TerminalStatus st = hist.status;
      const WarpedProfile last = hist.snapshots.back();
      res.runs.push_back({job.id, std::move(hist)});
      const double threshold = res.runs.back().history.threshold;
      auto& comp = ledger.component(job.id);
      if (st.kind == TerminalKind::running) {
        res.finished = false;
        continue;
      }
      t_last = std::max(t_last, st.time);
      if (st.kind == TerminalKind::extinct) {
        comp.death = st.time;
        comp.fate = ComponentFate::extinct;
        comp.label = profile_topology(last);
        ++res.extinctions;
        res.extinction_time = std::max(res.extinction_time, st.time);
        continue;
      }

      const double t = last.t;
      double rstop = warped_curvatures(last).R.maxCoeff();
      double r_threshold = params.r_fraction * rstop;
      if (res.h == 0) res.h = params.h_scale / std::sqrt(r_threshold);
      std::optional<CutPlan> plan;
      double h = res.h;
      for (int k = 0; k <= params.max_h_halvings; ++k) {
        h = res.h * std::pow(0.5, k);
        plan = plan_cuts(last, r_threshold, h, params, res.notes);
        if (plan) break;
        res.notes.push_back("no delta-neck at h = " + std::to_string(h));
      }
      if (!plan) throw ResolutionError("no delta-neck found after h halvings; resolution exhausted");
      comp.death = t;

      if (plan->whole_component || plan->cuts.empty()) {
        comp.fate = ComponentFate::removed;
        comp.label = profile_topology(last);
        SurgeryEvent ev;
        ev.time = t;
        ev.kind = SurgeryKind::removal;
        ev.h = h;
        ev.A = params.A;
        ev.delta = params.delta;
        ev.volume_removed = profile_volume(last);
        ev.components_before = {job.id};
        ledger.events.push_back(ev);
        ++removals;
        continue;
      }
      if (ledger.surgery_count() + static_cast<int>(plan->region_kind.size()) > params.max_surgeries)
        throw ResolutionError("surgery budget exhausted");

      SurgeryOptions glue = params.glue;
      if (glue.nodes <= 0) glue.nodes = job.profile.n();
      auto outcome = perform_surgery(plan->profile, plan->cuts, h, params.A, params.delta, cap, glue);
      comp.fate = ComponentFate::surgered;

      // leaves for the pieces, then glue regions back in reverse to get the forward events
      std::vector<int> owner(outcome.pieces.size());
      std::vector<int> cut_piece(plan->cuts.size(), -1);
      for (std::size_t i = 0; i < outcome.pieces.size(); ++i) {
        owner[i] = ledger.add_component(t);
        for (int ci : outcome.piece_cuts[i]) cut_piece[ci] = static_cast<int>(i);
      }
      std::vector<int> current(owner);  // component currently holding each piece
      std::vector<SurgeryEvent> reversed;
      int nreg = static_cast<int>(plan->region_kind.size());
      for (int r = nreg - 1; r >= 0; --r) {
        std::vector<int> holders;
        for (std::size_t ci = 0; ci < plan->cuts.size(); ++ci)
          if (plan->cuts[ci].region == r && cut_piece[ci] >= 0) {
            int hld = current[cut_piece[ci]];
            if (std::find(holders.begin(), holders.end(), hld) == holders.end()) holders.push_back(hld);
          }
        int ncuts = static_cast<int>(std::count_if(plan->cuts.begin(), plan->cuts.end(),
                                                   [&](const SurgeryCut& k) { return k.region == r; }));
        SurgeryEvent ev;
        ev.time = t;
        ev.horn = r;
        ev.kind = ncuts == 1 ? SurgeryKind::end : (holders.size() == 1 ? SurgeryKind::self_neck : SurgeryKind::neck);
        ev.h = h;
        ev.A = params.A;
        ev.delta = params.delta;
        ev.quality = plan->region_quality[r];
        ev.volume_removed = outcome.region_volume_removed[r];
        ev.components_after = holders;
        int merged = r == 0 ? job.id : ledger.add_component(t);
        if (r != 0) {
          auto& v = ledger.component(merged);
          v.death = t;
          v.fate = ComponentFate::surgered;
        }
        ev.components_before = {merged};
        for (auto& c : current)
          if (std::find(holders.begin(), holders.end(), c) != holders.end()) c = merged;
        reversed.push_back(ev);
      }
      for (auto it = reversed.rbegin(); it != reversed.rend(); ++it) ledger.events.push_back(*it);

      for (std::size_t i = 0; i < outcome.pieces.size(); ++i) {
        double pmax = warped_curvatures(outcome.pieces[i]).R.maxCoeff();
        queue.push_back({owner[i], std::move(outcome.pieces[i]), std::max(threshold, 10 * pmax)});
      }
      res.books.push_back({t, h, plan->profile.n(), outcome.volume_before, outcome.volume_after, outcome.volume_removed,
                           outcome.volume_tolerance, outcome.max_blend_wss, outcome.min_sectional});
    }
  }
  if (res.h > 0) {
    double c = kSurgeryVolumeConstant * res.h * res.h * res.h;
    res.volume_budget = vol0 * std::exp(-rmin0 * (t_last - initial.t)) / c;
    res.discreteness_ok = ledger.surgery_count() <= res.volume_budget + removals;
  }
  return res;
}

}  // namespace ricci
