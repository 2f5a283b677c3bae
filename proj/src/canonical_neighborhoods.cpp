#include "ricci/canonical_neighborhoods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ricci {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double arc_distance(const WarpedCurvatures& c, bool periodic, double a, double b) {
  double d = std::abs(a - b);
  if (periodic) d = std::min(d, c.length - d);
  return d;
}

// Sup over the window |s - s0| <= half of the deviation from the cylinder of radius model_w.
double window_quality(const WarpedProfile& p, const WarpedCurvatures& c, double s0, double model_w, double half,
                      int* first, int* last, int* count) {
  double q = 0;
  int n = p.n(), cnt = 0, lo = -1, hi = -1;
  for (int j = 0; j < n; ++j) {
    if (arc_distance(c, p.periodic(), c.s[j], s0) > half) continue;
    ++cnt;
    if (lo < 0) lo = j;
    hi = j;
    double d = std::max({std::abs(p.w[j] / model_w - 1), std::abs(c.ws[j]), std::abs(p.w[j] * c.wss[j])});
    q = std::max(q, d);
  }
  // a wrapped window on a periodic profile starts after its gap
  if (p.periodic() && cnt > 0 && cnt < n && lo == 0 && hi == n - 1) {
    int j = 0;
    while (j < n && arc_distance(c, true, c.s[j], s0) <= half) ++j;
    hi = j - 1;
    while (j < n && arc_distance(c, true, c.s[j], s0) > half) ++j;
    lo = j;
  }
  if (first) *first = lo;
  if (last) *last = hi;
  if (count) *count = cnt;
  return cnt > 0 ? q : inf;
}

struct Classifier {
  const WarpedProfile& p;
  WarpedCurvatures c;
  double eps, C, half, tol;
  std::vector<double> neck_q;  // lazily filled, NaN = not yet computed
  std::vector<int> neck_lo, neck_hi;

  Classifier(const WarpedProfile& prof, double e, double cc, NeckCriteria nc)
      : p(prof), c(warped_curvatures(prof)), eps(e), C(cc) {
    if (!(eps > 0 && eps <= 0.1)) throw ParameterError("eps must lie in (0, 0.1]");
    if (!(C >= 1)) throw ParameterError("C must be >= 1");
    if (nc.half_length < 0 || nc.tolerance < 0) throw ParameterError("neck criteria must be non-negative");
    half = nc.half_length > 0 ? nc.half_length : 1 / eps;
    tol = nc.tolerance > 0 ? nc.tolerance : eps;
    neck_q.assign(p.n(), std::numeric_limits<double>::quiet_NaN());
    neck_lo.assign(p.n(), -1);
    neck_hi.assign(p.n(), -1);
  }

  double scale(int i) const {
    if (!(c.R[i] > 0)) throw NotHighCurvatureError("curvature scale needs R > 0");
    return 1 / std::sqrt(c.R[i]);
  }

  double neck(int j) {
    if (std::isnan(neck_q[j])) {
      if (c.R[j] > 0) {
        double r = 1 / std::sqrt(c.R[j]);
        neck_q[j] = window_quality(p, c, c.s[j], std::sqrt(2.0) * r, half * r, &neck_lo[j], &neck_hi[j], nullptr);
      } else {
        neck_q[j] = inf;
      }
    }
    return neck_q[j];
  }

  NeighborhoodLabel classify(int i) {
    if (i < 0 || i >= p.n()) throw DomainError("node outside the profile");
    NeighborhoodLabel lab;
    lab.scale = scale(i);
    double Ri = c.R[i];
    int n = p.n();
    if (p.topology() == Topology::closed_sphere) {
      double q = 0;
      for (int j = 0; j < n; ++j)
        q = std::max({q, std::abs(6 * c.k_sph[j] / Ri - 1), std::abs(6 * c.k_mix[j] / Ri - 1)});
      if (q <= eps) return {NeighborhoodKind::eps_round, lab.scale, q, 0, n - 1};
      double kmin = inf;
      for (int j = 0; j < n; ++j) kmin = std::min(kmin, c.min_sectional(j));
      double achieved =
          std::max({c.length * std::sqrt(Ri), c.R.maxCoeff() / Ri, Ri / std::max(c.R.minCoeff(), 1e-300)});
      if (kmin > 0 && achieved <= C) return {NeighborhoodKind::c_component, lab.scale, achieved, 0, n - 1};
    }
    double qn = neck(i);
    if (qn <= tol) return {NeighborhoodKind::eps_neck, lab.scale, qn, neck_lo[i], neck_hi[i]};
    if (!p.periodic()) {
      // cap: within C scales of a pole, with a neck whose window begins within C scales of the node
      for (int side = 0; side < 2; ++side) {
        bool pole = side == 0 ? p.left == EndMode::pole : p.right == EndMode::pole;
        if (!pole) continue;
        double dpole = side == 0 ? c.s[i] : c.length - c.s[i];
        if (dpole > C * lab.scale) continue;
        double best = inf;
        int far = -1;
        for (int j = 0; j < n; ++j) {
          if (!(c.R[j] > 0)) continue;
          double rj = 1 / std::sqrt(c.R[j]);
          double edge = side == 0 ? c.s[j] - half * rj : c.s[j] + half * rj;
          double gap = side == 0 ? edge - c.s[i] : c.s[i] - edge;
          if (gap < 0 || gap > C * lab.scale) continue;
          double q = neck(j);
          if (q < best) best = q, far = side == 0 ? neck_hi[j] : neck_lo[j];
        }
        if (best <= tol) {
          if (side == 0) return {NeighborhoodKind::cap, lab.scale, best, 0, far};
          return {NeighborhoodKind::cap, lab.scale, best, far, n - 1};
        }
      }
    }
    lab.quality = qn;
    return lab;
  }
};

}  // namespace

std::string to_string(NeighborhoodKind k) {
  switch (k) {
    case NeighborhoodKind::eps_neck: return "eps_neck";
    case NeighborhoodKind::c_component: return "c_component";
    case NeighborhoodKind::eps_round: return "eps_round";
    case NeighborhoodKind::cap: return "cap";
    case NeighborhoodKind::unclassified: return "unclassified";
  }
  return "unclassified";
}

std::string to_string(RegionKind k) {
  switch (k) {
    case RegionKind::neck_region: return "neck_region";
    case RegionKind::double_horn: return "double_horn";
    case RegionKind::cap_region: return "cap_region";
    case RegionKind::component: return "component";
  }
  return "component";
}

double curvature_scale(const WarpedProfile& p, int node) {
  if (node < 0 || node >= p.n()) throw DomainError("node outside the profile");
  auto c = warped_curvatures(p);
  if (!(c.R[node] > 0)) throw NotHighCurvatureError("curvature scale needs R > 0");
  return 1 / std::sqrt(c.R[node]);
}

double neck_quality(const WarpedProfile& p, const WarpedCurvatures& c, int node, double half_length, int* first,
                    int* last) {
  if (node < 0 || node >= p.n()) throw DomainError("node outside the profile");
  if (!(c.R[node] > 0)) throw NotHighCurvatureError("curvature scale needs R > 0");
  double r = 1 / std::sqrt(c.R[node]);
  return window_quality(p, c, c.s[node], std::sqrt(2.0) * r, half_length * r, first, last, nullptr);
}

NeighborhoodLabel classify_point(const WarpedProfile& p, int node, double eps, double C, NeckCriteria neck) {
  Classifier cl(p, eps, C, neck);
  return cl.classify(node);
}

std::vector<NeighborhoodLabel> classify_profile(const WarpedProfile& p, double eps, double C, NeckCriteria neck) {
  Classifier cl(p, eps, C, neck);
  std::vector<NeighborhoodLabel> out;
  for (int i = 0; i < p.n(); ++i) {
    if (cl.c.R[i] > 0) {
      out.push_back(cl.classify(i));
    } else {
      out.push_back({});
    }
  }
  return out;
}

HornReport find_horns(const WarpedProfile& p, double r_threshold, NeckCriteria neck) {
  if (!(r_threshold > 0)) throw ParameterError("r_threshold must be positive");
  HornReport rep;
  rep.r_threshold = r_threshold;
  auto c = warped_curvatures(p);
  int n = p.n();
  std::vector<bool> high(n);
  for (int i = 0; i < n; ++i) {
    high[i] = c.R[i] >= r_threshold;
    if (!high[i]) rep.low_nodes.push_back(i);
  }
  if (rep.low_nodes.empty()) {
    HighRegion r;
    r.first = 0;
    r.last = n - 1;
    bool open_end = !p.periodic() && (p.left != EndMode::pole || p.right != EndMode::pole);
    r.kind = open_end ? RegionKind::double_horn : RegionKind::component;
    rep.regions.push_back(r);
  } else {
    // runs of high nodes; a periodic scan starts just after a low node
    int start = p.periodic() ? (rep.low_nodes.front() + 1) % n : 0;
    for (int k = 0; k < n;) {
      int i = (start + k) % n;
      if (!high[i]) {
        ++k;
        continue;
      }
      int len = 0;
      while (k + len < n && high[(start + k + len) % n]) ++len;
      HighRegion r;
      r.first = i;
      r.last = (start + k + len - 1) % n;
      bool at_left = !p.periodic() && r.first == 0, at_right = !p.periodic() && r.last == n - 1;
      bool open_end = (at_left && p.left != EndMode::pole) || (at_right && p.right != EndMode::pole);
      if (open_end) r.kind = RegionKind::double_horn;
      else if (at_left || at_right) r.kind = RegionKind::cap_region;
      else r.kind = RegionKind::neck_region;
      rep.regions.push_back(r);
      k += len;
    }
  }
  double half = neck.half_length > 0 ? neck.half_length : 2.0;
  for (auto& r : rep.regions) {
    if (r.kind == RegionKind::component || r.kind == RegionKind::cap_region) continue;
    int len = (r.last - r.first + n) % n + 1;
    auto at = [&](int k) { return (r.first + k) % n; };
    int m = 0;
    for (int k = 1; k < len; ++k)
      if (p.w[at(k)] < p.w[at(m)]) m = k;
    auto make = [&](int mouth_k, int tip_k, int lo_k, int hi_k) {
      Horn hrn;
      hrn.mouth = at(mouth_k);
      hrn.tip = at(tip_k);
      hrn.direction = tip_k >= mouth_k ? 1 : -1;
      hrn.first = at(lo_k);
      hrn.last = at(hi_k);
      hrn.monotone = true;
      for (int k = mouth_k; k != tip_k; k += hrn.direction)
        if (p.w[at(k + hrn.direction)] > p.w[at(k)] * (1 + 1e-12)) hrn.monotone = false;
      for (int k = lo_k; k <= hi_k; ++k) hrn.worst_quality = std::max(hrn.worst_quality, neck_quality(p, c, at(k), half));
      r.horns.push_back(hrn);
    };
    if (m > 0) make(0, m, 0, m);
    if (m < len - 1) make(len - 1, m, m + 1, len - 1);
    if (len == 1) make(0, 0, 0, 0);
  }
  return rep;
}

std::optional<SurgerySite> find_delta_neck(const WarpedProfile& p, const Horn& horn, double h, double delta,
                                           double half_length) {
  if (!(h > 0)) throw ParameterError("h must be positive");
  if (!(delta > 0)) throw ParameterError("delta must be positive");
  if (horn.mouth < 0 || horn.tip < 0 || horn.mouth >= p.n() || horn.tip >= p.n()) throw DomainError("horn outside the profile");
  auto c = warped_curvatures(p);
  int n = p.n();
  double target = 1 / (h * h);
  int dir = horn.direction == 0 ? 1 : horn.direction;
  double s_site = std::numeric_limits<double>::quiet_NaN();
  for (int j = horn.mouth;; j = (j + dir + n) % n) {
    if (std::abs(c.R[j] - target) <= 1e-9 * target) {
      s_site = c.s[j];
      break;
    }
    if (j == horn.tip) break;
    int k = (j + dir + n) % n;
    if (c.R[j] < target && c.R[k] >= target) {
      double f = (target - c.R[j]) / (c.R[k] - c.R[j]);
      double sk = c.s[k];
      if (p.periodic()) {
        if (dir > 0 && sk < c.s[j]) sk += c.length;
        if (dir < 0 && sk > c.s[j]) sk -= c.length;
      }
      s_site = c.s[j] + f * (sk - c.s[j]);
      if (p.periodic()) s_site = std::fmod(s_site + c.length, c.length);
      break;
    }
  }
  if (std::isnan(s_site)) return std::nullopt;
  SurgerySite site;
  site.s = s_site;
  site.w = ProfileInterpolant(p).w(s_site);
  site.quality = window_quality(p, c, s_site, std::sqrt(2.0) * h, half_length * h, nullptr, nullptr, &site.window_nodes);
  if (site.window_nodes < 16 / delta)
    throw ResolutionError("delta-neck under-resolved: " + std::to_string(site.window_nodes) + " nodes, need " +
                          std::to_string(static_cast<int>(std::ceil(16 / delta))) + "; regrid finer");
  double best = inf;
  for (int j = 0; j < n; ++j) {
    double d = arc_distance(c, p.periodic(), c.s[j], s_site);
    if (d < best) best = d, site.node = j;
  }
  if (site.quality > delta) return std::nullopt;
  return site;
}

}  // namespace ricci
