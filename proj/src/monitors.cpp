#include "ricci/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ricci {

using std::numbers::pi;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double label_distance(const WarpedProfile& p, double L, double a, double b) {
  double d = std::abs(a - b);
  if (p.periodic()) d = std::min(d, L - d);
  return d;
}

// d_s R and d_s^2 R per node from fourth-order differences.
void r_derivatives(const WarpedProfile& p, const WarpedCurvatures& c, Eigen::VectorXd& rs, Eigen::VectorXd& rss) {
  auto pd = detail::pad(p);
  auto rp = detail::pad_field(p, c.R, false);
  int n = p.n();
  rs.resize(n);
  rss.resize(n);
  for (int i = 0; i < n; ++i) {
    int j = i + 2;
    double phi = pd.phi[j], phix = detail::dx1(pd.phi, j, pd.h);
    double rx = detail::dx1(rp, j, pd.h), rxx = detail::dx2(rp, j, pd.h);
    rs[i] = rx / phi;
    rss[i] = (rxx - rs[i] * phix) / (phi * phi);
  }
}

}  // namespace

Eigen::VectorXd pinching_ratio(const WarpedCurvatures& c) {
  Eigen::VectorXd r(c.R.size());
  for (int i = 0; i < r.size(); ++i) r[i] = std::max(0.0, -c.min_sectional(i)) / (1 + std::abs(c.R[i]));
  return r;
}

double w2(const WarpedProfile& p) {
  if (p.topology() != Topology::closed_sphere) return nan;
  auto c = warped_curvatures(p);
  ProfileInterpolant ip(p);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 2 < p.n(); ++i) {
    double a = c.ws[i], b = c.ws[i + 1];
    if (a == 0 || (a > 0) != (b > 0)) {
      double f = a == b ? 0.0 : a / (a - b);
      double s = c.s[i] + f * (c.s[i + 1] - c.s[i]);
      double w = ip.w(s);
      best = std::min(best, 4 * pi * w * w);
    }
  }
  return std::isfinite(best) ? best : nan;
}

HarnackValue harnack_deficit(const WarpedProfile& p) {
  if (!(p.t > 0)) throw ParameterError("Harnack expression needs t > 0");
  auto c = warped_curvatures(p);
  Eigen::VectorXd rs, rss;
  r_derivatives(p, c, rs, rss);
  HarnackValue out;
  out.value = std::numeric_limits<double>::infinity();
  out.r_max = c.R.cwiseAbs().maxCoeff();
  for (int i = 0; i < p.n(); ++i) {
    double lap = p.w[i] > 0 ? rss[i] + 2 * c.ws[i] / p.w[i] * rs[i] : 3 * rss[i];
    double ric2 = c.ric_ss[i] * c.ric_ss[i] + 2 * c.ric_sph[i] * c.ric_sph[i];
    double base = lap + 2 * ric2 + c.R[i] / p.t;
    double v;
    if (c.ric_ss[i] > 0) {
      v = base - rs[i] * rs[i] / (2 * c.ric_ss[i]);
    } else {
      // V along the axis only matters; sample a fixed set of lengths up to the curvature scale
      double scale = 1 / std::sqrt(std::max(std::abs(c.R[i]), 1e-300));
      v = base;
      for (double a : {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0}) {
        double x = a * scale;
        v = std::min(v, base + 2 * rs[i] * x + 2 * c.ric_ss[i] * x * x);
      }
    }
    if (v < out.value) {
      out.value = v;
      out.node = i;
      out.R = c.R[i];
    }
  }
  return out;
}

HarnackValue harnack_deficit(const FlowHistory& h, double t) {
  if (h.size() == 0) throw ParameterError("empty history");
  std::size_t k = 0;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (std::abs(h.times[i] - t) < std::abs(h.times[k] - t)) k = i;
  return harnack_deficit(h.snapshots[k]);
}

MonitorTrace compute_trace(const FlowHistory& h, std::vector<std::pair<int, int>> markers) {
  MonitorTrace tr;
  if (h.size() == 0) return tr;
  int nl = h.material.empty() ? 0 : static_cast<int>(h.material[0].size());
  if (markers.empty() && nl >= 2) markers = {{0, nl - 1}, {0, nl / 2}};
  for (auto [a, b] : markers)
    if (a < 0 || b < 0 || a >= nl || b >= nl) throw ParameterError("marker label out of range");
  tr.markers = markers;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto& p = h.snapshots[k];
    auto c = warped_curvatures(p);
    MonitorRecord r;
    r.t = h.times[k];
    Eigen::Index im;
    r.r_max = c.R.maxCoeff(&im);
    r.argmax = static_cast<int>(im);
    r.r_min = c.R.minCoeff();
    r.volume = profile_volume(p);
    double kmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p.n(); ++i) kmin = std::min(kmin, c.min_sectional(i));
    r.min_sectional = kmin;
    auto pr = pinching_ratio(c);
    r.pinching_max = pr.maxCoeff();
    r.pinching_at_rmax = pr[im];
    r.w2 = w2(p);
    if (k == 0) tr.nonneg_start = kmin >= -1e-8 * std::max(1.0, c.R.cwiseAbs().maxCoeff());
    r.harnack = (tr.nonneg_start && r.t > 0) ? harnack_deficit(p).value : nan;
    for (auto [a, b] : markers) r.distances.push_back(label_distance(p, c.length, h.material[k][a], h.material[k][b]));
    for (int i = 0; i + 1 < p.n(); ++i) tr.ds_max = std::max(tr.ds_max, c.s[i + 1] - c.s[i]);
    tr.records.push_back(std::move(r));
  }
  return tr;
}

namespace {

void tally(Verdict& v, IntervalVerdict iv) {
  if (v.intervals.empty()) {
    v.max_gap = v.min_gap = iv.gap;
  } else {
    v.max_gap = std::max(v.max_gap, iv.gap);
    v.min_gap = std::min(v.min_gap, iv.gap);
  }
  v.pass = v.pass && iv.pass;
  v.intervals.push_back(iv);
}

// R_min between two samples: 1/R linear when both positive (exact for round spheres), else linear.
struct RminInterp {
  double t0, t1, r0, r1;
  double operator()(double t) const {
    double f = (t - t0) / (t1 - t0);
    if (r0 > 0 && r1 > 0) return 1 / ((1 - f) / r0 + f / r1);
    return (1 - f) * r0 + f * r1;
  }
};

}  // namespace

Verdict check_rmin_ode(const MonitorTrace& tr, double tol_rel) {
  Verdict v;
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const auto &a = tr.records[k], &b = tr.records[k + 1];
    IntervalVerdict iv{a.t, b.t, b.r_min, 0, 0, 0, true};
    double dt = b.t - a.t;
    double den = 1 - (2.0 / 3.0) * a.r_min * dt;
    if (den <= 0) {
      iv.bound = std::numeric_limits<double>::infinity();
      iv.pass = false;
      iv.gap = -1;
    } else {
      iv.bound = a.r_min / den;
      double scale = std::max({std::abs(iv.bound), std::abs(b.r_min - a.r_min), 1e-300});
      iv.tol = tol_rel * scale + 10 * (2.0 / 3.0) * a.r_min * a.r_min * tr.ds_max * tr.ds_max * dt;
      iv.gap = (b.r_min - iv.bound) / scale;
      iv.pass = b.r_min >= iv.bound - iv.tol;
    }
    tally(v, iv);
  }
  return v;
}

Verdict check_w2_ode(const MonitorTrace& tr, double tol_rel) {
  Verdict v;
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const auto &a = tr.records[k], &b = tr.records[k + 1];
    if (!std::isfinite(a.w2) || !std::isfinite(b.w2)) continue;
    RminInterp r{a.t, b.t, a.r_min, b.r_min};
    auto f = [&](double t, double y) { return -4 * pi - 0.5 * r(t) * y; };
    int m = 64;
    double y = a.w2, t = a.t, dt = (b.t - a.t) / m;
    for (int i = 0; i < m; ++i) {
      double k1 = f(t, y), k2 = f(t + dt / 2, y + dt / 2 * k1), k3 = f(t + dt / 2, y + dt / 2 * k2),
             k4 = f(t + dt, y + dt * k3);
      y += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += dt;
    }
    IntervalVerdict iv{a.t, b.t, b.w2, y, 0, 0, true};
    double scale = std::max({std::abs(a.w2), std::abs(y - a.w2), 1e-300});
    iv.tol = tol_rel * scale;
    iv.gap = (y - b.w2) / scale;
    iv.pass = b.w2 <= y + iv.tol;
    tally(v, iv);
  }
  return v;
}

Verdict volume_bound_check(const MonitorTrace& tr, double tol_rel) {
  Verdict v;
  if (tr.size() == 0) return v;
  const auto& r0 = tr.records[0];
  for (std::size_t k = 1; k < tr.size(); ++k) {
    const auto& b = tr.records[k];
    double bound = r0.volume * std::exp(-r0.r_min * (b.t - r0.t));
    IntervalVerdict iv{r0.t, b.t, b.volume, bound, tol_rel * bound, 0, true};
    iv.gap = (bound - b.volume) / bound;
    iv.pass = b.volume <= bound * (1 + tol_rel);
    if (tr.nonneg_start) iv.pass = iv.pass && b.volume <= tr.records[k - 1].volume * (1 + tol_rel);
    tally(v, iv);
  }
  return v;
}

Verdict distance_contraction_check(const MonitorTrace& tr, double tol_rel) {
  Verdict v;
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const auto &a = tr.records[k], &b = tr.records[k + 1];
    for (std::size_t m = 0; m < a.distances.size(); ++m) {
      double d0 = a.distances[m], d1 = b.distances[m];
      double scale = std::max(d0, 1e-300);
      IntervalVerdict iv{a.t, b.t, d1, d0, tol_rel * scale, (d0 - d1) / scale, d1 <= d0 + tol_rel * scale};
      tally(v, iv);
    }
  }
  return v;
}

int blowup_label(const FlowHistory& h) {
  if (h.size() == 0 || h.material.empty()) throw ParameterError("history has no material labels");
  const auto& p = h.snapshots.back();
  auto c = warped_curvatures(p);
  Eigen::Index im;
  c.R.maxCoeff(&im);
  double s = c.s[im];
  const auto& lab = h.material.back();
  int best = 0;
  for (int k = 1; k < lab.size(); ++k)
    if (std::abs(lab[k] - s) < std::abs(lab[best] - s)) best = k;
  return best;
}

std::vector<double> pinching_at_label(const FlowHistory& h, int label) {
  std::vector<double> out;
  for (std::size_t k = 0; k < h.size(); ++k) {
    auto c = warped_curvatures(h.snapshots[k]);
    double s = h.material[k][label];
    int i = static_cast<int>(std::upper_bound(c.s.data(), c.s.data() + c.s.size(), s) - c.s.data());
    i = std::clamp(i, 1, static_cast<int>(c.s.size()) - 1);
    if (s - c.s[i - 1] < c.s[i] - s) --i;
    out.push_back(std::max(0.0, -c.min_sectional(i)) / (1 + std::abs(c.R[i])));
  }
  return out;
}

}  // namespace ricci
