#include "ricci/reduced_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace ricci {

using std::numbers::pi;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Arclength of fractional material coordinate q at one snapshot; periodic
// coordinates unwrap by one period per nl labels.
double material_sigma(const Eigen::VectorXd& lab, double q, bool periodic, double L) {
  int nl = static_cast<int>(lab.size());
  int i = static_cast<int>(std::floor(q));
  double f = q - i;
  if (periodic) {
    int wraps = static_cast<int>(std::floor(double(i) / nl));
    int i0 = i - wraps * nl, i1 = (i0 + 1) % nl;
    double a = lab[i0], b = lab[i1] + (i1 == 0 ? L : 0.0);
    return a + f * (b - a) + wraps * L;
  }
  i = std::clamp(i, 0, nl - 2);
  f = q - i;
  return lab[i] + f * (lab[i + 1] - lab[i]);
}

// Inverse of material_sigma (labels increase).
double material_coordinate(const Eigen::VectorXd& lab, double s, bool periodic, double L) {
  int nl = static_cast<int>(lab.size());
  if (periodic) {
    double wraps = std::floor((s - lab[0]) / L);
    double x = s - wraps * L;
    int i = static_cast<int>(std::upper_bound(lab.data(), lab.data() + nl, x) - lab.data()) - 1;
    i = std::clamp(i, 0, nl - 1);
    double b = i + 1 < nl ? lab[i + 1] : lab[0] + L;
    double d = b - lab[i];
    return wraps * nl + i + (d > 0 ? std::clamp((x - lab[i]) / d, 0.0, 1.0) : 0.0);
  }
  int i = static_cast<int>(std::upper_bound(lab.data(), lab.data() + nl, s) - lab.data()) - 1;
  i = std::clamp(i, 0, nl - 2);
  double d = lab[i + 1] - lab[i];
  return i + (d > 0 ? std::clamp((s - lab[i]) / d, 0.0, 1.0) : 0.0);
}

double min_image(double d, bool periodic, double L) {
  d = std::abs(d);
  if (periodic) {
    d = std::fmod(d, L);
    d = std::min(d, L - d);
  }
  return d;
}

}  // namespace

ReducedLattice::ReducedLattice(const FlowHistory& h, SpacetimePoint base, const ReducedLengthOptions& opt) {
  if (base.snapshot < 0 || base.snapshot >= static_cast<int>(h.size()))
    throw DomainError("basepoint snapshot outside the history");
  if (h.material.size() != h.size() || h.material[0].size() < 2) throw ParameterError("history lacks material labels");
  if (opt.refine < 1) throw ParameterError("refine must be >= 1");
  if (!(opt.grade > 0)) throw ParameterError("grade must be positive");
  if (opt.theta_nodes < 0 || opt.theta_nodes == 2) throw ParameterError("theta_nodes must be 0, 1 or >= 3");
  if (opt.level_stride < 1) throw ParameterError("level_stride must be >= 1");
  double t0 = h.times[base.snapshot];
  std::vector<int> window;
  for (int k = base.snapshot; k >= 0; --k) {
    if (opt.tau_max > 0 && t0 - h.times[k] > opt.tau_max * (1 + 1e-12)) break;
    window.push_back(k);
  }
  for (std::size_t j = 0; j < window.size(); ++j)
    if (j % opt.level_stride == 0 || j + 1 == window.size()) {
      taus_.push_back(t0 - h.times[window[j]]);
      snap_.push_back(window[j]);
    }
  if (taus_.size() < 3) throw ResolutionError("reduced length needs at least 3 snapshots in the window");
  const auto& p0 = h.snapshots[base.snapshot];
  const auto& lab = h.material[base.snapshot];
  periodic_ = p0.periodic();
  int nl = static_cast<int>(lab.size());
  double L0 = warped_curvatures(p0).length;
  std::vector<double> qs;  // fractional label coordinates of the spatial sites
  int i0 = 0;
  double delta = 0;        // site spacing at the basepoint
  if (opt.base_spacing < 0) {
    int span = periodic_ ? nl : nl - 1;
    int n = span * opt.refine + (periodic_ ? 0 : 1);
    double best = inf;
    for (int i = 0; i < n; ++i) {
      qs.push_back(double(i) / opt.refine);
      double d = min_image(material_sigma(lab, qs.back(), periodic_, L0) - base.s, periodic_, L0);
      if (d < best) best = d, i0 = i;
    }
    double lo = material_sigma(lab, qs[std::max(i0 - 1, 0)], periodic_, L0);
    double hi = material_sigma(lab, qs[std::min(i0 + 1, n - 1)], periodic_, L0);
    delta = (hi - lo) / ((i0 > 0) + (i0 + 1 < n));
  } else {
    // spacing grows linearly with distance from the basepoint up to the label spacing / refine
    double xb = periodic_ ? base.s : std::clamp(base.s, 0.0, L0);
    auto coarse = [&](double x) {
      double q = material_coordinate(lab, x, periodic_, L0);
      int i = static_cast<int>(std::floor(q));
      if (!periodic_) i = std::min(i, nl - 2);
      return (material_sigma(lab, i + 1, periodic_, L0) - material_sigma(lab, i, periodic_, L0)) / opt.refine;
    };
    double hc = coarse(xb);
    delta = opt.base_spacing > 0 ? opt.base_spacing : 0.5 * std::sqrt(taus_[1]);
    delta = std::clamp(delta, hc / 1024, hc);
    auto march = [&](double dir) {
      std::vector<double> xs;
      double x = xb;
      for (;;) {
        double hh = std::min(delta + opt.grade * std::abs(x - xb), coarse(x));
        x += dir * hh;
        if (periodic_) {
          if (std::abs(x - xb) >= 0.5 * L0 - 0.25 * hh) break;
        } else if (dir > 0 ? x >= L0 - 0.5 * hh : x <= 0.5 * hh) {
          if (dir > 0 ? xb < L0 : xb > 0) xs.push_back(dir > 0 ? L0 : 0.0);
          break;
        }
        xs.push_back(x);
      }
      return xs;
    };
    auto left = march(-1), right = march(1);
    for (auto it = left.rbegin(); it != left.rend(); ++it) qs.push_back(material_coordinate(lab, *it, periodic_, L0));
    i0 = static_cast<int>(qs.size());
    qs.push_back(material_coordinate(lab, xb, periodic_, L0));
    for (double x : right) qs.push_back(material_coordinate(lab, x, periodic_, L0));
  }
  ns_ = static_cast<int>(qs.size());
  if (ns_ < 2) throw ResolutionError("reduced length lattice has fewer than 2 sites");
  bool pole = !periodic_ && ((i0 == 0 && p0.left == EndMode::pole && qs[0] <= 0) ||
                             (i0 == ns_ - 1 && p0.right == EndMode::pole && qs[i0] >= nl - 1));
  std::vector<double> th;
  if (opt.theta_nodes > 0) {
    for (int m = 0; m < opt.theta_nodes; ++m) th.push_back(opt.theta_nodes == 1 ? 0.0 : pi * m / (opt.theta_nodes - 1));
  } else if (pole) {
    th.push_back(0.0);
  } else {
    // first cell matches the s-spacing at the basepoint, then grows geometrically to pi
    double wb = ProfileInterpolant(p0).w(material_sigma(lab, qs[i0], periodic_, L0));
    double d = std::min(pi / 24, delta / wb);
    th.push_back(0.0);
    while (th.back() + d < pi) {
      th.push_back(th.back() + d);
      d *= 1 + 1.5 * opt.grade;
    }
    if (th.size() > 2 && pi - th.back() < 0.5 * (th.back() - th[th.size() - 2])) th.pop_back();
    th.push_back(pi);
  }
  nth_ = static_cast<int>(th.size());
  theta_ = Eigen::Map<Eigen::VectorXd>(th.data(), nth_);
  base_ = i0 * nth_;
  subcell_ = opt.subcell;

  for (int k : snap_) {
    const auto& p = h.snapshots[k];
    auto c = warped_curvatures(p);
    ProfileInterpolant ip(p);
    Eigen::VectorXd sg(ns_), ww(ns_), rr(ns_);
    for (int i = 0; i < ns_; ++i) {
      sg[i] = material_sigma(h.material[k], qs[i], periodic_, c.length);
      ww[i] = ip.w(sg[i]);
      rr[i] = ip.eval(c.R, sg[i], false);
    }
    sig_.push_back(sg);
    w_.push_back(ww);
    R_.push_back(rr);
    len_.push_back(c.length);
  }
  if (opt.light_cone > 0) cone2_ = opt.light_cone * opt.light_cone * std::sqrt(taus_.back());
}

namespace {

// int_{ta}^{tb} sqrt(tau) / (alpha + beta tau) dtau, alpha + beta tau > 0 on the interval.
double inverse_linear_integral(double ta, double tb, double alpha, double beta) {
  double ra = std::sqrt(ta), rb = std::sqrt(tb);
  double e = beta / alpha;
  if (std::abs(e) * tb < 1e-4) {
    auto F = [&](double t, double r) { return (2.0 / 3.0) * t * r - e * 0.4 * t * t * r + e * e * (2.0 / 7.0) * t * t * t * r; };
    return (F(tb, rb) - F(ta, ra)) / alpha;
  }
  double c = alpha / beta;
  if (c > 0) {
    double q = std::sqrt(c);
    return 2 / beta * ((rb - ra) - q * (std::atan(rb / q) - std::atan(ra / q)));
  }
  double q = std::sqrt(-c);
  auto G = [&](double r) { return 0.5 * std::log(std::abs((r + q) / (r - q))); };
  return 2 / beta * ((rb - ra) - q * (G(rb) - G(ra)));
}

// int R sqrt(tau) dtau over one level step.
double curvature_integral(double ta, double tb, double Ra, double Rb) {
  if (Ra > 0 && Rb > 0) {
    double ua = 1 / Ra, ub = 1 / Rb;
    double beta = (ub - ua) / (tb - ta);
    return inverse_linear_integral(ta, tb, ua - beta * ta, beta);
  }
  double m = (Rb - Ra) / (tb - ta), p = Ra - m * ta;
  auto F = [&](double t) { double r = std::sqrt(t); return p * (2.0 / 3.0) * t * r + m * 0.4 * t * t * r; };
  return F(tb) - F(ta);
}

}  // namespace

ReducedLattice::PairCost ReducedLattice::pair_cost(int k, int is, int js) const {
  double ta = taus_[k], tb = taus_[k + 1];
  double sa = std::sqrt(ta), sb = std::sqrt(tb), dsig = sb - sa;
  // average of tau over the step at constant speed in sigma
  double f = ((sa * sa + sa * sb + sb * sb) / 3 - ta) / (tb - ta);
  double d[2], w2[2];
  for (int j = 0; j < 2; ++j) {
    double ds = min_image(sig_[k + j][js] - sig_[k + j][is], periodic_, len_[k + j]);
    double wm = 0.5 * (w_[k + j][is] + w_[k + j][js]);
    d[j] = ds * ds;
    w2[j] = wm * wm;
  }
  PairCost pc;
  pc.d2 = d[0] + (d[1] - d[0]) * f;
  pc.w2 = w2[0] + (w2[1] - w2[0]) * f;
  pc.a = pc.d2 / (2 * dsig) + curvature_integral(ta, tb, R_[k][is], R_[k + 1][js]);
  pc.b = pc.w2 / (2 * dsig);
  return pc;
}

double ReducedLattice::cost_from(const PairCost& pc, int k, int ma, int mb) const {
  double dth = theta_[mb] - theta_[ma];
  if (cone2_ > 0) {
    double dsig = std::sqrt(taus_[k + 1]) - std::sqrt(taus_[k]);
    if (pc.d2 + pc.w2 * dth * dth > cone2_ * dsig) return inf;
  }
  return pc.a + pc.b * dth * dth;
}

double ReducedLattice::step_cost(int k, int a, int b) const {
  return cost_from(pair_cost(k, a / nth_, b / nth_), k, a % nth_, b % nth_);
}

double ReducedLattice::volume_weight(int k, int a) const {
  int i = a / nth_, m = a % nth_;
  const auto& s = sig_[k];
  double ds;
  if (periodic_) {
    double L = len_[k];
    double prev = s[(i + ns_ - 1) % ns_] - (i == 0 ? L : 0.0);
    double next = s[(i + 1) % ns_] + (i == ns_ - 1 ? L : 0.0);
    ds = 0.5 * (next - prev);
  } else {
    double lo = i > 0 ? s[i - 1] : s[i], hi = i + 1 < ns_ ? s[i + 1] : s[i];
    ds = 0.5 * (hi - lo);
  }
  double wt;
  if (nth_ == 1) {
    wt = 4 * pi;
  } else {
    // exact sin(theta) weights for the piecewise-linear interpolant
    wt = 0;
    if (m > 0) {
      double a0 = theta_[m - 1], b0 = theta_[m], hh = b0 - a0;
      wt += (std::sin(b0) - std::sin(a0) - hh * std::cos(b0)) / hh;
    }
    if (m + 1 < nth_) {
      double a0 = theta_[m], b0 = theta_[m + 1], hh = b0 - a0;
      wt += (hh * std::cos(a0) + std::sin(a0) - std::sin(b0)) / hh;
    }
    wt *= 2 * pi;
  }
  double w = w_[k][i];
  return ds * w * w * wt;
}

double l_length_of_path(const ReducedLattice& lat, const std::vector<int>& path) {
  if (static_cast<int>(path.size()) > lat.levels() || path.empty()) throw DomainError("path longer than the window");
  if (path[0] != lat.base_site()) throw DomainError("path must start at the basepoint");
  double L = 0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (path[k + 1] < 0 || path[k + 1] >= lat.sites()) throw DomainError("path leaves the lattice");
    L += lat.step_cost(static_cast<int>(k), path[k], path[k + 1]);
  }
  return L;
}

namespace {

// Lowers L at one target by the minimum of a local quadratic model of
// L(k, a) + cost(a -> b) around the best lattice predecessor.
double subcell_minimum(const ReducedLattice& lat, const Eigen::VectorXd& Lk, int k, int a, int b) {
  int nth = lat.theta_sites(), ns = lat.s_sites();
  int ia = a / nth, ma = a % nth, jb = b / nth;
  double thb = lat.theta(b % nth);
  auto sidx = [&](int i) { return lat.periodic() ? (i % ns + ns) % ns : i; };
  bool has_x = lat.periodic() || (ia > 0 && ia + 1 < ns);
  bool has_y = nth > 1;
  // theta stencil, mirrored through 0 and pi
  int mm = ma - 1, mp = ma + 1;
  double y0 = lat.theta(ma), ym = y0, yp = y0;
  if (has_y) {
    if (ma == 0) mm = 1, ym = -lat.theta(1);
    else ym = lat.theta(mm);
    if (ma == nth - 1) mp = nth - 2, yp = 2 * pi - lat.theta(nth - 2);
    else yp = lat.theta(mp);
  }
  auto F = [&](int di, int m, double y) {
    int i = sidx(ia + di);
    auto pc = lat.pair_cost(k, i, jb);
    double dth = thb - y;
    return Lk[i * nth + m] + pc.a + pc.b * dth * dth;
  };
  double f0 = F(0, ma, y0);
  double gx = 0, hxx = 1, gy = 0, hyy = 1, hxy = 0;
  if (has_x) {
    double fp = F(1, ma, y0), fm = F(-1, ma, y0);
    if (!std::isfinite(fp) || !std::isfinite(fm)) has_x = false;
    gx = 0.5 * (fp - fm);
    hxx = fp - 2 * f0 + fm;
  }
  double h1 = 0, h2 = 0;
  if (has_y) {
    double fp = F(0, mp, yp), fm = F(0, mm, ym);
    if (!std::isfinite(fp) || !std::isfinite(fm)) has_y = false;
    h1 = y0 - ym, h2 = yp - y0;
    double den = h1 * h2 * (h1 + h2);
    gy = (h1 * h1 * fp - h2 * h2 * fm + (h2 * h2 - h1 * h1) * f0) / den;
    hyy = 2 * (h1 * fp + h2 * fm - (h1 + h2) * f0) / den;
  }
  if (!has_x && !has_y) return f0;
  if (has_x && has_y) {
    double c = F(1, mp, yp) - F(1, mm, ym) - F(-1, mp, yp) + F(-1, mm, ym);
    hxy = std::isfinite(c) ? c / (2 * (yp - ym)) : 0;
  }
  if (!has_x) gx = 0, hxx = 1, hxy = 0;
  if (!has_y) gy = 0, hyy = 1, hxy = 0;
  double det = hxx * hyy - hxy * hxy;
  if (!(hxx > 0 && hyy > 0 && det > 0)) return f0;
  double dx = -(hyy * gx - hxy * gy) / det, dy = -(hxx * gy - hxy * gx) / det;
  if (std::abs(dx) > 1 || dy < -h1 || dy > h2) return f0;
  double v = f0 + 0.5 * (gx * dx + gy * dy);
  return v < f0 ? v : f0;
}

}  // namespace

LGeodesicGrid reduced_length_field(const ReducedLattice& lat) {
  LGeodesicGrid g;
  int S = lat.sites(), ns = lat.s_sites(), nth = lat.theta_sites();
  for (int k = 0; k < lat.levels(); ++k) g.taus.push_back(lat.tau(k));
  Eigen::VectorXd L0 = Eigen::VectorXd::Constant(S, inf);
  L0[lat.base_site()] = 0;
  g.L.push_back(L0);
  g.parent.push_back(Eigen::VectorXi::Constant(S, -1));
  for (int k = 0; k + 1 < lat.levels(); ++k) {
    const Eigen::VectorXd prev = g.L.back();
    std::vector<int> live;
    for (int i = 0; i < ns; ++i)
      for (int m = 0; m < nth; ++m)
        if (std::isfinite(prev[i * nth + m])) {
          live.push_back(i);
          break;
        }
    Eigen::VectorXd next = Eigen::VectorXd::Constant(S, inf);
    Eigen::VectorXi par = Eigen::VectorXi::Constant(S, -1);
    for (int j = 0; j < ns; ++j)
      for (int i : live) {
        auto pc = lat.pair_cost(k, i, j);
        for (int mb = 0; mb < nth; ++mb) {
          int b = j * nth + mb;
          for (int ma = 0; ma < nth; ++ma) {
            int a = i * nth + ma;
            double v = prev[a] + lat.cost_from(pc, k, ma, mb);
            if (v < next[b]) next[b] = v, par[b] = a;
          }
        }
      }
    if (lat.subcell())
      for (int b = 0; b < S; ++b)
        if (par[b] >= 0) next[b] = std::min(next[b], subcell_minimum(lat, prev, k, par[b], b));
    g.L.push_back(next);
    g.parent.push_back(par);
  }
  for (int k = 0; k < lat.levels(); ++k) {
    Eigen::VectorXd l = g.L[k];
    if (k > 0) l /= 2 * std::sqrt(lat.tau(k));
    else l = l.unaryExpr([](double x) { return std::isfinite(x) ? 0.0 : x; });
    g.l.push_back(l);
  }
  return g;
}

LGeodesicGrid reduced_length_field(const FlowHistory& h, SpacetimePoint base, const ReducedLengthOptions& opt) {
  ReducedLattice lat(h, base, opt);
  auto g = reduced_length_field(lat);
  g.base = base;
  return g;
}

Eigen::VectorXd reduced_length_brute_force(const ReducedLattice& lat) {
  int S = lat.sites(), K = lat.levels();
  if (std::pow(double(S), K - 1) > 5e7) throw ResolutionError("lattice too large for exhaustive enumeration");
  Eigen::VectorXd best = Eigen::VectorXd::Constant(S, inf);
  std::function<void(int, int, double)> go = [&](int k, int a, double acc) {
    if (k == K - 1) {
      best[a] = std::min(best[a], acc);
      return;
    }
    for (int b = 0; b < S; ++b) {
      double c = lat.step_cost(k, a, b);
      if (std::isfinite(c)) go(k + 1, b, acc + c);
    }
  };
  go(0, lat.base_site(), 0.0);
  return best;
}

double dp_optimality_defect(const ReducedLattice& lat, const LGeodesicGrid& g) {
  double worst = 0;
  for (int k = 0; k + 1 < lat.levels(); ++k)
    for (int a = 0; a < lat.sites(); ++a) {
      if (!std::isfinite(g.L[k][a])) continue;
      for (int b = 0; b < lat.sites(); ++b) {
        double v = g.L[k][a] + lat.step_cost(k, a, b);
        if (std::isfinite(v)) worst = std::max(worst, g.L[k + 1][b] - v);
      }
    }
  return worst;
}

double reduced_volume(const ReducedLattice& lat, const LGeodesicGrid& g, int k) {
  if (k < 1 || k >= lat.levels()) throw DomainError("reduced volume needs a level with tau > 0");
  double tau = lat.tau(k), sum = 0;
  for (int a = 0; a < lat.sites(); ++a)
    if (std::isfinite(g.l[k][a])) sum += std::exp(-g.l[k][a]) * lat.volume_weight(k, a);
  return sum / std::pow(4 * pi * tau, 1.5);
}

std::vector<double> reduced_volume_ladder(const ReducedLattice& lat, const LGeodesicGrid& g) {
  std::vector<double> v;
  for (int k = 1; k < lat.levels(); ++k) v.push_back(reduced_volume(lat, g, k));
  return v;
}

namespace {

// Every other index, keeping the last one on open grids.
std::vector<int> coarse_indices(int n, bool periodic) {
  std::vector<int> out;
  if (periodic && n % 2) {
    for (int i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  for (int i = 0; i < n; i += 2) out.push_back(i);
  if (!periodic && out.back() != n - 1) out.push_back(n - 1);
  return out;
}

std::vector<double> trapezoid_weights(const std::vector<double>& x, bool periodic, double L) {
  int n = static_cast<int>(x.size());
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) {
    double lo, hi;
    if (periodic) {
      lo = j > 0 ? x[j - 1] : x[n - 1] - L;
      hi = j + 1 < n ? x[j + 1] : x[0] + L;
    } else {
      lo = j > 0 ? x[j - 1] : x[j];
      hi = j + 1 < n ? x[j + 1] : x[j];
    }
    w[j] = 0.5 * (hi - lo);
  }
  return w;
}

std::vector<double> sine_weights(const std::vector<double>& th) {
  int n = static_cast<int>(th.size());
  if (n == 1) return {4 * pi};
  std::vector<double> w(n, 0.0);
  for (int j = 0; j + 1 < n; ++j) {
    double a = th[j], b = th[j + 1], h = b - a;
    w[j] += 2 * pi * (h * std::cos(a) + std::sin(a) - std::sin(b)) / h;
    w[j + 1] += 2 * pi * (std::sin(b) - std::sin(a) - h * std::cos(b)) / h;
  }
  return w;
}

}  // namespace

ReducedVolumeEstimate reduced_volume_estimate(const ReducedLattice& lat, const LGeodesicGrid& g, int k) {
  ReducedVolumeEstimate e;
  e.value = reduced_volume(lat, g, k);
  int nth = lat.theta_sites();
  auto cs = coarse_indices(lat.s_sites(), lat.periodic());
  auto ct = nth > 2 ? coarse_indices(nth, false) : std::vector<int>(nth == 1 ? 1 : 2, 0);
  if (nth == 2) ct[1] = 1;
  std::vector<double> xs, th;
  for (int i : cs) xs.push_back(lat.sigma(k, i * nth));
  for (int m : ct) th.push_back(lat.theta(m));
  auto ws = trapezoid_weights(xs, lat.periodic(), lat.arclength(k));
  auto wt = sine_weights(th);
  double sum = 0;
  for (std::size_t a = 0; a < cs.size(); ++a)
    for (std::size_t b = 0; b < ct.size(); ++b) {
      int site = cs[a] * nth + ct[b];
      double l = g.l[k][site], w = lat.w(k, site);
      if (std::isfinite(l)) sum += std::exp(-l) * ws[a] * wt[b] * w * w;
    }
  e.error = std::abs(sum / std::pow(4 * pi * lat.tau(k), 1.5) - e.value);
  return e;
}

MonotoneVerdict check_reduced_volume_monotone(const std::vector<double>& ladder, double tol) {
  return check_reduced_volume_monotone(ladder, std::vector<double>(ladder.size(), 0.0), tol);
}

MonotoneVerdict check_reduced_volume_monotone(const std::vector<double>& ladder, const std::vector<double>& errors,
                                              double tol) {
  if (errors.size() != ladder.size()) throw ParameterError("ladder and error estimates differ in length");
  MonotoneVerdict v;
  v.tol = tol;
  for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
    double inc = ladder[k + 1] - ladder[k];
    v.max_increase = std::max(v.max_increase, inc);
    if (inc > tol + errors[k] + errors[k + 1]) v.pass = false;
  }
  return v;
}

ReducedVolumeReport reduced_volume_report(const FlowHistory& h, SpacetimePoint base, ReducedLengthOptions opt,
                                          double tol) {
  ReducedVolumeReport rep;
  rep.base = base;
  opt.level_stride = 1;
  ReducedLattice lat(h, base, opt);
  auto g = reduced_length_field(lat);
  for (int k = 1; k < lat.levels(); ++k) {
    auto e = reduced_volume_estimate(lat, g, k);
    rep.taus.push_back(lat.tau(k));
    rep.values.push_back(e.value);
    rep.errors.push_back(e.error);
  }
  int n = static_cast<int>(rep.values.size());
  if (lat.levels() >= 5) {
    // rerun on every other level; the difference at shared levels bounds the time discretisation
    opt.level_stride = 2;
    ReducedLattice coarse(h, base, opt);
    auto gc = reduced_length_field(coarse);
    std::vector<double> terr(n, -1.0);
    for (int kc = 1; kc < coarse.levels(); ++kc) {
      double tau = coarse.tau(kc);
      for (int j = 0; j < n; ++j)
        if (rep.taus[j] == tau) terr[j] = std::abs(reduced_volume(coarse, gc, kc) - rep.values[j]);
    }
    // levels skipped by the coarse run take the larger estimate of their neighbours
    for (int j = 0; j < n; ++j)
      if (terr[j] < 0) {
        double a = j > 0 ? terr[j - 1] : 0, b = j + 1 < n ? terr[j + 1] : 0;
        rep.errors[j] += std::max(a, b);
      } else {
        rep.errors[j] += terr[j];
      }
  }
  rep.verdict = check_reduced_volume_monotone(rep.values, rep.errors, tol);
  return rep;
}

double geodesic_ball_volume(const WarpedProfile& p, double s0, double r, int rays, int steps) {
  if (!(r > 0)) throw ParameterError("ball radius must be positive");
  if (rays < 8 || steps < 8) throw ParameterError("too few rays or steps");
  auto c = warped_curvatures(p);
  double L = c.length;
  double diam = p.periodic() ? 0.5 * L + pi * p.w.maxCoeff() : L;
  if (r > diam) throw DomainError("ball radius exceeds the manifold diameter");
  ProfileInterpolant ip(p);
  auto wf = [&](double s) { return ip.w(s); };
  // centred on a pole the ball is the slab of arclength below r, 4 pi int w^2 ds
  bool at_left = p.left == EndMode::pole && s0 <= 0, at_right = p.right == EndMode::pole && s0 >= L;
  if (at_left || at_right) {
    if (r >= L) throw DomainError("geodesic ball reaches the end of the profile");
    int m = 2 * steps;
    double hs = r / m, acc = 0;
    for (int i = 0; i <= m; ++i) {
      double s = at_left ? i * hs : L - i * hs;
      double f = wf(s) * wf(s);
      acc += f * (i == 0 || i == m ? 1 : (i % 2 ? 4 : 2));
    }
    return 4 * pi * acc * hs / 3;
  }
  auto wsf = [&](double s) { return ip.eval_parity(c.ws, s, false, false); };
  auto kf = [&](double s) { return ip.eval(c.k_mix, s, false); };
  using State = Eigen::Matrix<double, 5, 1>;  // s, theta, psi, J, J'
  auto rhs = [&](const State& y) {
    double w = wf(y[0]);
    State d;
    d[0] = std::cos(y[2]);
    d[1] = std::sin(y[2]) / w;
    d[2] = -wsf(y[0]) / w * std::sin(y[2]);
    d[3] = y[4];
    d[4] = -kf(y[0]) * y[3];
    return d;
  };
  double h = r / steps, vol = 0;
  for (int i = 0; i < rays; ++i) {
    double alpha = (i + 0.5) * pi / rays;
    State y;
    y << s0, 0, alpha, 0, 1;
    double acc = 0, prev = 0;
    for (int j = 0; j < steps; ++j) {
      State k1 = rhs(y), k2 = rhs(y + h / 2 * k1), k3 = rhs(y + h / 2 * k2), k4 = rhs(y + h * k3);
      State z = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!p.periodic() && (z[0] <= 0 || z[0] >= L)) throw DomainError("geodesic ball reaches the end of the profile");
      double f = 2 * pi * wf(z[0]) * std::sin(z[1]) * z[3];
      // stop at the cut locus (meets its mirror at theta = pi) or a conjugate point
      if (z[1] >= pi || z[3] <= 0) {
        double frac = z[1] >= pi ? (pi - y[1]) / (z[1] - y[1]) : y[3] / (y[3] - z[3]);
        acc += 0.5 * frac * h * prev;
        break;
      }
      acc += 0.5 * h * (prev + f);
      prev = f;
      y = z;
    }
    vol += acc * pi / rays;
  }
  return vol;
}

KappaReport kappa_noncollapse(const FlowHistory& h, SpacetimePoint x, double r) {
  if (x.snapshot < 0 || x.snapshot >= static_cast<int>(h.size())) throw DomainError("point outside the history");
  const auto& p = h.snapshots[x.snapshot];
  KappaReport rep;
  rep.ball_volume = geodesic_ball_volume(p, x.s, r);
  rep.volume_ratio = rep.ball_volume / (r * r * r);
  bool have_labels = h.material.size() == h.size() && h.material[0].size() >= 2;
  double q = have_labels ? material_coordinate(h.material[x.snapshot], x.s, p.periodic(), warped_curvatures(p).length) : 0;
  double t = h.times[x.snapshot], bound = 1 / (r * r);
  rep.normalized_curvature_ok = true;
  for (int k = x.snapshot; k >= 0 && h.times[k] >= t - r * r; --k) {
    const auto& pk = h.snapshots[k];
    auto c = warped_curvatures(pk);
    double sk = have_labels ? material_sigma(h.material[k], q, pk.periodic(), c.length) : x.s;
    Eigen::VectorXd rn = c.riem_norm();
    for (int i = 0; i < pk.n(); ++i)
      if (min_image(c.s[i] - sk, pk.periodic(), c.length) <= r && rn[i] > bound) rep.normalized_curvature_ok = false;
  }
  return rep;
}

FlowHistory flat_history(int nodes, double radius, int labels, const std::vector<double>& times) {
  if (nodes < 8 || labels < 2 || !(radius > 0)) throw ParameterError("flat_history needs nodes >= 8, labels >= 2, radius > 0");
  WarpedProfile p;
  p.w = Eigen::VectorXd::LinSpaced(nodes, 0, radius);
  p.phi = Eigen::VectorXd::Constant(nodes, radius);
  p.left = EndMode::pole;
  p.right = EndMode::frozen;
  Eigen::VectorXd lab = Eigen::VectorXd::LinSpaced(labels, 0, radius);
  FlowHistory h;
  for (double t : times) {
    if (!h.times.empty() && !(t > h.times.back())) throw ParameterError("times must increase");
    p.t = t;
    h.times.push_back(t);
    h.snapshots.push_back(p);
    h.material.push_back(lab);
  }
  return h;
}

}  // namespace ricci
