#include "ricci/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "ricci/deturck.hpp"
#include "ricci/embedding.hpp"
#include "ricci/io.hpp"
#include "ricci/monitors.hpp"
#include "ricci/presets.hpp"
#include "ricci/reduced_geometry.hpp"
#include "ricci/soliton.hpp"
#include "ricci/surgery.hpp"

namespace ricci {

namespace {

constexpr double pi = std::numbers::pi;

struct Run {
  CriterionResult& r;
  void metric(const std::string& name, double v) { r.metrics.emplace_back(name, v); }
  void require(bool ok, const std::string& what) {
    if (!ok) r.failures.push_back(what);
  }
};

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

// Smallest observed order over consecutive pairs.
double observed_order(const std::vector<double>& spacing, const std::vector<double>& err) {
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < err.size(); ++i)
    order = std::min(order, std::log(err[i] / err[i + 1]) / std::log(spacing[i] / spacing[i + 1]));
  return err.size() < 2 ? std::numeric_limits<double>::quiet_NaN() : order;
}

StepControl desk_control() {
  StepControl c;
  c.cfl_fraction = 0.3;
  return c;
}

// 1: round sphere extinction and the saturated inequalities.
void round_sphere_check(Run& run, const std::vector<int>&) {
  auto h = ricci::run(round_sphere(512), desk_control(), 1.0);
  run.require(h.status.kind == TerminalKind::extinct, "run did not end extinct");
  double rel = std::abs(h.status.time - 0.25) / 0.25;
  run.metric("extinction_time", h.status.time);
  run.require(rel <= 0.01, "extinction time off by " + fmt(rel));
  auto tr = compute_trace(h);
  auto vr = check_rmin_ode(tr, 1e-3);
  auto vw = check_w2_ode(tr, 1e-3);
  double sr = std::max(std::abs(vr.min_gap), std::abs(vr.max_gap));
  double sw = std::max(std::abs(vw.min_gap), std::abs(vw.max_gap));
  run.metric("rmin_saturation", sr);
  run.metric("w2_saturation", sw);
  run.require(vr.pass, "R_min inequality violated");
  run.require(vw.pass, "W2 inequality violated");
  run.require(sr <= 1e-3, "R_min inequality not saturated: " + fmt(sr));
  run.require(sw <= 1e-3, "W2 inequality not saturated: " + fmt(sw));
  run.require(!vw.intervals.empty(), "no W2 intervals evaluated");
}

// 2: shrinking cylinder and the Harnack expression.
void cylinder_check(Run& run, const std::vector<int>&) {
  auto h = ricci::run(cylinder_segment(512), desk_control(), 0.4);
  auto tr = compute_trace(h);
  double err = 0, harnack = std::numeric_limits<double>::infinity();
  for (const auto& r : tr.records) {
    double exact = 2 / (1 - 2 * r.t);
    err = std::max({err, std::abs(r.r_max / exact - 1), std::abs(r.r_min / exact - 1)});
    if (r.t > 0 && std::isfinite(r.harnack)) harnack = std::min(harnack, r.harnack / (r.r_max * r.r_max));
  }
  run.metric("max_relative_error", err);
  run.metric("min_harnack_over_R2", harnack);
  run.require(tr.records.back().t >= 0.4 - 1e-12, "run stopped before t = 0.4");
  run.require(err <= 5e-3, "R(t) off the exact law by " + fmt(err));
  run.require(harnack >= -1e-3, "Harnack deficit " + fmt(harnack) + " R^2");
}

// 3: soliton residuals.
void soliton_check(Run& run, const std::vector<int>& res) {
  GridMetric3d flat({9, 9, 9}, {0.25, 0.25, 0.25}, {false, false, false});
  std::vector<double> f(flat.g.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = flat.coord(i).squaredNorm() / 4;
  double gauss = soliton_residual(flat, f, SolitonMode::shrinking).sup;
  run.metric("gaussian_residual", gauss);
  run.require(gauss <= 1e-12, "Gaussian shrinker residual " + fmt(gauss));

  std::vector<int> ns;
  for (int n : res.empty() ? std::vector<int>{64, 128, 256, 512} : res) ns.push_back(n / 4 + 1);
  std::vector<double> hs, sups;
  const double half = 2;
  for (int n : ns) {
    double h = 2 * half / (n - 1);
    GridMetric2d m({n, n}, {h, h}, {false, false});
    std::vector<double> pot(m.g.size());
    for (std::size_t i = 0; i < m.g.size(); ++i) {
      auto x = m.coord(i);
      double q = 1 + (x[0] - half) * (x[0] - half) + (x[1] - half) * (x[1] - half);
      m.g[i] = Eigen::Matrix2d::Identity() / q;
      pot[i] = -std::log(q);
    }
    hs.push_back(h);
    sups.push_back(soliton_residual(m, pot, SolitonMode::steady).sup);
    run.metric("cigar_sup_n" + std::to_string(n), sups.back());
  }
  for (std::size_t i = 0; i + 1 < sups.size(); ++i) run.require(sups[i + 1] < sups[i], "cigar residual not decreasing");
  run.r.order = observed_order(hs, sups);
  run.require(run.r.order >= 1.8, "cigar residual order " + fmt(run.r.order));
}

// 4: warped formulas against the chart on the embedded metric.
void cross_backend_check(Run& run, const std::vector<int>& res) {
  std::vector<int> ns = res.empty() ? std::vector<int>{128, 256, 512} : res;
  std::vector<double> hs, e6;
  for (const std::string name : {"round-sphere", "dumbbell"}) {
    for (int n0 : ns) {
      int n = n0 + 1;
      auto p = warped_preset(name, n), q = warped_preset(name, 2 * n - 1);
      int a = n / 8, b = n - 1 - n / 8;
      auto Rc = chart_scalar_on_axis(embed_warped(p, a, b));
      auto Rc2 = chart_scalar_on_axis(embed_warped(q, 2 * a, 2 * b));
      auto Rw = warped_curvatures(p).R, Rw2 = warped_curvatures(q).R;
      double diff = 0, ec = 0, ew = 0, err6 = 0;
      for (int i = 1; i < b - a; ++i) {
        diff = std::max(diff, std::abs(Rw[a + i] - Rc[i]));
        ec = std::max(ec, std::abs(Rc[i] - Rc2[2 * i]) * 4 / 3);
        ew = std::max(ew, std::abs(Rw[a + i] - Rw2[2 * (a + i)]));
        err6 = std::max(err6, std::abs(Rc[i] - 6));
      }
      double ratio = diff / std::max({ec, ew, 1e-300});
      run.metric(name + "_ratio_n" + std::to_string(n), ratio);
      run.require(ratio <= 5, name + " at " + std::to_string(n) + " nodes: difference " + fmt(ratio) +
                                  " x the discretization error");
      if (name == "round-sphere") {
        hs.push_back(p.h());
        e6.push_back(err6);
        run.metric("sphere_R_error_n" + std::to_string(n), err6);
      }
    }
  }
  run.r.order = observed_order(hs, e6);
  run.require(run.r.order >= 1.8, "round S3 curvature order " + fmt(run.r.order));
}

// 5: parabolic scaling.
void scaling_check(Run& run, const std::vector<int>&) {
  auto p = dumbbell(257);
  auto cp = warped_curvatures(p);
  double v0 = profile_volume(p), w0 = w2(p);

  GridMetric3d m({12, 12, 7}, {1.0 / 12, 1.0 / 12, 1.0 / 7}, {true, true, true});
  for (std::size_t n = 0; n < m.g.size(); ++n) {
    auto x = m.coord(n);
    m.g[n](0, 0) += 0.2 * std::sin(2 * pi * x[1]);
    m.g[n](1, 2) = m.g[n](2, 1) = 0.1 * std::cos(2 * pi * (x[0] + x[2]));
  }
  auto cf = curvature(m);
  double mv = total_volume(m);

  std::vector<double> ts;
  double t0 = 0.2, tmax = 0.99 * t0;
  for (int k = 0; k < 8; ++k) ts.push_back(t0 - tmax * std::pow(1.5, -2 * k));
  ts.push_back(t0);
  auto h = sample_flow(round_sphere(64), desk_control(), ts);
  double s0 = 0.3 * warped_curvatures(h.snapshots.back()).length;
  ReducedLengthOptions o;
  o.refine = 2;
  SpacetimePoint base{static_cast<int>(h.size()) - 1, s0};
  auto g1 = reduced_length_field(h, base, o);
  auto rv1 = reduced_volume_report(h, base, o);

  double worst = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  for (double lam : {0.5, 2.0, 10.0}) {
    double e = 0;
    auto q = rescale(p, lam);
    auto cq = warped_curvatures(q);
    for (int i = 0; i < p.n(); ++i) e = std::max(e, rel(cq.R[i], cp.R[i] / (lam * lam)));
    e = std::max({e, rel(profile_volume(q), v0 * lam * lam * lam), rel(w2(q), w0 * lam * lam)});

    auto ms = rescale(m, lam);
    auto cs = curvature(ms);
    double gscale = 0;
    for (std::size_t n = 0; n < m.g.size(); ++n)
      for (int a = 0; a < 3; ++a) gscale = std::max(gscale, cf.christoffel[n][a].cwiseAbs().maxCoeff());
    for (std::size_t n = 0; n < m.g.size(); ++n) {
      for (int a = 0; a < 3; ++a)
        e = std::max(e, (cs.christoffel[n][a] - cf.christoffel[n][a]).cwiseAbs().maxCoeff() / gscale);
      e = std::max(e, rel(cs.scalar[n], cf.scalar[n] / (lam * lam)));
    }
    e = std::max(e, rel(total_volume(ms), mv * lam * lam * lam));

    auto hs = rescale(h, lam);
    SpacetimePoint bs{base.snapshot, s0 * lam};
    auto g2 = reduced_length_field(hs, bs, o);
    for (std::size_t k = 1; k < g1.l.size(); ++k)
      for (Eigen::Index a = 0; a < g1.l[k].size(); ++a)
        if (std::isfinite(g1.l[k][a])) e = std::max(e, std::abs(g2.l[k][a] - g1.l[k][a]) / std::max(1.0, g1.l[k][a]));
    auto rv2 = reduced_volume_report(hs, bs, o);
    for (std::size_t k = 0; k < rv1.values.size(); ++k) e = std::max(e, rel(rv2.values[k], rv1.values[k]));

    run.metric("lambda_" + fmt(lam) + "_max_relative_error", e);
    worst = std::max(worst, e);
  }
  run.require(worst <= 1e-8, "scaling laws broken by " + fmt(worst));
}

// 6: reduced volume.
void reduced_volume_check(Run& run, const std::vector<int>&) {
  // flat calibration with refinement
  std::vector<double> flat_err;
  for (int labels : {33, 65, 129}) {
    std::vector<double> ts;
    const int K = 9;
    for (int k = 0; k < K; ++k) {
      double sg = std::sqrt(0.25) * (K - 1 - k) / (K - 1);
      ts.push_back(1.0 - sg * sg);
    }
    auto h = flat_history(257, 8.0, labels, ts);
    ReducedLengthOptions o;
    o.refine = 2;
    ReducedLattice lat(h, {K - 1, 0.0}, o);
    auto lad = reduced_volume_ladder(lat, reduced_length_field(lat));
    double e = 0;
    for (double v : lad) e = std::max(e, std::abs(v - 1));
    flat_err.push_back(e);
    run.metric("flat_error_labels" + std::to_string(labels), e);
  }
  run.require(flat_err.front() <= 1e-2 && flat_err.back() <= 1e-2, "flat calibration off by more than 1e-2");
  run.require(flat_err.back() <= flat_err.front(), "flat calibration does not improve with refinement");

  // monotonicity and the upper bound on the presets
  struct Case {
    std::string preset;
    int n;
    double t0;
    double s_frac;  // basepoint as a fraction of the length; < 0 puts it at argmax R
  };
  std::vector<Case> cases{{"round-sphere", 128, 0.2, 0.0},     {"round-sphere", 128, 0.2, 0.5},
                          {"cylinder-segment", 128, 0.3, 0.5}, {"dumbbell", 256, 0.019149 - 1e-3, 0.0},
                          {"dumbbell", 256, 0.019149 - 1e-3, -1}};
  double worst_inc = 0, worst_excess = -1;
  for (const auto& c : cases) {
    std::vector<double> ts;
    double tmax = 0.99 * c.t0;
    for (int k = 0; k < 12; ++k) ts.push_back(c.t0 - tmax * std::pow(1.5, -2 * k));
    ts.push_back(c.t0);
    auto sc = desk_control();
    sc.material_labels = 0;
    auto h = sample_flow(warped_preset(c.preset, c.n), sc, ts);
    auto cur = warped_curvatures(h.snapshots.back());
    double s = c.s_frac * cur.length;
    if (c.s_frac < 0) {
      Eigen::Index im;
      cur.R.maxCoeff(&im);
      s = cur.s[im];
    }
    ReducedLengthOptions o;
    o.refine = 2;
    auto rep = reduced_volume_report(h, {static_cast<int>(h.size()) - 1, s}, o);
    std::string tag = c.preset + (c.s_frac < 0 ? "@neck" : "@" + fmt(c.s_frac));
    run.require(rep.verdict.pass, "reduced volume increases on " + tag + " by " + fmt(rep.verdict.max_increase));
    worst_inc = std::max(worst_inc, rep.verdict.max_increase);
    for (std::size_t k = 0; k < rep.values.size(); ++k) {
      double tol = std::max(rep.errors[k], 1e-2);
      worst_excess = std::max(worst_excess, rep.values[k] - 1 - tol);
    }
  }
  run.metric("max_increase", worst_inc);
  run.metric("max_excess_over_one_plus_tol", worst_excess);
  run.require(worst_excess <= 0, "reduced volume exceeds 1 + tol");

  // constancy on the shrinking sphere, basepoint just before extinction
  {
    double gap = 1e-6, t0 = 0.25 - gap, tmax = 0.2;
    std::vector<double> ts;
    for (int k = 0; k < 20; ++k) ts.push_back(t0 - tmax * std::pow(1.5, -2 * k));
    ts.push_back(t0);
    auto sc = desk_control();
    sc.max_R_threshold = 1e12;
    auto h = sample_flow(round_sphere(128), sc, ts);
    ReducedLengthOptions o;
    o.refine = 2;
    ReducedLattice lat(h, {static_cast<int>(h.size()) - 1, 0.0}, o);
    auto g = reduced_length_field(lat);
    double lo = 1e300, hi = -1e300;
    for (int k = 1; k < lat.levels(); ++k) {
      if (lat.tau(k) < 1e4 * gap) continue;
      double v = reduced_volume(lat, g, k);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    run.metric("sphere_plateau", lo);
    run.metric("sphere_spread", hi - lo);
    run.require(hi >= lo && hi - lo <= 1e-2, "shrinking sphere reduced volume varies by " + fmt(hi - lo));
  }

  // dynamic programming against exhaustive enumeration
  {
    auto h = flat_history(33, 2.0, 6, {0.7, 0.8, 0.85, 0.9, 0.95, 1.0});
    ReducedLengthOptions o;
    o.refine = 1;
    o.theta_nodes = 3;
    o.subcell = false;
    o.base_spacing = -1;
    ReducedLattice lat(h, {5, 0.8}, o);
    auto g = reduced_length_field(lat);
    double diff = (g.L.back() - reduced_length_brute_force(lat)).cwiseAbs().maxCoeff();
    run.metric("dp_vs_brute_force", diff);
    run.metric("dp_sites", lat.sites());
    run.require(lat.sites() <= 18 && lat.levels() <= 6, "brute-force lattice too large");
    run.require(diff == 0, "dynamic programming differs from enumeration by " + fmt(diff));
  }
}

// 7: neckpinch, horns, surgery and the ledger.
void neckpinch_check(Run& run, const std::vector<int>&) {
  auto sc = desk_control();
  sc.monitor_beta = 1;
  auto h = ricci::run(dumbbell(512), sc, 1.0);
  run.require(h.status.kind == TerminalKind::singular, "dumbbell did not reach a singular time");
  auto cur = warped_curvatures(h.snapshots.back());
  double off = std::abs(h.status.s / cur.length - 0.5);
  run.metric("argmax_offset", off);
  run.require(off < 0.02, "argmax R is not at the neck");
  auto pr = pinching_at_label(h, blowup_label(h));
  double ratio = pr.back() / pr.front();
  run.metric("pinching_ratio_final_over_initial", ratio);
  run.require(ratio < 0.1, "pinching ratio only fell to " + fmt(ratio) + " of its initial value");

  auto res = run_with_surgery(dumbbell(512), sc, SurgeryParams{}, 10.0);
  run.metric("surgeries", res.ledger.surgery_count());
  run.metric("extinctions", res.extinctions);
  run.metric("h", res.h);
  run.require(res.ledger.surgery_count() == 1, "expected one surgery, got " + std::to_string(res.ledger.surgery_count()));
  for (const auto& e : res.ledger.events) {
    if (e.kind == SurgeryKind::removal) continue;
    double c = e.volume_removed / (e.h * e.h * e.h);
    run.metric("removed_over_h3", c);
    run.require(c >= kSurgeryVolumeConstant, "surgery removed only " + fmt(c) + " h^3");
  }
  for (const auto& b : res.books) {
    double close = b.volume_before - b.volume_after - b.volume_removed;
    run.metric("books_residual", close);
    run.metric("books_tolerance", b.volume_tolerance);
    run.require(std::abs(close) <= b.volume_tolerance, "volume books do not close");
  }
  run.require(res.extinctions == 2, "expected two extinctions, got " + std::to_string(res.extinctions));
  run.require(res.finished, "flow with surgery did not finish");
  auto topo = reconstruct_presurgery_topology(res.ledger, 0.0);
  run.require(topo.size() == 1 && topo[0].topology.is_sphere(), "ledger does not reconstruct S3");
  run.require(res.discreteness_ok, "surgery count exceeds the volume budget");
}

// 8: standard cap.
void standard_cap_check(Run& run, const std::vector<int>&) {
  auto cap = build_standard_cap(2, 1, 513);
  run.metric("min_sectional", cap.min_sectional);
  run.metric("min_R", cap.min_R);
  run.require(cap.min_sectional >= 0 && cap.min_R > 0, "curvature certificate fails");
  auto sc = desk_control();
  sc.monitor_beta = 1;
  auto rep = evolve_standard_cap(cap, sc);
  run.metric("far_field_error", rep.far_field_error);
  run.metric("inf_rmin_scaled", rep.inf_rmin_scaled);
  run.require(rep.history.times.back() >= 0.8 - 1e-12, "cap flow stopped before t = 0.8");
  run.require(rep.far_field_error <= 1e-2, "far field leaves the cylinder law by " + fmt(rep.far_field_error));
  run.require(rep.inf_rmin_scaled > 0, "inf R_min (1 - t) is not positive");
  run.require(std::abs(rep.inf_rmin_scaled - 1.0) <= 1e-3, "inf R_min (1 - t) moved off its pinned value 1");
}

// Lie derivative X^c d_c g_ab + g_cb d_a X^c + g_ac d_b X^c by periodic central differences.
double lie_identity_error(int N) {
  GridMetric3d m({N, N, 5}, {1.0 / N, 1.0 / N, 0.2}, {true, true, true});
  for (std::size_t n = 0; n < m.g.size(); ++n) {
    auto x = m.coord(n);
    double a = 2 * pi * x[0], b = 2 * pi * x[1];
    m.g[n](0, 0) += 0.1 * std::sin(a);
    m.g[n](1, 1) += 0.1 * std::cos(b);
    m.g[n](0, 1) = m.g[n](1, 0) = 0.05 * std::sin(a + b);
  }
  auto rhs = deturck_rhs(m);
  auto ric = ricci::ricci(m);
  auto X = gauge_vector(m);
  double err = 0, scale = 0;
  for (std::size_t n = 0; n < m.g.size(); ++n) {
    auto id = m.unravel(n);
    Eigen::Matrix3d dX;  // dX(a, c) = d_a X^c
    std::array<Eigen::Matrix3d, 3> dg;
    for (int a = 0; a < 3; ++a) {
      auto p = id, q = id;
      p[a] = (p[a] + 1) % m.dims[a];
      q[a] = (q[a] - 1 + m.dims[a]) % m.dims[a];
      dX.row(a) = ((X[m.ravel(p)] - X[m.ravel(q)]) / (2 * m.spacing[a])).transpose();
      dg[a] = (m.g[m.ravel(p)] - m.g[m.ravel(q)]) / (2 * m.spacing[a]);
    }
    Eigen::Matrix3d L = Eigen::Matrix3d::Zero();
    const auto& g = m.g[n];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) L(a, b) += X[n][c] * dg[c](a, b) + g(c, b) * dX(a, c) + g(a, c) * dX(b, c);
    err = std::max(err, (rhs[n] + 2 * ric[n] - L).cwiseAbs().maxCoeff());
    scale = std::max(scale, L.cwiseAbs().maxCoeff());
  }
  return err / scale;
}

// 9: gauge-fixed backend.
void deturck_check(Run& run, const std::vector<int>&) {
  GridMetric3d flat({8, 8, 8}, {0.125, 0.125, 0.125}, {true, true, true});
  double fixed = 0;
  for (const auto& t : deturck_rhs(flat)) fixed = std::max(fixed, t.cwiseAbs().maxCoeff());
  run.metric("flat_rhs", fixed);
  run.require(fixed == 0, "flat metric is not an exact fixed point");

  double k2 = 4 * pi * pi;
  for (int comp : {0, 1}) {
    auto m = flat_torus_perturbed({32, 6, 6}, 1e-3, 1, comp);
    auto tr = deturck_flow(m, 0.06, 0.2, 10);
    std::size_t a = tr.times.size() / 4, b = tr.times.size() - 1;
    double rate = -0.5 * std::log(tr.energy[b] / tr.energy[a]) / (tr.times[b] - tr.times[a]);
    run.metric("rate_over_k2_comp" + std::to_string(comp), rate / k2);
    run.require(std::abs(rate / k2 - 1) <= 0.1, "decay rate off the linearized rate by " + fmt(rate / k2 - 1));
    bool mono = std::is_sorted(tr.energy.rbegin(), tr.energy.rend());
    run.require(mono, "perturbation energy not monotone");
  }

  std::vector<double> hs{1.0 / 16, 1.0 / 32, 1.0 / 64}, errs;
  for (int N : {16, 32, 64}) errs.push_back(lie_identity_error(N));
  run.metric("lie_identity_error_n64", errs.back());
  double order = observed_order(hs, errs);
  run.metric("lie_identity_order", order);
  run.require(order >= 1.8 && errs.back() <= 1e-2, "rhs + 2 Ric is not the deformation tensor of X");
}

std::string trace_text(const FlowHistory& h) {
  auto tr = compute_trace(h);
  return io::trace_csv_header(tr) + io::trace_csv_rows(tr, 0);
}

// 10: determinism and checkpoint/resume.
void determinism_check(Run& run, const std::vector<int>&) {
  auto sc = desk_control();
  sc.monitor_beta = 1;
  auto p = dumbbell(256);
  auto h1 = ricci::run(p, sc, 1.0);
  auto h2 = ricci::run(p, sc, 1.0);
  std::string a = trace_text(h1), b = trace_text(h2);
  run.require(a == b, "traces differ across reruns");
  run.require(io::to_json(h1).dump() == io::to_json(h2).dump(), "histories differ across reruns");

  auto st = start_run(p, sc);
  advance(st, sc, 1.0, h1.steps / 2);
  io::Checkpoint cp{st, sc, 1.0, {}};
  auto back = io::checkpoint_from_json(io::Json::parse(io::to_json(cp).dump()));
  run.require(io::to_json(back).dump() == io::to_json(cp).dump(), "checkpoint does not round-trip");
  advance(back.state, back.control, back.t_end);
  run.require(trace_text(back.state.history) == a, "resumed trace differs from the uninterrupted one");
  run.metric("trace_rows", static_cast<double>(h1.size()));
  run.metric("steps", static_cast<double>(h1.steps));
}

using CheckFn = void (*)(Run&, const std::vector<int>&);

const std::vector<CheckFn>& checks() {
  static const std::vector<CheckFn> fns{round_sphere_check, cylinder_check,       soliton_check,
                                        cross_backend_check, scaling_check,       reduced_volume_check,
                                        neckpinch_check,    standard_cap_check,   deturck_check,
                                        determinism_check};
  return fns;
}

}  // namespace

const std::vector<CriterionInfo>& acceptance_criteria() {
  static const std::vector<CriterionInfo> list{
      {1, "round-sphere", "round sphere extinction, R_min and W2 saturation"},
      {2, "cylinder", "cylinder law and Harnack deficit"},
      {3, "solitons", "Gaussian shrinker and cigar residuals"},
      {4, "cross-backend", "warped vs chart curvature"},
      {5, "scaling", "parabolic scaling of R, Vol, W2, Gamma, l, V"},
      {6, "reduced-volume", "reduced volume calibration, monotonicity, DP exactness"},
      {7, "neckpinch", "neckpinch, horn surgery and ledger"},
      {8, "standard-cap", "standard cap certificate and evolution"},
      {9, "deturck", "gauge-fixed flow on the torus"},
      {10, "determinism", "bit-identical reruns and checkpoint/resume"}};
  return list;
}

CriterionResult run_criterion(int id, const std::vector<int>& resolutions) {
  const auto& list = acceptance_criteria();
  if (id < 1 || id > static_cast<int>(list.size())) throw ParameterError("no criterion " + std::to_string(id));
  CriterionResult r;
  r.info = list[id - 1];
  Run run{r};
  auto t0 = std::chrono::steady_clock::now();
  try {
    checks()[id - 1](run, resolutions);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = r.failures.empty() && r.error.empty();
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  const auto& list = acceptance_criteria();
  for (std::size_t i = 1; i < opt.resolutions.size(); ++i)
    if (opt.resolutions[i] <= opt.resolutions[i - 1]) throw ParameterError("resolutions must increase");
  for (int n : opt.resolutions)
    if (n < 16) throw ParameterError("resolutions must be at least 16");
  if (!opt.resolutions.empty() && opt.resolutions.size() < 2) throw ParameterError("a sweep needs two resolutions");
  std::vector<int> ids;
  for (const auto& c : list) {
    bool take = opt.only.empty();
    for (const auto& o : opt.only) take = take || o == c.slug || o == std::to_string(c.id);
    if (take) ids.push_back(c.id);
  }
  for (const auto& o : opt.only) {
    bool known = std::any_of(list.begin(), list.end(),
                             [&](const CriterionInfo& c) { return o == c.slug || o == std::to_string(c.id); });
    if (!known) throw ParameterError("unknown criterion '" + o + "'");
  }
  std::vector<CriterionResult> out;
  if (opt.parallel) {
    std::vector<std::future<CriterionResult>> fut;
    for (int id : ids) fut.push_back(std::async(std::launch::async, run_criterion, id, opt.resolutions));
    for (auto& f : fut) out.push_back(f.get());
  } else {
    for (int id : ids) out.push_back(run_criterion(id, opt.resolutions));
  }
  return out;
}

}  // namespace ricci
