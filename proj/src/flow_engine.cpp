#include "ricci/flow_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ricci {

void StepControl::validate() const {
  if (!(cfl_fraction > 0 && cfl_fraction < 1)) throw ParameterError("cfl_fraction must lie in (0,1)");
  if (max_R_threshold < 0) throw ParameterError("max_R_threshold must be positive");
  if (regrid_interval < 0) throw ParameterError("regrid_interval must be >= 0");
  if (!(curvature_dt > 0)) throw ParameterError("curvature_dt must be positive");
  if (monitor_beta < 0) throw ParameterError("monitor_beta must be >= 0");
  if (!(regrid_tolerance > 1)) throw ParameterError("regrid_tolerance must exceed 1");
  if (!(snapshot_dt > 0)) throw ParameterError("snapshot_dt must be positive");
  if (!(snapshot_growth > 1)) throw ParameterError("snapshot_growth must exceed 1");
  if (!(extinct_fraction > 0 && extinct_fraction < 1)) throw ParameterError("extinct_fraction must lie in (0,1)");
  if (material_labels < 0 || material_labels == 1) throw ParameterError("material_labels must be 0 or at least 2");
  if (max_steps <= 0) throw ParameterError("max_steps must be positive");
}

std::string to_string(TerminalKind k) {
  switch (k) {
    case TerminalKind::running: return "running";
    case TerminalKind::singular: return "singular";
    case TerminalKind::extinct: return "extinct";
  }
  return "running";
}

namespace {

bool is_pole(const WarpedProfile& p, int i) {
  return (i == 0 && p.left == EndMode::pole) || (i == p.n() - 1 && p.right == EndMode::pole);
}

double min_ds(const WarpedProfile& p) {
  double h = p.h(), m = std::numeric_limits<double>::infinity();
  int lo = p.left == EndMode::pole ? 1 : 0, hi = p.right == EndMode::pole ? p.n() - 2 : p.n() - 1;
  for (int i = lo; i <= hi; ++i) m = std::min(m, p.phi[i] * h);
  return m;
}

void apply_pins(WarpedProfile& p) {
  if (p.left == EndMode::pinned) p.w[0] = std::sqrt(std::max(p.pin_left - 2 * p.t, 0.0));
  if (p.right == EndMode::pinned) p.w[p.n() - 1] = std::sqrt(std::max(p.pin_right - 2 * p.t, 0.0));
  // Smooth poles need w_x = phi exactly; the cone mode is otherwise unstable, so
  // node 1 is slaved to the fourth-order one-sided slope condition.
  int n = p.n();
  double h = p.h();
  if (p.left == EndMode::pole) {
    p.w[0] = 0;
    p.w[1] = (12 * h * p.phi[0] + 2 * p.w[2]) / 16;
  }
  if (p.right == EndMode::pole) {
    p.w[n - 1] = 0;
    p.w[n - 2] = (12 * h * p.phi[n - 1] + 2 * p.w[n - 3]) / 16;
  }
}

// Material drift at arbitrary arclength, from node values of the tangential velocity.
double drift_at(const ProfileInterpolant& ip, const FlowDerivative& d, double s) {
  double L = ip.length();
  double v = ip.eval_parity(d.tangential, s, true, true);
  double Lp = d.dlog_length * L;
  return Lp * s / L - v;
}

struct Stage {
  WarpedProfile p;
  Eigen::VectorXd labels;
};

Stage euler(const WarpedProfile& p, const Eigen::VectorXd& labels, const FlowDerivative& d, double dt) {
  Stage out{p, labels};
  out.p.w += dt * d.dw;
  out.p.phi *= std::exp(dt * d.dlog_length);
  out.p.t = p.t + dt;
  apply_pins(out.p);
  if (labels.size() > 0) {
    ProfileInterpolant ip(p);
    for (int k = 0; k < labels.size(); ++k) out.labels[k] += dt * drift_at(ip, d, labels[k]);
  }
  return out;
}

Stage rk2(const WarpedProfile& p, const Eigen::VectorXd& labels, const FlowDerivative& d1, double dt) {
  Stage s1 = euler(p, labels, d1, dt);
  s1.p.validate();
  FlowDerivative d2 = flow_derivative(s1.p);
  Stage out{p, labels};
  out.p.w += 0.5 * dt * (d1.dw + d2.dw);
  out.p.phi *= std::exp(0.5 * dt * (d1.dlog_length + d2.dlog_length));
  out.p.t = p.t + dt;
  apply_pins(out.p);
  if (labels.size() > 0) {
    ProfileInterpolant ip1(p), ip2(s1.p);
    for (int k = 0; k < labels.size(); ++k)
      out.labels[k] += 0.5 * dt * (drift_at(ip1, d1, labels[k]) + drift_at(ip2, d2, s1.labels[k]));
  }
  return out;
}

double lagrange4(const double* xs, const double* ys, double x) {
  double out = 0;
  for (int a = 0; a < 4; ++a) {
    double l = 1;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (x - xs[b]) / (xs[a] - xs[b]);
    out += l * ys[a];
  }
  return out;
}

// Smoothed regrid monitor per node.
Eigen::VectorXd monitor_values(const WarpedProfile& p, const WarpedCurvatures& c, double beta) {
  int n = p.n();
  double L = c.length;
  Eigen::VectorXd m(n);
  double r0 = 1.0 / (L * L);
  for (int i = 0; i < n; ++i) m[i] = 1 + beta * L * std::pow(c.R[i] * c.R[i] + r0 * r0, 0.25);
  // Held flat next to poles: -w_ss/w amplifies any roughness of phi there.
  int q = std::clamp(n / 32, 8, 32);
  if (p.left == EndMode::pole)
    for (int i = 0; i < q; ++i) m[i] = m[q];
  if (p.right == EndMode::pole)
    for (int i = n - q; i < n; ++i) m[i] = m[n - 1 - q];
  for (int pass = 0; pass < 16; ++pass) {
    auto mp = detail::pad_field(p, m, false);
    for (int i = 0; i < n; ++i) m[i] = 0.25 * (mp[i + 1] + 2 * mp[i + 2] + mp[i + 3]);
  }
  return m;
}

double grid_spread(const WarpedProfile& p, const WarpedCurvatures& c, double beta) {
  Eigen::VectorXd m = monitor_values(p, c, beta);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  int lo_i = p.left == EndMode::pole ? 1 : 0, hi_i = p.right == EndMode::pole ? p.n() - 2 : p.n() - 1;
  for (int i = lo_i; i <= hi_i; ++i) {
    double mass = m[i] * p.phi[i];
    lo = std::min(lo, mass);
    hi = std::max(hi, mass);
  }
  return hi / lo;
}

}  // namespace

FlowDerivative flow_derivative(const WarpedProfile& p) {
  FlowDerivative d;
  d.curv = warped_curvatures(p);
  const auto& c = d.curv;
  int n = p.n();
  auto pd = detail::pad(p);
  // d_t ds = -2 k_mix ds for material points
  Eigen::VectorXd f = (-2 * c.k_mix.array() * pd.phi.segment(2, n).array()).matrix();
  auto fp = detail::pad_field(p, f, false);
  Eigen::VectorXd D = detail::cumulative(fp, n, p.periodic() ? n + 1 : n, pd.h);
  double Lp = D[D.size() - 1];
  double L = c.length;
  d.dlog_length = Lp / L;
  d.drift = D.head(n);
  d.tangential = (Lp / L) * c.s - d.drift;
  d.dw.resize(n);
  for (int i = 0; i < n; ++i) {
    if (is_pole(p, i)) {
      d.dw[i] = 0;
      continue;
    }
    d.dw[i] = c.wss[i] - c.k_sph[i] * p.w[i] + c.ws[i] * d.tangential[i];
  }
  if (p.left == EndMode::pinned) d.dw[0] = -1 / p.w[0];
  if (p.right == EndMode::pinned) d.dw[n - 1] = -1 / p.w[n - 1];
  return d;
}

double stable_dt(const WarpedProfile& p, const StepControl& c, const WarpedCurvatures& curv) {
  double ds = min_ds(p);
  double dt = c.cfl_fraction * ds * ds;
  double rmax = curv.R.cwiseAbs().maxCoeff();
  if (rmax > 0) dt = std::min(dt, c.curvature_dt / rmax);
  return dt;
}

WarpedProfile step(const WarpedProfile& p, double dt, const StepControl& c) {
  c.validate();
  if (!(dt > 0)) throw ParameterError("dt must be positive");
  double ds = min_ds(p);
  if (dt > c.cfl_fraction * ds * ds * (1 + 1e-12))
    throw ParameterError("dt violates the CFL bound cfl_fraction * ds^2");
  FlowDerivative d = flow_derivative(p);
  Stage out = rk2(p, Eigen::VectorXd(), d, dt);
  if (!out.p.w.allFinite() || !out.p.phi.allFinite()) throw DivergenceError("non-finite state after step");
  return out.p;
}

WarpedProfile regrid(const WarpedProfile& p, double beta) { return resample(p, p.n(), beta); }

WarpedProfile resample(const WarpedProfile& p, int n_out, double beta) {
  if (n_out < 8) throw ParameterError("resample needs at least 8 nodes");
  auto c = warped_curvatures(p);
  int n = p.n();
  double h = p.h();
  Eigen::VectorXd m = monitor_values(p, c, beta);
  auto pd = detail::pad(p);
  Eigen::VectorXd phi = pd.phi.segment(2, n);
  int count = p.periodic() ? n + 1 : n;
  Eigen::VectorXd M;
  double Mtot = 0;
  auto mass = [&] {
    Eigen::VectorXd dens = m.cwiseProduct(phi);  // monitor mass per unit x
    M = detail::cumulative(detail::pad_field(p, dens, false), n, count, h);
    Mtot = M[count - 1];
  };
  // Downsampling: blur over about one output cell so the monitor has no features finer than the output grid.
  if (int W = static_cast<int>(1.5 * n / n_out) - 1; W > 0) {
    W = std::min(W, n / 4);
    for (int pass = 0; pass < 3; ++pass) {
      Eigen::VectorXd pre(n + 2 * W + 1);
      pre[0] = 0;
      for (int k = -W; k < n + W; ++k) {
        int i = k;
        if (p.periodic()) i = ((k % n) + n) % n;
        else if (i < 0) i = -i;
        else if (i > n - 1) i = 2 * (n - 1) - i;
        pre[k + W + 1] = pre[k + W] + m[i];
      }
      for (int i = 0; i < n; ++i) m[i] = (pre[i + 2 * W + 1] - pre[i]) / (2 * W + 1);
    }
  }
  mass();
  // Grading limit: output spacing Mtot / (n_out m) may change by at most kGrade per output cell,
  // i.e. 1/m is Lipschitz in arclength with constant kGrade n_out / Mtot. Matters when n >> n_out.
  constexpr double kGrade = 0.1;
  for (int it = 0; it < 8; ++it) {
    double K = kGrade * n_out / Mtot;
    Eigen::VectorXd g = m.cwiseInverse();
    int sweeps = p.periodic() ? 2 : 1;
    auto gap = [&](int i, int j) {
      double d = std::abs(c.s[j] - c.s[i]);
      return p.periodic() ? std::min(d, c.length - d) : d;
    };
    bool changed = false;
    for (int sw = 0; sw < sweeps; ++sw) {
      for (int k = 1; k < n + (p.periodic() ? 1 : 0); ++k) {
        int i = k % n, j = k - 1;
        double lim = g[j] + K * gap(i, j);
        if (g[i] > lim) g[i] = lim, changed = true;
      }
      for (int k = n - 2 + (p.periodic() ? 1 : 0); k >= 0; --k) {
        int i = k, j = (k + 1) % n;
        double lim = g[j] + K * gap(i, j);
        if (g[i] > lim) g[i] = lim, changed = true;
      }
    }
    if (!changed) break;
    m = g.cwiseInverse();
    mass();
  }
  int last = count - 1;  // index of the right end in M (node n when periodic)

  // extended (x, M) and (x, s) with two ghosts on each side
  auto ext = [&](const Eigen::VectorXd& A, double Atot, int k) {
    if (p.periodic()) {
      int mk = ((k % n) + n) % n;
      return A[mk] + ((k - mk) / n) * Atot;
    }
    if (k < 0) return -A[-k];
    if (k > last) return 2 * Atot - A[2 * last - k];
    return A[k];
  };
  Eigen::VectorXd S = detail::cumulative(pd.phi, n, count, h);
  double Ltot = S[count - 1];

  WarpedProfile q = p;
  q.w.resize(n_out);
  q.phi.resize(n_out);
  int count_out = p.periodic() ? n_out + 1 : n_out;
  ProfileInterpolant ip(p);
  Eigen::VectorXd placed(n_out);
  for (int j = 0; j < n_out; ++j) {
    double target = Mtot * j / (count_out - 1);
    // locate cell k with M_k <= target < M_{k+1}
    int k = static_cast<int>(std::upper_bound(M.data(), M.data() + count, target) - M.data()) - 1;
    k = std::clamp(k, 0, count - 2);
    double ms[4], xs[4], ss[4];
    for (int a = 0; a < 4; ++a) {
      int kk = k - 1 + a;
      ms[a] = ext(M, Mtot, kk);
      xs[a] = kk * h;
      ss[a] = ext(S, Ltot, kk);
    }
    double xstar = lagrange4(ms, xs, target);
    double sstar = lagrange4(xs, ss, xstar);
    q.w[j] = ip.w(sstar);
    placed[j] = sstar;
  }
  // phi from the placed positions, so that the grid reproduces them whatever the monitor's smoothness
  double ho = q.h();
  int last_out = count_out - 1;
  auto at = [&](int k) {
    if (p.periodic()) {
      int mk = ((k % n_out) + n_out) % n_out;
      return placed[mk] + ((k - mk) / n_out) * Ltot;
    }
    if (k < 0) return -placed[-k];
    if (k > last_out) return 2 * Ltot - placed[2 * last_out - k];
    return placed[k];
  };
  for (int j = 0; j < n_out; ++j)
    q.phi[j] = (-at(j + 2) + 8 * at(j + 1) - 8 * at(j - 1) + at(j - 2)) / (12 * ho);
  apply_pins(q);
  return q;
}

RunnerState start_run(const WarpedProfile& p, const StepControl& c) {
  int label_count = c.material_labels;
  c.validate();
  p.validate();
  RunnerState st;
  st.current = p;
  auto curv = warped_curvatures(p);
  st.history.threshold =
      c.max_R_threshold > 0 ? c.max_R_threshold : 1e4 * std::max(curv.R.cwiseAbs().maxCoeff(), 1e-12);
  if (label_count <= 0) {
    st.labels = curv.s;
  } else {
    st.labels.resize(label_count);
    double L = curv.length;
    int denom = p.periodic() ? label_count : label_count - 1;
    for (int k = 0; k < label_count; ++k) st.labels[k] = L * k / std::max(denom, 1);
  }
  st.history.times.push_back(p.t);
  st.history.snapshots.push_back(p);
  st.history.material.push_back(st.labels);
  st.next_snapshot = p.t + c.snapshot_dt;
  st.last_snapshot_R = curv.R.maxCoeff();
  return st;
}

namespace {

void record(RunnerState& st, double rmax) {
  auto& h = st.history;
  if (!h.times.empty() && h.times.back() == st.current.t) return;
  h.times.push_back(st.current.t);
  h.snapshots.push_back(st.current);
  h.material.push_back(st.labels);
  st.last_snapshot_R = rmax;
}

void finish(RunnerState& st, const StepControl& c, const WarpedCurvatures& curv) {
  int n = st.current.n();
  Eigen::Index imax;
  double rmax = curv.R.maxCoeff(&imax);
  double rmin = curv.R.minCoeff();
  auto& s = st.history.status;
  s.node = static_cast<int>(imax);
  s.s = curv.s[imax];
  s.x = st.current.x(static_cast<int>(imax));
  s.R = rmax;
  if (rmin >= c.extinct_fraction * rmax) {
    s.kind = TerminalKind::extinct;
    // remaining time of a round sphere (R = 3/(2(T-t))) or a cylinder (R = 1/(T-t))
    double rem = st.current.topology() == Topology::closed_sphere ? 1.5 / rmax : 1.0 / rmax;
    s.time = st.current.t + rem;
  } else {
    s.kind = TerminalKind::singular;
    s.time = st.current.t;
  }
  (void)n;
  record(st, rmax);
}

}  // namespace

bool advance(RunnerState& st, const StepControl& c, double t_end, long step_budget) {
  c.validate();
  auto& hist = st.history;
  if (hist.status.kind != TerminalKind::running) return true;
  long taken = 0;
  while (true) {
    FlowDerivative d;
    try {
      d = flow_derivative(st.current);
    } catch (const PinchedProfileError&) {
      auto curv_prev = warped_curvatures(hist.snapshots.back());
      finish(st, c, curv_prev);
      return true;
    }
    double rmax = d.curv.R.maxCoeff();
    if (rmax >= hist.threshold) {
      finish(st, c, d.curv);
      return true;
    }
    if (st.current.t >= t_end - 1e-15 || hist.steps >= c.max_steps) {
      record(st, rmax);
      return true;
    }
    if (step_budget >= 0 && taken >= step_budget) return false;

    double dt = stable_dt(st.current, c, d.curv);
    double vmax = d.tangential.cwiseAbs().maxCoeff();
    if (vmax > 0) dt = std::min(dt, 0.5 * min_ds(st.current) / vmax);
    dt = std::min(dt, t_end - st.current.t);
    Stage next;
    try {
      next = rk2(st.current, st.labels, d, dt);
      next.p.validate();
    } catch (const PinchedProfileError&) {
      finish(st, c, d.curv);
      return true;
    } catch (const DivergenceError&) {
      record(st, rmax);
      throw DivergenceError("non-finite state at t = " + std::to_string(st.current.t));
    }
    if (!next.p.w.allFinite() || !next.p.phi.allFinite() || !next.labels.allFinite()) {
      record(st, rmax);
      throw DivergenceError("non-finite state at t = " + std::to_string(st.current.t));
    }
    st.current = std::move(next.p);
    st.labels = std::move(next.labels);
    ++hist.steps;
    ++taken;

    if (c.regrid_interval > 0 && hist.steps % c.regrid_interval == 0) {
      auto curv = warped_curvatures(st.current);
      if (grid_spread(st.current, curv, c.monitor_beta) > c.regrid_tolerance)
        st.current = regrid(st.current, c.monitor_beta);
    }
    double r_now = d.curv.R.maxCoeff();
    if (st.current.t >= st.next_snapshot - 1e-15 || r_now > c.snapshot_growth * std::max(st.last_snapshot_R, 1e-300)) {
      auto curv = warped_curvatures(st.current);
      record(st, curv.R.maxCoeff());
      while (st.next_snapshot <= st.current.t + 1e-15) st.next_snapshot += c.snapshot_dt;
    }
  }
}

FlowHistory run(const WarpedProfile& p, const StepControl& c, double t_end) {
  if (!(t_end > p.t)) throw ParameterError("t_end must exceed the current time");
  RunnerState st = start_run(p, c);
  advance(st, c, t_end);
  return std::move(st.history);
}

FlowHistory sample_flow(const WarpedProfile& p, StepControl c, const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] > (i ? times[i - 1] : p.t))) throw ParameterError("sample times must increase past the start time");
  c.snapshot_dt = std::numeric_limits<double>::max();
  c.snapshot_growth = std::numeric_limits<double>::max();
  RunnerState st = start_run(p, c);
  for (double t : times)
    if (advance(st, c, t) && st.history.status.kind != TerminalKind::running) break;
  return std::move(st.history);
}

FlowHistory rescale(const FlowHistory& h, double lambda) {
  if (!(lambda > 0)) throw ParameterError("rescale factor must be positive");
  FlowHistory out = h;
  double l2 = lambda * lambda;
  for (auto& t : out.times) t *= l2;
  for (auto& s : out.snapshots) s = rescale(s, lambda);
  for (auto& m : out.material) m *= lambda;
  out.threshold /= l2;
  out.status.time *= l2;
  out.status.s *= lambda;
  out.status.R /= l2;
  return out;
}

}  // namespace ricci
