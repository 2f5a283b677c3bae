#include "ricci/warped.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ricci {

std::string to_string(EndMode m) {
  switch (m) {
    case EndMode::pole: return "pole";
    case EndMode::frozen: return "frozen";
    case EndMode::pinned: return "pinned";
    case EndMode::periodic: return "periodic";
  }
  return "pole";
}

EndMode end_mode_from_string(const std::string& s) {
  if (s == "pole") return EndMode::pole;
  if (s == "frozen") return EndMode::frozen;
  if (s == "pinned") return EndMode::pinned;
  if (s == "periodic") return EndMode::periodic;
  throw ParameterError("unknown end mode '" + s + "'");
}

void WarpedProfile::validate() const {
  if (w.size() != phi.size()) throw ParameterError("phi and w sizes differ");
  if (n() < 8) throw ParameterError("warped profile needs at least 8 nodes");
  if ((left == EndMode::periodic) != (right == EndMode::periodic))
    throw ParameterError("periodic ends must be paired");
  if (!w.allFinite() || !phi.allFinite()) throw DivergenceError("non-finite profile values");
  for (int i = 0; i < n(); ++i)
    if (!(phi[i] > 0)) throw ParameterError("phi must be positive at node " + std::to_string(i));
  for (int i = 0; i < n(); ++i) {
    bool pole = (i == 0 && left == EndMode::pole) || (i == n() - 1 && right == EndMode::pole);
    if (!pole && !(w[i] > 0)) throw PinchedProfileError("w <= 0 at node " + std::to_string(i), i);
  }
}

namespace detail {

Eigen::VectorXd pad_field(const WarpedProfile& p, const Eigen::VectorXd& f, bool odd_at_poles) {
  int n = p.n();
  if (p.periodic()) {
    Eigen::VectorXd out(n + 5);
    for (int i = -2; i <= n + 2; ++i) out[i + 2] = f[((i % n) + n) % n];
    return out;
  }
  Eigen::VectorXd out(n + 4);
  out.segment(2, n) = f;
  double sl = (p.left == EndMode::pole && odd_at_poles) ? -1.0 : 1.0;
  double sr = (p.right == EndMode::pole && odd_at_poles) ? -1.0 : 1.0;
  for (int k = 1; k <= 2; ++k) {
    out[2 - k] = sl * f[k];
    out[n + 1 + k] = sr * f[n - 1 - k];
  }
  return out;
}

Padded pad(const WarpedProfile& p) {
  Padded out;
  out.n = p.n();
  out.h = p.h();
  Eigen::VectorXd phi = p.phi;
  int n = p.n();
  if (p.left == EndMode::pole) phi[0] = (16 * p.w[1] - 2 * p.w[2]) / (12 * out.h);
  if (p.right == EndMode::pole) phi[n - 1] = (16 * p.w[n - 2] - 2 * p.w[n - 3]) / (12 * out.h);
  out.w = pad_field(p, p.w, true);
  out.phi = pad_field(p, phi, false);
  return out;
}

double dx1(const Eigen::VectorXd& f, int j, double h) {
  return (f[j - 2] - 8 * f[j - 1] + 8 * f[j + 1] - f[j + 2]) / (12 * h);
}

double dx2(const Eigen::VectorXd& f, int j, double h) {
  return (-f[j - 2] + 16 * f[j - 1] - 30 * f[j] + 16 * f[j + 1] - f[j + 2]) / (12 * h * h);
}

Eigen::VectorXd cumulative(const Eigen::VectorXd& fpad, int n, int count, double h) {
  (void)n;
  Eigen::VectorXd out(count);
  out[0] = 0;
  for (int i = 0; i + 1 < count; ++i) {
    int j = i + 2;
    out[i + 1] = out[i] + h / 24 * (-fpad[j - 1] + 13 * fpad[j] + 13 * fpad[j + 1] - fpad[j + 2]);
  }
  return out;
}

}  // namespace detail

WarpedCurvatures warped_curvatures(const WarpedProfile& p) {
  p.validate();
  auto pd = detail::pad(p);
  int n = p.n();
  double h = pd.h;
  WarpedCurvatures c;
  c.ws.resize(n);
  c.wss.resize(n);
  c.k_sph.resize(n);
  c.k_mix.resize(n);
  const double* W = pd.w.data() + 2;
  const double* F = pd.phi.data() + 2;
  const double i12h = 1.0 / (12 * h), i12hh = 1.0 / (12 * h * h);
  for (int i = 0; i < n; ++i) {
    double inv_f = 1.0 / F[i];
    double wx = (W[i - 2] - 8 * W[i - 1] + 8 * W[i + 1] - W[i + 2]) * i12h;
    double wxx = (-W[i - 2] + 16 * (W[i - 1] + W[i + 1]) - 30 * W[i] - W[i + 2]) * i12hh;
    double fx = (F[i - 2] - 8 * F[i - 1] + 8 * F[i + 1] - F[i + 2]) * i12h;
    double ws = wx * inv_f;
    double wss = (wxx - ws * fx) * inv_f * inv_f;
    c.ws[i] = ws;
    c.wss[i] = wss;
    double wi = p.w[i];
    if (wi > 0) {
      double inv_w = 1.0 / wi;
      c.k_sph[i] = (1 - ws * ws) * inv_w * inv_w;
      c.k_mix[i] = -wss * inv_w;
    } else {
      c.k_sph[i] = c.k_mix[i] = 0;
    }
  }
  if (p.left == EndMode::pole) {
    c.k_sph[0] = detail::even_extrapolate(c.k_sph[1], c.k_sph[2], c.k_sph[3]);
    c.k_mix[0] = detail::even_extrapolate(c.k_mix[1], c.k_mix[2], c.k_mix[3]);
  }
  if (p.right == EndMode::pole) {
    c.k_sph[n - 1] = detail::even_extrapolate(c.k_sph[n - 2], c.k_sph[n - 3], c.k_sph[n - 4]);
    c.k_mix[n - 1] = detail::even_extrapolate(c.k_mix[n - 2], c.k_mix[n - 3], c.k_mix[n - 4]);
  }
  c.ric_ss = 2 * c.k_mix;
  c.ric_sph = c.k_mix + c.k_sph;
  c.R = 4 * c.k_mix + 2 * c.k_sph;
  Eigen::VectorXd s = detail::cumulative(pd.phi, n, p.periodic() ? n + 1 : n, h);
  c.length = s[s.size() - 1];
  c.s = s.head(n);
  return c;
}

WarpedRhs warped_rhs(const WarpedProfile& p) {
  auto c = warped_curvatures(p);
  int n = p.n();
  WarpedRhs r;
  r.dw.resize(n);
  r.dlogphi = -2 * c.k_mix;
  for (int i = 0; i < n; ++i) r.dw[i] = p.w[i] > 0 ? c.wss[i] - c.k_sph[i] * p.w[i] : 0.0;
  if (p.left == EndMode::pinned) r.dw[0] = -1 / p.w[0];
  if (p.right == EndMode::pinned) r.dw[n - 1] = -1 / p.w[n - 1];
  return r;
}

double profile_volume(const WarpedProfile& p) {
  Eigen::VectorXd f = p.w.array().square() * p.phi.array();
  auto fp = detail::pad_field(p, f, false);
  auto cum = detail::cumulative(fp, p.n(), p.periodic() ? p.n() + 1 : p.n(), p.h());
  return 4 * std::numbers::pi * cum[cum.size() - 1];
}

WarpedProfile rescale(const WarpedProfile& p, double lambda) {
  if (!(lambda > 0)) throw ParameterError("rescale factor must be positive");
  WarpedProfile q = p;
  q.w *= lambda;
  q.phi *= lambda;
  q.t *= lambda * lambda;
  q.pin_left *= lambda * lambda;
  q.pin_right *= lambda * lambda;
  return q;
}

ProfileInterpolant::ProfileInterpolant(const WarpedProfile& p)
    : w_(p.w), left_(p.left), right_(p.right), periodic_(p.periodic()) {
  auto pd = detail::pad(p);
  int n = p.n();
  Eigen::VectorXd s = detail::cumulative(pd.phi, n, periodic_ ? n + 1 : n, pd.h);
  length_ = s[s.size() - 1];
  s_ = s.head(n);
}

double ProfileInterpolant::eval(const Eigen::VectorXd& f, double s, bool odd_at_poles) const {
  return eval_parity(f, s, odd_at_poles && left_ == EndMode::pole, odd_at_poles && right_ == EndMode::pole);
}

double ProfileInterpolant::eval_parity(const Eigen::VectorXd& f, double s, bool odd_left, bool odd_right) const {
  int n = static_cast<int>(s_.size());
  // ghost-extended abscissae and values: index k <-> node k - 2
  auto node = [&](int k, double& sk, double& fk) {
    if (periodic_) {
      int m = ((k % n) + n) % n;
      int wraps = (k - m) / n;
      sk = s_[m] + wraps * length_;
      fk = f[m];
      return;
    }
    if (k < 0) {
      sk = -s_[-k];
      fk = (odd_left ? -1.0 : 1.0) * f[-k];
    } else if (k > n - 1) {
      int m = 2 * (n - 1) - k;
      sk = 2 * length_ - s_[m];
      fk = (odd_right ? -1.0 : 1.0) * f[m];
    } else {
      sk = s_[k];
      fk = f[k];
    }
  };
  if (periodic_) {
    s = std::fmod(s, length_);
    if (s < 0) s += length_;
  } else {
    s = std::clamp(s, 0.0, length_);
  }
  int i = static_cast<int>(std::upper_bound(s_.data(), s_.data() + n, s) - s_.data()) - 1;
  i = std::clamp(i, 0, periodic_ ? n - 1 : n - 2);
  double xs[4], fs[4];
  for (int k = 0; k < 4; ++k) node(i - 1 + k, xs[k], fs[k]);
  double out = 0;
  for (int a = 0; a < 4; ++a) {
    double l = 1;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (s - xs[b]) / (xs[a] - xs[b]);
    out += l * fs[a];
  }
  return out;
}

}  // namespace ricci
