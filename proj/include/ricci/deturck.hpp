#pragma once

// Gauge-fixed Ricci flow on small grids: d_t g = -2 Ric + L_X g with
// X_a = g^cd (d_c g_ad - 1/2 d_a g_cd), which is strictly parabolic.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ricci/chart_geometry.hpp"

namespace ricci {

/// Lower-index gauge field X_a per node.
template <typename Scalar, int Dim>
GridField<Vec<Scalar, Dim>> gauge_covector(const GridMetric<Scalar, Dim>& m) {
  require_stencil_support(m);
  GridField<Vec<Scalar, Dim>> X(m.g.size());
  for (std::size_t n = 0; n < m.g.size(); ++n) {
    auto j = node_jet(m, n, false);
    Vec<Scalar, Dim> x = Vec<Scalar, Dim>::Zero();
    for (int a = 0; a < Dim; ++a)
      for (int c = 0; c < Dim; ++c)
        for (int d = 0; d < Dim; ++d) x[a] += j.ginv(c, d) * (j.dg[c](a, d) - Scalar(0.5) * j.dg[a](c, d));
    X[n] = x;
  }
  return X;
}

/// Upper-index gauge field X^a.
template <typename Scalar, int Dim>
GridField<Vec<Scalar, Dim>> gauge_vector(const GridMetric<Scalar, Dim>& m) {
  auto Xl = gauge_covector(m);
  for (std::size_t n = 0; n < Xl.size(); ++n) Xl[n] = m.g[n].inverse() * Xl[n];
  return Xl;
}

/// -2 Ric + pi(X) per node.
template <typename Scalar, int Dim>
GridField<SymTensor<Scalar, Dim>> deturck_rhs(const GridMetric<Scalar, Dim>& m) {
  auto cf = curvature(m);
  auto pi = deformation_tensor_lower(m, gauge_covector(m));
  for (std::size_t n = 0; n < pi.size(); ++n) pi[n] -= Scalar(2) * cf.ricci[n];
  return pi;
}

/// Explicit step bound: cfl * min h^2 / max eigenvalue of g^-1.
template <typename Scalar, int Dim>
Scalar deturck_stable_dt(const GridMetric<Scalar, Dim>& m, Scalar cfl) {
  Scalar h2 = std::numeric_limits<Scalar>::infinity();
  for (int a = 0; a < Dim; ++a)
    if (m.dims[a] > 1) h2 = std::min(h2, m.spacing[a] * m.spacing[a]);
  Scalar lam = 0;
  for (const auto& g : m.g) {
    Eigen::SelfAdjointEigenSolver<SymTensor<Scalar, Dim>> es(g, Eigen::EigenvaluesOnly);
    lam = std::max(lam, Scalar(1) / es.eigenvalues().minCoeff());
  }
  return cfl * h2 / lam;
}

/// One Heun (RK2) step of the gauge-fixed flow.
template <typename Scalar, int Dim>
GridMetric<Scalar, Dim> deturck_step(const GridMetric<Scalar, Dim>& m, Scalar dt) {
  if (!(dt > 0)) throw ParameterError("dt must be positive");
  auto k1 = deturck_rhs(m);
  GridMetric<Scalar, Dim> mid = m;
  for (std::size_t n = 0; n < m.g.size(); ++n) mid.g[n] += dt * k1[n];
  auto k2 = deturck_rhs(mid);
  GridMetric<Scalar, Dim> out = m;
  for (std::size_t n = 0; n < m.g.size(); ++n) {
    out.g[n] += Scalar(0.5) * dt * (k1[n] + k2[n]);
    out.g[n] = Scalar(0.5) * (out.g[n] + out.g[n].transpose());
    if (!out.g[n].allFinite()) throw DivergenceError("non-finite metric in gauge-fixed step");
  }
  return out;
}

/// Squared L2 deviation of g from its grid average, sum_n |g_n - <g>|^2 dV_coord.
template <typename Scalar, int Dim>
Scalar perturbation_energy(const GridMetric<Scalar, Dim>& m) {
  SymTensor<Scalar, Dim> mean = SymTensor<Scalar, Dim>::Zero();
  for (const auto& g : m.g) mean += g;
  mean /= Scalar(m.g.size());
  Scalar cell = 1;
  for (int a = 0; a < Dim; ++a) cell *= m.spacing[a];
  Scalar e = 0;
  for (const auto& g : m.g) e += (g - mean).squaredNorm();
  return e * cell;
}

struct DeturckTrace {
  std::vector<double> times;
  std::vector<double> energy;
};

/// Runs to t_end from m (updated in place), recording the perturbation energy every `every` steps.
template <typename Scalar, int Dim>
DeturckTrace deturck_flow(GridMetric<Scalar, Dim>& m, Scalar t_end, Scalar cfl = Scalar(0.2), int every = 1) {
  if (!(cfl > 0 && cfl < 1)) throw ParameterError("cfl must lie in (0,1)");
  DeturckTrace tr;
  Scalar t = 0;
  tr.times.push_back(0);
  tr.energy.push_back(perturbation_energy(m));
  int k = 0;
  while (t < t_end - Scalar(1e-15) * std::max(Scalar(1), t_end)) {
    Scalar dt = std::min(deturck_stable_dt(m, cfl), t_end - t);
    m = deturck_step(m, dt);
    t += dt;
    if (++k % every == 0 || t >= t_end - Scalar(1e-15)) {
      tr.times.push_back(t);
      tr.energy.push_back(perturbation_energy(m));
    }
  }
  return tr;
}

/// Identity metric on a periodic unit box with eps sin(2 pi mode x_0) added to g_(comp,comp).
inline GridMetric3d flat_torus_perturbed(std::array<int, 3> dims = {32, 6, 6}, double eps = 1e-3, int mode = 1,
                                         int comp = 1) {
  if (comp < 0 || comp > 2) throw ParameterError("component index must be 0, 1 or 2");
  GridMetric3d m(dims, {1.0 / dims[0], 1.0 / dims[1], 1.0 / dims[2]}, {true, true, true});
  for (std::size_t n = 0; n < m.g.size(); ++n) {
    double x = m.coord(n)[0];
    m.g[n](comp, comp) += eps * std::sin(2 * std::numbers::pi * mode * x);
  }
  return m;
}

}  // namespace ricci
