#pragma once

// Tensor calculus on a metric sampled over a rectangular coordinate grid.
// Derivatives are second-order finite differences: central in the interior,
// one-sided at non-periodic edges, zero along axes with a single node.
//
// Curvature convention: Rm(X,Y,Y,X) = K(X,Y) |X^Y|^2, Ric_bc = g^ad Rm_abcd,
// so the round sphere has positive Ricci and scalar curvature.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ricci/errors.hpp"

namespace ricci {

template <typename T>
using GridField = std::vector<T, Eigen::aligned_allocator<T>>;

template <typename Scalar, int Dim>
using SymTensor = Eigen::Matrix<Scalar, Dim, Dim>;

template <typename Scalar, int Dim>
using Vec = Eigen::Matrix<Scalar, Dim, 1>;

/// Fourth-rank lower-index tensor at one node, index order (a,b,c,d).
template <typename Scalar, int Dim>
struct Rank4 {
  std::array<Scalar, Dim * Dim * Dim * Dim> v{};
  Scalar& operator()(int a, int b, int c, int d) { return v[((a * Dim + b) * Dim + c) * Dim + d]; }
  Scalar operator()(int a, int b, int c, int d) const { return v[((a * Dim + b) * Dim + c) * Dim + d]; }
};

/// Christoffel symbols at one node: gamma[a](b,c) = Gamma^a_bc.
template <typename Scalar, int Dim>
using Christoffel = std::array<SymTensor<Scalar, Dim>, Dim>;

/// Metric components g_ab on a row-major grid (last axis fastest).
template <typename Scalar, int Dim>
struct GridMetric {
  using Matrix = SymTensor<Scalar, Dim>;

  std::array<int, Dim> dims{};
  std::array<Scalar, Dim> spacing{};
  std::array<bool, Dim> periodic{};
  GridField<Matrix> g;

  GridMetric() = default;
  GridMetric(const std::array<int, Dim>& d, const std::array<Scalar, Dim>& h, const std::array<bool, Dim>& per)
      : dims(d), spacing(h), periodic(per) {
    g.assign(node_count(), Matrix::Identity());
  }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (int a = 0; a < Dim; ++a) n *= static_cast<std::size_t>(dims[a]);
    return n;
  }

  std::array<int, Dim> unravel(std::size_t node) const {
    std::array<int, Dim> idx{};
    for (int a = Dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(node % dims[a]);
      node /= dims[a];
    }
    return idx;
  }

  std::size_t ravel(const std::array<int, Dim>& idx) const {
    std::size_t n = 0;
    for (int a = 0; a < Dim; ++a) n = n * dims[a] + idx[a];
    return n;
  }

  /// Coordinate of a node, with the grid origin at zero.
  Vec<Scalar, Dim> coord(std::size_t node) const {
    auto idx = unravel(node);
    Vec<Scalar, Dim> x;
    for (int a = 0; a < Dim; ++a) x[a] = spacing[a] * idx[a];
    return x;
  }
};

using GridMetric3d = GridMetric<double, 3>;
using GridMetric2d = GridMetric<double, 2>;

/// Per-node curvature pieces.
template <typename Scalar, int Dim>
struct CurvatureField {
  GridField<Christoffel<Scalar, Dim>> christoffel;
  std::vector<Rank4<Scalar, Dim>> riemann;
  GridField<SymTensor<Scalar, Dim>> ricci;
  std::vector<Scalar> scalar;
};

namespace detail {

struct Tap {
  int offset;
  double weight;
};

// Stencil taps along one axis at index i (offsets relative to i), unscaled by h.
inline int first_taps(int n, bool periodic, int i, Tap* t) {
  if (n == 1) return 0;
  if (periodic || (i > 0 && i < n - 1)) {
    t[0] = {-1, -0.5};
    t[1] = {1, 0.5};
    return 2;
  }
  if (i == 0) {
    t[0] = {0, -1.5};
    t[1] = {1, 2.0};
    t[2] = {2, -0.5};
    return 3;
  }
  t[0] = {0, 1.5};
  t[1] = {-1, -2.0};
  t[2] = {-2, 0.5};
  return 3;
}

inline int second_taps(int n, bool periodic, int i, Tap* t) {
  if (n == 1) return 0;
  if (periodic || (i > 0 && i < n - 1)) {
    t[0] = {-1, 1.0};
    t[1] = {0, -2.0};
    t[2] = {1, 1.0};
    return 3;
  }
  int s = (i == 0) ? 1 : -1;
  t[0] = {0, 2.0};
  t[1] = {s, -5.0};
  t[2] = {2 * s, 4.0};
  t[3] = {3 * s, -1.0};
  return 4;
}

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace detail

/// Throws unless every axis with more than one node has at least `min_nodes`.
template <typename Scalar, int Dim>
void require_stencil_support(const GridMetric<Scalar, Dim>& m, int min_nodes = 5) {
  for (int a = 0; a < Dim; ++a) {
    if (!(m.spacing[a] > 0)) throw ParameterError("grid spacing must be positive on axis " + std::to_string(a));
    if (m.dims[a] < 1) throw ParameterError("grid dims must be positive");
    if (m.dims[a] > 1 && m.dims[a] < min_nodes)
      throw ParameterError("axis " + std::to_string(a) + " needs at least " + std::to_string(min_nodes) + " nodes");
  }
}

/// First partial derivative of a per-node field along `axis` at `node`.
template <typename T, typename Scalar, int Dim>
T partial(const GridMetric<Scalar, Dim>& m, const GridField<T>& f, std::size_t node, int axis) {
  auto idx = m.unravel(node);
  detail::Tap taps[4];
  int k = detail::first_taps(m.dims[axis], m.periodic[axis], idx[axis], taps);
  T out = f[node] * Scalar(0);
  for (int j = 0; j < k; ++j) {
    auto q = idx;
    q[axis] = detail::wrap(idx[axis] + taps[j].offset, m.dims[axis]);
    out += f[m.ravel(q)] * Scalar(taps[j].weight);
  }
  return out / m.spacing[axis];
}

/// Second partial derivative d_a d_b; mixed terms use the product of first stencils.
template <typename T, typename Scalar, int Dim>
T partial2(const GridMetric<Scalar, Dim>& m, const GridField<T>& f, std::size_t node, int a, int b) {
  auto idx = m.unravel(node);
  T out = f[node] * Scalar(0);
  detail::Tap ta[4], tb[4];
  if (a == b) {
    int k = detail::second_taps(m.dims[a], m.periodic[a], idx[a], ta);
    for (int j = 0; j < k; ++j) {
      auto q = idx;
      q[a] = detail::wrap(idx[a] + ta[j].offset, m.dims[a]);
      out += f[m.ravel(q)] * Scalar(ta[j].weight);
    }
    return out / (m.spacing[a] * m.spacing[a]);
  }
  int ka = detail::first_taps(m.dims[a], m.periodic[a], idx[a], ta);
  int kb = detail::first_taps(m.dims[b], m.periodic[b], idx[b], tb);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      auto q = idx;
      q[a] = detail::wrap(idx[a] + ta[i].offset, m.dims[a]);
      q[b] = detail::wrap(idx[b] + tb[j].offset, m.dims[b]);
      out += f[m.ravel(q)] * Scalar(ta[i].weight * tb[j].weight);
    }
  return out / (m.spacing[a] * m.spacing[b]);
}

/// Throws DegenerateMetricError if g at `node` is not SPD or is ill-conditioned.
template <typename Scalar, int Dim>
void check_node(const SymTensor<Scalar, Dim>& g, std::size_t node, Scalar max_condition = Scalar(1e12)) {
  if (!g.allFinite()) throw DegenerateMetricError("non-finite metric at node " + std::to_string(node), long(node));
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * (Scalar(1) + g.cwiseAbs().maxCoeff()))
    throw DegenerateMetricError("asymmetric metric at node " + std::to_string(node), long(node));
  Eigen::SelfAdjointEigenSolver<SymTensor<Scalar, Dim>> es(g, Eigen::EigenvaluesOnly);
  Scalar lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0) || hi / lo > max_condition)
    throw DegenerateMetricError("degenerate metric at node " + std::to_string(node), long(node));
}

template <typename Scalar, int Dim>
void validate(const GridMetric<Scalar, Dim>& m) {
  if (m.g.size() != m.node_count()) throw ParameterError("metric component count does not match grid dims");
  for (int a = 0; a < Dim; ++a)
    if (!(m.spacing[a] > 0)) throw ParameterError("grid spacing must be positive");
  for (std::size_t n = 0; n < m.g.size(); ++n) check_node<Scalar, Dim>(m.g[n], n);
}

template <typename Scalar, int Dim>
GridField<SymTensor<Scalar, Dim>> inverse_metric(const GridMetric<Scalar, Dim>& m) {
  GridField<SymTensor<Scalar, Dim>> inv(m.g.size());
  for (std::size_t n = 0; n < m.g.size(); ++n) {
    check_node<Scalar, Dim>(m.g[n], n);
    inv[n] = m.g[n].inverse();
  }
  return inv;
}

/// Local geometry at one node: metric, inverse, first and second metric derivatives.
template <typename Scalar, int Dim>
struct NodeJet {
  SymTensor<Scalar, Dim> g, ginv;
  std::array<SymTensor<Scalar, Dim>, Dim> dg;                      // dg[c] = d_c g
  std::array<std::array<SymTensor<Scalar, Dim>, Dim>, Dim> ddg;    // ddg[a][b] = d_a d_b g
};

template <typename Scalar, int Dim>
NodeJet<Scalar, Dim> node_jet(const GridMetric<Scalar, Dim>& m, std::size_t node, bool second = true) {
  NodeJet<Scalar, Dim> j;
  j.g = m.g[node];
  check_node<Scalar, Dim>(j.g, node);
  j.ginv = j.g.inverse();
  for (int c = 0; c < Dim; ++c) j.dg[c] = partial(m, m.g, node, c);
  if (second)
    for (int a = 0; a < Dim; ++a)
      for (int b = a; b < Dim; ++b) {
        j.ddg[a][b] = partial2(m, m.g, node, a, b);
        j.ddg[b][a] = j.ddg[a][b];
      }
  return j;
}

template <typename Scalar, int Dim>
Christoffel<Scalar, Dim> christoffel_from_jet(const NodeJet<Scalar, Dim>& j) {
  // lower[d](b,c) = 1/2 (d_b g_cd + d_c g_bd - d_d g_bc)
  Christoffel<Scalar, Dim> lower, gam;
  for (int d = 0; d < Dim; ++d)
    for (int b = 0; b < Dim; ++b)
      for (int c = 0; c < Dim; ++c)
        lower[d](b, c) = Scalar(0.5) * (j.dg[b](c, d) + j.dg[c](b, d) - j.dg[d](b, c));
  for (int a = 0; a < Dim; ++a) {
    gam[a].setZero();
    for (int d = 0; d < Dim; ++d) gam[a] += j.ginv(a, d) * lower[d];
  }
  return gam;
}

template <typename Scalar, int Dim>
Rank4<Scalar, Dim> riemann_from_jet(const NodeJet<Scalar, Dim>& j, const Christoffel<Scalar, Dim>& gam) {
  // Gl[p](a,c) = g_pq Gamma^q_ac
  Christoffel<Scalar, Dim> gl;
  for (int p = 0; p < Dim; ++p) {
    gl[p].setZero();
    for (int q = 0; q < Dim; ++q) gl[p] += j.g(p, q) * gam[q];
  }
  Rank4<Scalar, Dim> rm;
  for (int a = 0; a < Dim; ++a)
    for (int b = 0; b < Dim; ++b)
      for (int c = 0; c < Dim; ++c)
        for (int d = 0; d < Dim; ++d) {
          Scalar v = Scalar(0.5) * (j.ddg[a][c](b, d) + j.ddg[b][d](a, c) - j.ddg[b][c](a, d) - j.ddg[a][d](b, c));
          for (int p = 0; p < Dim; ++p) v += gam[p](a, c) * gl[p](b, d) - gam[p](b, c) * gl[p](a, d);
          rm(a, b, c, d) = v;
        }
  return rm;
}

template <typename Scalar, int Dim>
SymTensor<Scalar, Dim> ricci_from_riemann(const Rank4<Scalar, Dim>& rm, const SymTensor<Scalar, Dim>& ginv) {
  SymTensor<Scalar, Dim> ric = SymTensor<Scalar, Dim>::Zero();
  for (int b = 0; b < Dim; ++b)
    for (int c = 0; c < Dim; ++c)
      for (int a = 0; a < Dim; ++a)
        for (int d = 0; d < Dim; ++d) ric(b, c) += ginv(a, d) * rm(a, b, c, d);
  return ric;
}

/// Raises the last index: Riem_abc^d = Rm_abce g^ed.
template <typename Scalar, int Dim>
Rank4<Scalar, Dim> raise_last(const Rank4<Scalar, Dim>& rm, const SymTensor<Scalar, Dim>& ginv) {
  Rank4<Scalar, Dim> out;
  for (int a = 0; a < Dim; ++a)
    for (int b = 0; b < Dim; ++b)
      for (int c = 0; c < Dim; ++c)
        for (int d = 0; d < Dim; ++d) {
          Scalar v = 0;
          for (int e = 0; e < Dim; ++e) v += rm(a, b, c, e) * ginv(e, d);
          out(a, b, c, d) = v;
        }
  return out;
}

template <typename Scalar, int Dim>
GridField<Christoffel<Scalar, Dim>> christoffel(const GridMetric<Scalar, Dim>& m) {
  require_stencil_support(m);
  GridField<Christoffel<Scalar, Dim>> out(m.g.size());
  for (std::size_t n = 0; n < m.g.size(); ++n) out[n] = christoffel_from_jet(node_jet(m, n, false));
  return out;
}

/// All curvature pieces in one sweep.
template <typename Scalar, int Dim>
CurvatureField<Scalar, Dim> curvature(const GridMetric<Scalar, Dim>& m) {
  require_stencil_support(m);
  CurvatureField<Scalar, Dim> cf;
  std::size_t N = m.g.size();
  cf.christoffel.resize(N);
  cf.riemann.resize(N);
  cf.ricci.resize(N);
  cf.scalar.resize(N);
  for (std::size_t n = 0; n < N; ++n) {
    auto j = node_jet(m, n);
    cf.christoffel[n] = christoffel_from_jet(j);
    cf.riemann[n] = riemann_from_jet<Scalar, Dim>(j, cf.christoffel[n]);
    SymTensor<Scalar, Dim> ric = ricci_from_riemann(cf.riemann[n], j.ginv);
    cf.ricci[n] = Scalar(0.5) * (ric + ric.transpose());
    cf.scalar[n] = (j.ginv.cwiseProduct(cf.ricci[n])).sum();
  }
  return cf;
}

/// Lower-index Riemann tensor per node.
template <typename Scalar, int Dim>
std::vector<Rank4<Scalar, Dim>> riemann(const GridMetric<Scalar, Dim>& m) {
  return curvature(m).riemann;
}

template <typename Scalar, int Dim>
GridField<SymTensor<Scalar, Dim>> ricci(const GridMetric<Scalar, Dim>& m) {
  return curvature(m).ricci;
}

template <typename Scalar, int Dim>
std::vector<Scalar> scalar_curvature(const GridMetric<Scalar, Dim>& m) {
  return curvature(m).scalar;
}

/// K of the plane spanned by X, Y (any independent pair; orthonormalised under g).
template <typename Scalar, int Dim>
Scalar sectional_curvature(const Rank4<Scalar, Dim>& rm, const SymTensor<Scalar, Dim>& g, Vec<Scalar, Dim> X,
                           Vec<Scalar, Dim> Y) {
  Scalar nx = std::sqrt(X.dot(g * X));
  if (!(nx > 0)) throw DegeneratePlaneError("zero vector in sectional curvature");
  X /= nx;
  Y -= X.dot(g * Y) * X;
  Scalar ny = std::sqrt(std::max(Scalar(0), Y.dot(g * Y)));
  if (!(ny > Scalar(1e-12) * std::sqrt(X.dot(g * X)))) throw DegeneratePlaneError("linearly dependent plane vectors");
  Y /= ny;
  Scalar k = 0;
  for (int a = 0; a < Dim; ++a)
    for (int b = 0; b < Dim; ++b)
      for (int c = 0; c < Dim; ++c)
        for (int d = 0; d < Dim; ++d) k += rm(a, b, c, d) * X[a] * Y[b] * Y[c] * X[d];
  return k;
}

template <typename Scalar, int Dim>
Scalar sectional_curvature(const GridMetric<Scalar, Dim>& m, std::size_t node, const Vec<Scalar, Dim>& X,
                           const Vec<Scalar, Dim>& Y) {
  require_stencil_support(m);
  auto j = node_jet(m, node);
  auto rm = riemann_from_jet<Scalar, Dim>(j, christoffel_from_jet(j));
  return sectional_curvature<Scalar, Dim>(rm, j.g, X, Y);
}

template <typename Scalar, int Dim>
void check_shape(const GridMetric<Scalar, Dim>& m, std::size_t n) {
  if (n != m.g.size()) throw ParameterError("field size does not match the metric grid");
}

template <typename Scalar, int Dim>
std::vector<Scalar> laplace_beltrami(const GridMetric<Scalar, Dim>& m, const std::vector<Scalar>& f) {
  require_stencil_support(m);
  check_shape(m, f.size());
  GridField<Scalar> ff(f.begin(), f.end());
  std::vector<Scalar> out(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    auto j = node_jet(m, n, false);
    auto gam = christoffel_from_jet(j);
    Scalar v = 0;
    for (int a = 0; a < Dim; ++a)
      for (int b = 0; b < Dim; ++b) {
        if (j.ginv(a, b) == Scalar(0)) continue;
        v += j.ginv(a, b) * partial2(m, ff, n, a, b);
      }
    for (int c = 0; c < Dim; ++c) {
      Scalar contracted = (j.ginv.cwiseProduct(gam[c])).sum();
      if (contracted != Scalar(0)) v -= contracted * partial(m, ff, n, c);
    }
    out[n] = v;
  }
  return out;
}

template <typename Scalar, int Dim>
GridField<SymTensor<Scalar, Dim>> hessian(const GridMetric<Scalar, Dim>& m, const std::vector<Scalar>& f) {
  require_stencil_support(m);
  check_shape(m, f.size());
  GridField<Scalar> ff(f.begin(), f.end());
  GridField<SymTensor<Scalar, Dim>> out(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    auto gam = christoffel_from_jet(node_jet(m, n, false));
    Vec<Scalar, Dim> df;
    for (int c = 0; c < Dim; ++c) df[c] = partial(m, ff, n, c);
    SymTensor<Scalar, Dim> h;
    for (int a = 0; a < Dim; ++a)
      for (int b = a; b < Dim; ++b) {
        Scalar v = partial2(m, ff, n, a, b);
        for (int c = 0; c < Dim; ++c) v -= gam[c](a, b) * df[c];
        h(a, b) = h(b, a) = v;
      }
    out[n] = h;
  }
  return out;
}

/// Gradient vector field (upper index).
template <typename Scalar, int Dim>
GridField<Vec<Scalar, Dim>> gradient(const GridMetric<Scalar, Dim>& m, const std::vector<Scalar>& f) {
  check_shape(m, f.size());
  GridField<Scalar> ff(f.begin(), f.end());
  GridField<Vec<Scalar, Dim>> out(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    Vec<Scalar, Dim> df;
    for (int c = 0; c < Dim; ++c) df[c] = partial(m, ff, n, c);
    out[n] = m.g[n].inverse() * df;
  }
  return out;
}

/// pi_ab = nabla_a X_b + nabla_b X_a for a covector field X_a.
template <typename Scalar, int Dim>
GridField<SymTensor<Scalar, Dim>> deformation_tensor_lower(const GridMetric<Scalar, Dim>& m,
                                                           const GridField<Vec<Scalar, Dim>>& Xl) {
  require_stencil_support(m);
  check_shape(m, Xl.size());
  GridField<SymTensor<Scalar, Dim>> out(Xl.size());
  for (std::size_t n = 0; n < Xl.size(); ++n) {
    auto gam = christoffel_from_jet(node_jet(m, n, false));
    SymTensor<Scalar, Dim> dX;  // dX(a,b) = d_a X_b
    for (int a = 0; a < Dim; ++a) dX.row(a) = partial(m, Xl, n, a).transpose();
    SymTensor<Scalar, Dim> p = dX + dX.transpose();
    for (int c = 0; c < Dim; ++c) p -= Scalar(2) * Xl[n][c] * gam[c];
    out[n] = p;
  }
  return out;
}

/// Deformation tensor of a vector field X^a (upper index).
template <typename Scalar, int Dim>
GridField<SymTensor<Scalar, Dim>> deformation_tensor(const GridMetric<Scalar, Dim>& m,
                                                     const GridField<Vec<Scalar, Dim>>& X) {
  check_shape(m, X.size());
  GridField<Vec<Scalar, Dim>> Xl(X.size());
  for (std::size_t n = 0; n < X.size(); ++n) Xl[n] = m.g[n] * X[n];
  return deformation_tensor_lower(m, Xl);
}

/// Riemannian volume by the trapezoid rule (periodic axes take full weight).
template <typename Scalar, int Dim>
Scalar total_volume(const GridMetric<Scalar, Dim>& m) {
  Scalar vol = 0;
  for (std::size_t n = 0; n < m.g.size(); ++n) {
    auto idx = m.unravel(n);
    Scalar wgt = 1;
    for (int a = 0; a < Dim; ++a) {
      Scalar wa = m.spacing[a];
      if (!m.periodic[a] && m.dims[a] > 1 && (idx[a] == 0 || idx[a] == m.dims[a] - 1)) wa *= Scalar(0.5);
      wgt *= wa;
    }
    vol += wgt * std::sqrt(m.g[n].determinant());
  }
  return vol;
}

/// Returns the metric lambda^2 g on the same coordinate grid.
template <typename Scalar, int Dim>
GridMetric<Scalar, Dim> rescale(const GridMetric<Scalar, Dim>& m, Scalar lambda) {
  if (!(lambda > 0)) throw ParameterError("rescale factor must be positive");
  GridMetric<Scalar, Dim> out = m;
  for (auto& gn : out.g) gn *= lambda * lambda;
  return out;
}

}  // namespace ricci
