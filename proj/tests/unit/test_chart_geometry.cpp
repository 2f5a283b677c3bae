#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ricci/chart_geometry.hpp"
#include "ricci/embedding.hpp"
#include "ricci/presets.hpp"

using namespace ricci;
using std::numbers::pi;

namespace {

// Round S^2 of radius r in (theta, phi), theta in [t0, t0 + (n-1) h]; phi carries one node.
GridMetric2d sphere2(int n, double r, double t0 = 0.6, double t1 = 2.4) {
  double h = (t1 - t0) / (n - 1);
  GridMetric2d m({n, 1}, {h, 1.0}, {false, false});
  for (int i = 0; i < n; ++i) {
    double th = t0 + i * h;
    m.g[i] << r * r, 0, 0, r * r * std::sin(th) * std::sin(th);
  }
  return m;
}

// Unit S^3 in (chi, theta, psi) centred on (pi/2, pi/2), psi one node.
GridMetric3d sphere3(int n) {
  double h = 1.0 / (n - 1);
  GridMetric3d m({n, n, 1}, {h, h, 1.0}, {false, false, false});
  for (std::size_t k = 0; k < m.g.size(); ++k) {
    auto x = m.coord(k);
    double chi = pi / 2 - 0.5 + x[0], th = pi / 2 - 0.5 + x[1];
    double s = std::sin(chi);
    m.g[k] = Eigen::Matrix3d::Zero();
    m.g[k].diagonal() << 1, s * s, s * s * std::sin(th) * std::sin(th);
  }
  return m;
}

double max_abs_dev(const std::vector<double>& v, double target) {
  double e = 0;
  for (double x : v) e = std::max(e, std::abs(x - target));
  return e;
}

// Same, skipping nodes within one of a non-periodic edge (one-sided stencils are first order there).
template <int Dim>
double interior_dev(const GridMetric<double, Dim>& m, const std::vector<double>& v, double target) {
  double e = 0;
  for (std::size_t n = 0; n < v.size(); ++n) {
    auto idx = m.unravel(n);
    bool edge = false;
    for (int a = 0; a < Dim; ++a) edge |= m.dims[a] > 1 && (idx[a] < 2 || idx[a] > m.dims[a] - 3);
    if (!edge) e = std::max(e, std::abs(v[n] - target));
  }
  return e;
}

}  // namespace

TEST_CASE("inverse metric of a constant anisotropic metric") {
  GridMetric2d m({5, 5}, {0.1, 0.1}, {true, true});
  Eigen::Matrix2d g;
  g << 2, 0.5, 0.5, 1;
  for (auto& gn : m.g) gn = g;
  auto inv = inverse_metric(m);
  for (const auto& i : inv) CHECK((i * g - Eigen::Matrix2d::Identity()).norm() < 1e-14);
}

TEST_CASE("degenerate and asymmetric nodes are rejected") {
  GridMetric2d m({5, 5}, {0.1, 0.1}, {true, true});
  m.g[7] << 1, 0, 0, 0;
  CHECK_THROWS_AS(inverse_metric(m), DegenerateMetricError);
  try {
    validate(m);
  } catch (const DegenerateMetricError& e) {
    CHECK(e.node() == 7);
  }
  m.g[7] << 1, 0.2, 0.1, 1;
  CHECK_THROWS_AS(validate(m), DegenerateMetricError);
}

TEST_CASE("stencil support is required") {
  GridMetric2d m({3, 5}, {0.1, 0.1}, {false, false});
  CHECK_THROWS_AS(curvature(m), ParameterError);
}

TEST_CASE("Christoffel symbols of the round 2-sphere") {
  const double r = 1.7;
  auto m = sphere2(81, r);
  auto gam = christoffel(m);
  double h = m.spacing[0];
  double err = 0;
  for (int i = 1; i < 80; ++i) {
    double th = 0.6 + i * h;
    err = std::max(err, std::abs(gam[i][0](1, 1) + std::sin(th) * std::cos(th)));
    err = std::max(err, std::abs(gam[i][1](0, 1) - std::cos(th) / std::sin(th)));
    err = std::max(err, std::abs(gam[i][0](0, 0)) + std::abs(gam[i][1](1, 1)));
  }
  CHECK(err < 1e-3);
}

TEST_CASE("2-sphere scalar curvature converges at second order") {
  const double r = 1.7;
  double prev = 0;
  for (int n : {41, 81, 161}) {
    auto R = scalar_curvature(sphere2(n, r));
    double e = max_abs_dev(R, 2 / (r * r));
    if (prev > 0) CHECK(prev / e > 3.5);
    prev = e;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("unit 3-sphere has R = 6 and Ric = 2 g") {
  auto m = sphere3(33);
  auto cf = curvature(m);
  CHECK(max_abs_dev(cf.scalar, 6) < 5e-2);
  CHECK(interior_dev(m, cf.scalar, 6) < 5e-3);
  double e = 0;
  for (std::size_t n = 0; n < m.g.size(); ++n) e = std::max(e, (cf.ricci[n] - 2 * m.g[n]).cwiseAbs().maxCoeff());
  CHECK(e < 1e-2);
}

TEST_CASE("cylinder S2 x R of radius sqrt 2 has R = 1") {
  // (z, theta) chart, the S^2 factor of radius sqrt 2
  int n = 65;
  double h = 1.2 / (n - 1);
  GridMetric3d m({n, n, 1}, {h, h, 1.0}, {false, false, false});
  for (std::size_t k = 0; k < m.g.size(); ++k) {
    double th = 1.0 + m.coord(k)[1];
    m.g[k] = Eigen::Matrix3d::Zero();
    m.g[k].diagonal() << 1, 2, 2 * std::sin(th) * std::sin(th);
  }
  CHECK(interior_dev(m, scalar_curvature(m), 1.0) < 5e-4);
}

TEST_CASE("sectional curvature is independent of the spanning pair") {
  auto m = sphere3(33);
  std::size_t node = m.ravel({16, 16, 0});
  Eigen::Vector3d X(1, 0, 0), Y(0, 1, 0.3);
  double k1 = sectional_curvature(m, node, X, Y);
  double k2 = sectional_curvature(m, node, Eigen::Vector3d(X + 2 * Y), Eigen::Vector3d(-3 * Y));
  CHECK(k1 == doctest::Approx(1).epsilon(1e-2));
  CHECK(k1 == doctest::Approx(k2).epsilon(1e-10));
  CHECK_THROWS_AS(sectional_curvature(m, node, X, Eigen::Vector3d(2 * X)), DegeneratePlaneError);
  CHECK_THROWS_AS(sectional_curvature(m, node, Eigen::Vector3d(Eigen::Vector3d::Zero()), Y), DegeneratePlaneError);
}

TEST_CASE("Laplacian and Hessian of a quadratic on flat space are exact") {
  GridMetric2d m({9, 9}, {0.25, 0.25}, {false, false});
  std::vector<double> f(m.g.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    auto x = m.coord(k);
    f[k] = x[0] * x[0] + 3 * x[0] * x[1] - x[1] * x[1];
  }
  for (double v : laplace_beltrami(m, f)) CHECK(std::abs(v) < 1e-12);
  for (const auto& H : hessian(m, f)) {
    CHECK(H(0, 0) == doctest::Approx(2));
    CHECK(H(0, 1) == doctest::Approx(3));
    CHECK(H(1, 1) == doctest::Approx(-2));
  }
}

TEST_CASE("Laplacian of cos theta on the 2-sphere") {
  const double r = 1.3;
  auto m = sphere2(161, r);
  std::vector<double> f(m.g.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::cos(0.6 + i * m.spacing[0]);
  auto L = laplace_beltrami(m, f);
  double e = 0;
  for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(L[i] + 2 * f[i] / (r * r)));
  CHECK(e < 2e-3);
}

TEST_CASE("rotation field of the 2-sphere is Killing") {
  auto m = sphere2(161, 1.0);
  GridField<Vec<double, 2>> X(m.g.size(), Vec<double, 2>(0, 1));
  auto pi_X = deformation_tensor(m, X);
  double e = 0;
  for (std::size_t i = 1; i + 1 < X.size(); ++i) e = std::max(e, pi_X[i].cwiseAbs().maxCoeff());
  CHECK(e < 1e-4);
}

TEST_CASE("volume and rescaling") {
  GridMetric3d box({5, 7, 9}, {0.25, 1.0 / 6, 0.125}, {false, false, false});
  CHECK(total_volume(box) == doctest::Approx(1.0).epsilon(1e-14));
  auto m = sphere3(17);
  auto big = rescale(m, 3.0);
  CHECK(total_volume(big) == doctest::Approx(27 * total_volume(m)).epsilon(1e-12));
  auto R = scalar_curvature(m), Rb = scalar_curvature(big);
  for (std::size_t k = 0; k < R.size(); ++k) CHECK(Rb[k] == doctest::Approx(R[k] / 9).epsilon(1e-10));
  CHECK_THROWS_AS(rescale(m, 0.0), ParameterError);
}

TEST_CASE("chart embedding of the round sphere") {
  auto p = round_sphere(257);
  auto m = embed_warped(p, 32, 224);
  CHECK(m.dims[0] == 193);
  CHECK(m.dims[1] == 5);
  CHECK(m.dims[2] == 1);
  auto R = chart_scalar_on_axis(m);
  CHECK(R.size() == 193);
  CHECK((R.array() - 6).abs().maxCoeff() < 1e-2);
  CHECK((R.segment(2, 189).array() - 6).abs().maxCoeff() < 2e-3);
}
