#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ricci/flow_engine.hpp"
#include "ricci/presets.hpp"
#include "ricci/soliton.hpp"

using namespace ricci;
using std::numbers::pi;

TEST_CASE("round sphere curvatures are exact up to discretisation") {
  const double rho = 1.5;
  auto c = warped_curvatures(round_sphere(257, rho));
  CHECK((c.R.array() - 6 / (rho * rho)).abs().maxCoeff() < 1e-4);
  CHECK((c.k_sph.array() - 1 / (rho * rho)).abs().maxCoeff() < 1e-4);
  CHECK((c.k_mix.array() - 1 / (rho * rho)).abs().maxCoeff() < 1e-4);
  CHECK(c.length == doctest::Approx(pi * rho).epsilon(1e-8));
}

TEST_CASE("cylinder curvatures") {
  auto c = warped_curvatures(cylinder_segment(65, 2.0, 10.0, EndMode::periodic));
  CHECK((c.R.array() - 0.5).abs().maxCoeff() < 1e-12);
  CHECK(c.k_mix.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("right-hand side on the cylinder and the sphere") {
  auto cyl = cylinder_segment(65, 2.0, 10.0, EndMode::frozen);
  auto rc = warped_rhs(cyl);
  CHECK((rc.dw.array() + 0.5).abs().maxCoeff() < 1e-12);  // d_t w = -1/w
  CHECK(rc.dlogphi.cwiseAbs().maxCoeff() < 1e-12);

  // rho(t)^2 = rho^2 - 4t: d_t w = -2 sin(pi x) / rho, d_t log phi = -2 / rho^2
  const double rho = 1.2;
  auto sp = round_sphere(257, rho);
  auto rs = warped_rhs(sp);
  for (int i = 8; i < 249; ++i) {
    CHECK(rs.dw[i] == doctest::Approx(-2 * std::sin(pi * sp.x(i)) / rho).epsilon(1e-5));
    CHECK(rs.dlogphi[i] == doctest::Approx(-2 / (rho * rho)).epsilon(1e-5));
  }
}

TEST_CASE("mirror-symmetric profiles have mirror-symmetric derivatives") {
  auto p = dumbbell(257);
  auto d = flow_derivative(p);
  int n = p.n();
  for (int i = 0; i < n; ++i) CHECK(d.dw[i] == doctest::Approx(d.dw[n - 1 - i]).epsilon(1e-9));
}

TEST_CASE("profile volume of the round sphere") {
  const double rho = 0.8;
  CHECK(profile_volume(round_sphere(513, rho)) == doctest::Approx(2 * pi * pi * std::pow(rho, 3)).epsilon(1e-8));
}

TEST_CASE("steps beyond the CFL bound are refused") {
  auto p = round_sphere(129);
  StepControl c;
  auto curv = warped_curvatures(p);
  double dt = stable_dt(p, c, curv);
  CHECK(dt > 0);
  CHECK_NOTHROW(step(p, dt, c));
  CHECK_THROWS_AS(step(p, 3 * dt / c.cfl_fraction, c), ParameterError);
  StepControl bad;
  bad.cfl_fraction = 2;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("round sphere becomes extinct at rho^2 / 4 and scales parabolically") {
  StepControl c;
  for (double lambda : {1.0, 2.0}) {
    auto p = rescale(round_sphere(65), lambda);
    auto h = run(p, c, 10.0);
    CHECK(h.status.kind == TerminalKind::extinct);
    CHECK(h.status.time == doctest::Approx(0.25 * lambda * lambda).epsilon(1e-2));
  }
}

TEST_CASE("runs are deterministic") {
  StepControl c;
  auto a = run(dumbbell(96), c, 0.004);
  auto b = run(dumbbell(96), c, 0.004);
  REQUIRE(a.size() == b.size());
  CHECK(a.steps == b.steps);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.times[k] == b.times[k]);
    CHECK(a.snapshots[k].w == b.snapshots[k].w);
    CHECK(a.material[k] == b.material[k]);
  }
}

TEST_CASE("advance in slices matches a single run") {
  StepControl c;
  auto p = dumbbell(96);
  auto whole = start_run(p, c);
  advance(whole, c, 0.004);
  auto sliced = start_run(p, c);
  while (!advance(sliced, c, 0.004, 37)) {
  }
  CHECK(whole.steps == sliced.steps);
  CHECK(whole.current.w == sliced.current.w);
}

TEST_CASE("regridding preserves geometry") {
  auto p = dumbbell(257);
  auto q = regrid(p, 1.0);
  CHECK(q.n() == p.n());
  CHECK(profile_volume(q) == doctest::Approx(profile_volume(p)).epsilon(1e-5));
  auto r = resample(p, 513, 0.0);
  CHECK(r.n() == 513);
  CHECK(warped_curvatures(r).length == doctest::Approx(warped_curvatures(p).length).epsilon(1e-6));
}

TEST_CASE("history rescaling") {
  StepControl c;
  auto h = sample_flow(round_sphere(65), c, {0.05, 0.1});
  REQUIRE(h.size() == 3);
  auto s = rescale(h, 2.0);
  CHECK(s.times[2] == doctest::Approx(4 * h.times[2]));
  CHECK(s.snapshots[1].w == 2 * h.snapshots[1].w);
}

TEST_CASE("Gaussian shrinker has zero residual") {
  GridMetric3d flat({9, 9, 9}, {0.25, 0.25, 0.25}, {false, false, false});
  std::vector<double> f(flat.g.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = flat.coord(i).squaredNorm() / 4;
  CHECK(soliton_residual(flat, f, SolitonMode::shrinking).sup < 1e-12);
  CHECK(soliton_residual(flat, f, SolitonMode::steady).sup > 0.1);
}

TEST_CASE("preset names") {
  for (const auto& name : preset_names())
    if (name != "flat-torus-perturbed") CHECK_NOTHROW(warped_preset(name, 64).validate());
  CHECK_THROWS_AS(warped_preset("torus", 64), ParameterError);
}
