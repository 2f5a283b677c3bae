#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ricci/presets.hpp"
#include "ricci/reduced_geometry.hpp"

using namespace ricci;
using std::numbers::pi;

namespace {

ReducedLattice small_lattice(const FlowHistory& h) {
  ReducedLengthOptions o;
  o.refine = 1;
  o.theta_nodes = 3;
  o.subcell = false;
  o.base_spacing = -1;
  return ReducedLattice(h, {5, 0.8}, o);
}

}  // namespace

TEST_CASE("dynamic programming agrees with enumeration") {
  auto h = flat_history(33, 2.0, 6, {0.7, 0.8, 0.85, 0.9, 0.95, 1.0});
  auto lat = small_lattice(h);
  auto g = reduced_length_field(lat);
  CHECK((g.L.back() - reduced_length_brute_force(lat)).cwiseAbs().maxCoeff() == 0);
  CHECK(dp_optimality_defect(lat, g) == 0);
}

TEST_CASE("staying at the base costs nothing on flat space") {
  auto h = flat_history(33, 2.0, 6, {0.7, 0.8, 0.85, 0.9, 0.95, 1.0});
  auto lat = small_lattice(h);
  std::vector<int> path(lat.levels(), lat.base_site());
  CHECK(l_length_of_path(lat, path) == doctest::Approx(0).epsilon(1e-14));
  auto g = reduced_length_field(lat);
  for (int k = 1; k < lat.levels(); ++k) CHECK(g.L[k][lat.base_site()] == doctest::Approx(0).epsilon(1e-14));
}

TEST_CASE("flat reduced volume is one") {
  std::vector<double> ts;
  const int K = 9;
  for (int k = 0; k < K; ++k) {
    double sg = 0.5 * (K - 1 - k) / (K - 1);
    ts.push_back(1.0 - sg * sg);
  }
  auto h = flat_history(257, 8.0, 65, ts);
  ReducedLengthOptions o;
  o.refine = 2;
  ReducedLattice lat(h, {K - 1, 0.0}, o);
  auto lad = reduced_volume_ladder(lat, reduced_length_field(lat));
  REQUIRE(lad.size() == static_cast<std::size_t>(K - 1));
  for (double v : lad) CHECK(v == doctest::Approx(1).epsilon(1e-2));
}

TEST_CASE("monotonicity verdict") {
  CHECK(check_reduced_volume_monotone({1.0, 0.99, 0.98}).pass);
  auto v = check_reduced_volume_monotone({1.0, 0.99, 1.01}, 1e-3);
  CHECK_FALSE(v.pass);
  CHECK(v.max_increase == doctest::Approx(0.02));
  CHECK(check_reduced_volume_monotone({1.0, 0.99, 1.01}, {0, 0.01, 0.01}, 1e-3).pass);
}

TEST_CASE("geodesic ball volume on the unit 3-sphere") {
  // Vol B(r) = pi (2r - sin 2r)
  auto p = round_sphere(513);
  for (double r : {0.3, 1.0}) {
    double exact = pi * (2 * r - std::sin(2 * r));
    CHECK(geodesic_ball_volume(p, 0.0, r) == doctest::Approx(exact).epsilon(1e-3));
    CHECK(geodesic_ball_volume(p, pi / 2, r) == doctest::Approx(exact).epsilon(1e-3));
  }
}

TEST_CASE("points outside the history are rejected") {
  auto h = flat_history(33, 2.0, 6, {0.9, 1.0});
  CHECK_THROWS_AS(ReducedLattice(h, {5, 0.5}), DomainError);
  CHECK_THROWS_AS(ReducedLattice(h, {1, 0.5}), ResolutionError);
}
