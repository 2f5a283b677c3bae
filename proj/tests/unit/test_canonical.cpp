#include <doctest.h>

#include <cmath>

#include "ricci/canonical_neighborhoods.hpp"
#include "ricci/presets.hpp"
#include "ricci/reduced_geometry.hpp"

using namespace ricci;

TEST_CASE("curvature scale") {
  auto p = round_sphere(129, 2.0);
  CHECK(curvature_scale(p, 64) == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-6));
  auto flat = flat_history(33, 2.0, 6, {1.0}).snapshots[0];
  CHECK_THROWS_AS(curvature_scale(flat, 10), NotHighCurvatureError);
}

TEST_CASE("round sphere is eps-round everywhere") {
  auto labels = classify_profile(round_sphere(257));
  for (const auto& l : labels) CHECK(l.kind == NeighborhoodKind::eps_round);
}

TEST_CASE("long periodic cylinder is a neck") {
  // R = 1 at w = sqrt 2; the neck window of 1/eps scales needs a long loop
  auto p = cylinder_segment(2048, std::sqrt(2.0), 400.0, EndMode::periodic);
  auto c = warped_curvatures(p);
  CHECK(neck_quality(p, c, 100, 100.0) < 1e-12);
  auto l = classify_point(p, 100);
  CHECK(l.kind == NeighborhoodKind::eps_neck);
  CHECK(l.scale == doctest::Approx(1.0));
}

TEST_CASE("whole high-curvature component") {
  auto p = cylinder_segment(256, 1.0, 20.0, EndMode::periodic);
  auto rep = find_horns(p, 1.0);
  REQUIRE(rep.regions.size() == 1);
  CHECK(rep.regions[0].kind == RegionKind::component);
  CHECK(rep.low_nodes.empty());
  CHECK(find_horns(p, 10.0).regions.empty());
}

TEST_CASE("kind names") {
  CHECK(to_string(NeighborhoodKind::eps_neck) == "eps_neck");
  CHECK(to_string(RegionKind::double_horn) == "double_horn");
}
