#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ricci/presets.hpp"
#include "ricci/surgery.hpp"

using namespace ricci;
using std::numbers::pi;

TEST_CASE("standard cap certificate and shape") {
  auto cap = build_standard_cap(2, 1, 513);
  CHECK(cap.min_sectional >= 0);
  CHECK(cap.min_R > 0);
  CHECK(cap.w(0) == 0);
  CHECK(cap.ws(0) == doctest::Approx(1));
  CHECK(cap.w(2) == doctest::Approx(1).epsilon(1e-10));
  CHECK(cap.ws(2) == doctest::Approx(0).epsilon(1e-12));
  CHECK(cap.w(5) == doctest::Approx(1).epsilon(1e-10));
  // beyond the transition the volume grows like the unit cylinder
  CHECK(cap.volume(5) - cap.volume(3) == doctest::Approx(8 * pi).epsilon(1e-8));
  CHECK(cap.profile.left == EndMode::pole);
  CHECK(cap.profile.right == EndMode::pinned);
}

TEST_CASE("standard cap parameter errors") {
  CHECK_THROWS_AS(build_standard_cap(0.5), ParameterError);
  CHECK_THROWS_AS(build_standard_cap(5), ParameterError);
  CHECK_THROWS_AS(build_standard_cap(2, 0), ParameterError);
  // too short a transition cannot reach radius 1 with w' <= 1 and stay convex
  CHECK_THROWS_AS(build_standard_cap(1), ConstructionError);
}

TEST_CASE("connected sums") {
  TopologyExpression s3{{TopologyLabel::S3}, false};
  TopologyExpression rp{{TopologyLabel::RP3_like}, false};
  TopologyExpression ring{{TopologyLabel::S2xS1_like}, false};
  CHECK(connected_sum(s3, s3).is_sphere());
  auto a = connected_sum(s3, rp);
  CHECK(a.summands == std::vector<TopologyLabel>{TopologyLabel::RP3_like});
  auto b = connected_sum(rp, ring);
  CHECK(b.summands.size() == 2);
  CHECK_FALSE(b.partial);
  TopologyExpression unk{{TopologyLabel::unknown}, true};
  CHECK(connected_sum(s3, unk).partial);
}

TEST_CASE("ledger reverses neck and self-neck surgeries") {
  ComponentLedger l;
  int root = l.add_component(0, TopologyLabel::unknown);
  l.component(root).death = 1;
  l.component(root).fate = ComponentFate::surgered;
  int a = l.add_component(1, TopologyLabel::S3);
  int b = l.add_component(1, TopologyLabel::S3);
  SurgeryEvent e;
  e.time = 1;
  e.kind = SurgeryKind::neck;
  e.components_before = {root};
  e.components_after = {a, b};
  l.events.push_back(e);

  CHECK(l.live_at(0.5) == std::vector<int>{root});
  CHECK(l.live_at(1.0) == std::vector<int>{a, b});
  CHECK(l.surgery_count() == 1);

  auto topo = reconstruct_presurgery_topology(l, 0.5);
  REQUIRE(topo.size() == 1);
  CHECK(topo[0].topology.is_sphere());

  l.events[0].kind = SurgeryKind::self_neck;
  topo = reconstruct_presurgery_topology(l, 0.5);
  CHECK(topo[0].topology.summands == std::vector<TopologyLabel>{TopologyLabel::S2xS1_like});

  SurgeryEvent drop;
  drop.kind = SurgeryKind::removal;
  l.events.push_back(drop);
  CHECK(l.surgery_count() == 1);
}

TEST_CASE("profile topology") {
  CHECK(profile_topology(round_sphere(64)) == TopologyLabel::S3);
  CHECK(profile_topology(cylinder_segment(64, 1, 5, EndMode::periodic)) == TopologyLabel::S2xS1_like);
  CHECK(profile_topology(cylinder_segment(64)) == TopologyLabel::unknown);
}

TEST_CASE("enum names round-trip") {
  for (auto t : {TopologyLabel::S3, TopologyLabel::RP3_like, TopologyLabel::S2xS1_like, TopologyLabel::quotient,
                 TopologyLabel::unknown})
    CHECK(topology_label_from_string(to_string(t)) == t);
  for (auto k : {SurgeryKind::neck, SurgeryKind::self_neck, SurgeryKind::end, SurgeryKind::removal})
    CHECK(surgery_kind_from_string(to_string(k)) == k);
  for (auto f : {ComponentFate::live, ComponentFate::extinct, ComponentFate::removed, ComponentFate::surgered})
    CHECK(component_fate_from_string(to_string(f)) == f);
}

TEST_CASE("volume constant") {
  CHECK(kSurgeryVolumeConstant == doctest::Approx(4 * pi / 3 * std::pow(2.0, -1.5)).epsilon(1e-15));
}

TEST_CASE("surgery argument checks") {
  auto cap = build_standard_cap();
  auto p = round_sphere(64);
  CHECK_THROWS_AS(perform_surgery(p, {}, 0.0, 2, 0.3, cap), ParameterError);
  CHECK_THROWS_AS(perform_surgery(p, {}, 0.1, 1, 0.3, cap), ParameterError);
}
