#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ricci/monitors.hpp"
#include "ricci/presets.hpp"

using namespace ricci;
using std::numbers::pi;

namespace {

// R_min following the comparison ODE exactly, scaled by `factor` after t = 0.
MonitorTrace ode_trace(double factor) {
  MonitorTrace tr;
  const double R0 = 6;
  for (int k = 0; k <= 10; ++k) {
    MonitorRecord r;
    r.t = 0.01 * k;
    r.r_min = R0 / (1 - 2 * R0 * r.t / 3) * (k ? factor : 1.0);
    r.r_max = r.r_min;
    r.volume = std::exp(-7 * r.t);
    r.w2 = 4 * pi * (1 - 4 * r.t);
    r.distances = {1.0 - r.t, 2.0};
    tr.records.push_back(r);
  }
  tr.markers = {{0, 1}, {0, 2}};
  tr.nonneg_start = true;
  return tr;
}

}  // namespace

TEST_CASE("R_min comparison passes on the ODE solution and fails below it") {
  CHECK(check_rmin_ode(ode_trace(1.0)).pass);
  auto v = check_rmin_ode(ode_trace(0.9));
  CHECK_FALSE(v.pass);
  CHECK(v.min_gap < 0);
}

TEST_CASE("volume and distance verdicts") {
  auto tr = ode_trace(1.0);
  CHECK(volume_bound_check(tr).pass);
  CHECK(distance_contraction_check(tr).pass);
  tr.records[5].volume = 2;
  CHECK_FALSE(volume_bound_check(tr).pass);
  tr.records[6].distances[1] = 2.5;
  CHECK_FALSE(distance_contraction_check(tr).pass);
}

TEST_CASE("W2 of the round sphere is the equatorial area") {
  const double rho = 1.3;
  CHECK(w2(round_sphere(257, rho)) == doctest::Approx(4 * pi * rho * rho).epsilon(1e-8));
  CHECK(std::isnan(w2(cylinder_segment(64, 1.0, 5.0, EndMode::periodic))));
}

TEST_CASE("pinching vanishes on the sphere") {
  auto c = warped_curvatures(round_sphere(129));
  CHECK(pinching_ratio(c).maxCoeff() == doctest::Approx(0).epsilon(1e-9));
}

TEST_CASE("Harnack expression on the shrinking sphere") {
  // R = 6 / (rho^2 - 4t): d_t R + R/t = R^2 (2/3) + R/t > 0, and V = 0 is the minimiser
  auto p = round_sphere(257);
  p.t = 0.1;
  auto hv = harnack_deficit(p);
  CHECK(hv.value == doctest::Approx(36.0 * 2 / 3 + 6 / 0.1).epsilon(1e-2));
  CHECK(hv.value <= 84 + 1e-6);
}

TEST_CASE("trace of a sphere flow satisfies every verdict") {
  StepControl c;
  auto h = sample_flow(round_sphere(129), c, {0.02, 0.05, 0.1, 0.15});
  auto tr = compute_trace(h);
  REQUIRE(tr.size() == h.size());
  CHECK(tr.nonneg_start);
  CHECK(check_rmin_ode(tr).pass);
  CHECK(check_w2_ode(tr).pass);
  CHECK(volume_bound_check(tr).pass);
  CHECK(distance_contraction_check(tr).pass);
  for (const auto& r : tr.records) CHECK(r.volume == doctest::Approx(2 * pi * pi * std::pow(1 - 4 * r.t, 1.5)).epsilon(1e-4));
}

TEST_CASE("blow-up label of a dumbbell lies at the neck") {
  StepControl c;
  c.monitor_beta = 1;
  auto h = run(dumbbell(128), c, 1.0);
  REQUIRE(h.status.kind == TerminalKind::singular);
  int lab = blowup_label(h);
  int labels = static_cast<int>(h.material.back().size());
  CHECK(std::abs(lab - (labels - 1) / 2) <= 1);
  auto series = pinching_at_label(h, lab);
  CHECK(series.size() == h.size());
}
