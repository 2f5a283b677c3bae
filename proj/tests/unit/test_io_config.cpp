#include <doctest.h>

#include <cmath>
#include <limits>

#include "ricci/config.hpp"
#include "ricci/deturck.hpp"
#include "ricci/io.hpp"
#include "ricci/presets.hpp"

using namespace ricci;

TEST_CASE("doubles survive JSON exactly, including non-finite values") {
  for (double x : {0.1, 1.0 / 3, 1e-300, -2.5e17, std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()}) {
    auto text = io::number(x).dump();
    CHECK(io::to_double(io::Json::parse(text)) == x);
  }
  CHECK(std::isnan(io::to_double(io::number(std::nan("")))));
  CHECK(io::format_double(0.1) == "0.1");
}

TEST_CASE("config render and parse are inverse") {
  RunConfig c;
  c.scenario = "dumbbell";
  c.nodes = 1024;
  c.surgery = true;
  c.surgery_params.delta = 0.25;
  c.control.cfl_fraction = 0.15;
  c.seed = 42;
  c.torus_dims = {16, 5, 5};
  auto back = parse_run_config(render(c));
  CHECK(back == c);
  CHECK(render(back) == render(c));
  CHECK(parse_run_config("{}") == RunConfig{});
}

TEST_CASE("config rejects unknown fields and bad values") {
  CHECK_THROWS_AS(parse_run_config(R"({"nodez": 5})"), FormatError);
  CHECK_THROWS_AS(parse_run_config(R"({"surgery": {"deltaa": 0.1}})"), FormatError);
  CHECK_THROWS_AS(parse_run_config(R"({"nodes": "many"})"), FormatError);
  CHECK_THROWS_AS(parse_run_config("{"), FormatError);
  RunConfig c;
  c.nodes = 4;
  c.surgery_params.delta = 2;
  auto errs = validate(c);
  REQUIRE(errs.size() == 2);
  CHECK(errs[0].rfind("nodes:", 0) == 0);
  CHECK(errs[1].rfind("surgery.delta:", 0) == 0);
  c = RunConfig{};
  c.surgery = true;
  c.checkpoint_every = 10;
  CHECK_FALSE(validate(c).empty());
  CHECK(validate(RunConfig{}).empty());
}

TEST_CASE("chart JSON round-trip and symmetry check") {
  auto m = flat_torus_perturbed({8, 5, 5}, 0.01, 1, 0);
  m.g[3](0, 1) = m.g[3](1, 0) = 0.05;
  auto j = io::chart_to_json(m);
  auto back = io::chart_from_json<3>(io::Json::parse(j.dump()));
  CHECK(back.dims == m.dims);
  CHECK(back.spacing == m.spacing);
  CHECK(back.periodic == m.periodic);
  for (std::size_t n = 0; n < m.g.size(); ++n) CHECK(back.g[n] == m.g[n]);

  auto bad = j;
  bad["components"][3 * 9 + 1] = 0.2;  // g_01 of node 3 differs from g_10
  CHECK_THROWS_AS(io::chart_from_json<3>(bad), DegenerateMetricError);
  CHECK_THROWS_AS(io::chart_from_json<2>(j), FormatError);
}

TEST_CASE("checkpoint round-trip is bit exact") {
  StepControl c;
  auto st = start_run(dumbbell(96), c);
  advance(st, c, 1.0, 150);
  io::Checkpoint ck{st, c, 1.0, io::Json::parse(render(RunConfig{}))};
  auto back = io::checkpoint_from_json(io::Json::parse(io::to_json(ck).dump()));
  CHECK(back.state.steps == st.steps);
  CHECK(back.state.current.w == st.current.w);
  CHECK(back.state.current.phi == st.current.phi);
  CHECK(back.state.current.t == st.current.t);
  CHECK(back.state.labels == st.labels);
  CHECK(back.state.history.times == st.history.times);

  advance(st, c, 0.004);
  advance(back.state, back.control, 0.004);
  CHECK(back.state.current.w == st.current.w);
  CHECK(io::to_json(back.state.history) == io::to_json(st.history));
}

TEST_CASE("ledger round-trip") {
  ComponentLedger l;
  int a = l.add_component(0, TopologyLabel::S3);
  l.component(a).death = 0.5;
  l.component(a).fate = ComponentFate::extinct;
  l.add_component(0.25, TopologyLabel::S2xS1_like);
  SurgeryEvent e;
  e.time = 0.25;
  e.kind = SurgeryKind::end;
  e.h = 1e-3;
  e.components_before = {a};
  e.components_after = {1};
  l.events.push_back(e);
  auto back = io::ledger_from_json(io::Json::parse(io::to_json(l).dump()));
  CHECK(io::to_json(back) == io::to_json(l));
  CHECK(std::isinf(back.component(1).death));
  CHECK_THROWS_AS(io::ledger_from_json(io::Json::parse(R"({"format": "other"})")), FormatError);
}

TEST_CASE("flat torus is a fixed point of the gauge-fixed flow") {
  GridMetric3d flat({8, 8, 8}, {0.125, 0.125, 0.125}, {true, true, true});
  for (const auto& t : deturck_rhs(flat)) CHECK(t.cwiseAbs().maxCoeff() == 0);
  auto m = flat_torus_perturbed({16, 5, 5}, 1e-3, 1, 1);
  auto tr = deturck_flow(m, 0.01);
  for (std::size_t k = 1; k < tr.energy.size(); ++k) CHECK(tr.energy[k] <= tr.energy[k - 1]);
  CHECK(tr.energy.back() < tr.energy.front());
}
