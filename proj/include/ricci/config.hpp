#pragma once

// Run configuration of the batch front end and its JSON file form.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ricci/flow_engine.hpp"
#include "ricci/surgery.hpp"

namespace ricci {

struct RunConfig {
  std::string scenario = "round-sphere";
  int nodes = 512;
  double t_end = 1.0;
  std::string backend = "warped";  // warped | deturck
  bool surgery = false;
  StepControl control;
  SurgeryParams surgery_params;
  double eps = 1e-2;  // neighbourhood classifier for the summary
  double C = 10;
  bool harnack = true;    // monitor toggles; W2 and R_min are always on
  bool distances = true;
  std::string out = "ricci_out";
  long checkpoint_every = 0;  // steps between checkpoints; 0 disables
  std::string resume;         // checkpoint to resume from
  std::uint64_t seed = 1;     // random marker pairs for the distance monitor
  int random_markers = 2;
  // gauge-fixed backend
  std::array<int, 3> torus_dims{32, 6, 6};
  double torus_eps = 1e-3;
  int torus_mode = 1;

  bool operator==(const RunConfig&) const;
};

/// Field-level diagnostics, "field: problem"; empty when valid.
std::vector<std::string> validate(const RunConfig& c);

std::string render(const RunConfig& c);

/// Throws FormatError on malformed text or unknown fields. Missing fields keep their defaults.
RunConfig parse_run_config(const std::string& text);

/// Scenario names accepted by the front end.
std::vector<std::string> scenario_names();

}  // namespace ricci
