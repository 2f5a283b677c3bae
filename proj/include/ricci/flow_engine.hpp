#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ricci/warped.hpp"

namespace ricci {

struct StepControl {
  double cfl_fraction = 0.2;     // dt <= cfl_fraction * (min ds)^2
  double max_R_threshold = 0;    // stop once max R exceeds this; <= 0 means 1e4 x initial max |R|
  int regrid_interval = 20;      // steps between regrid checks; 0 disables regridding
  double curvature_dt = 0.02;    // dt <= curvature_dt / max |R|
  double monitor_beta = 0;       // curvature weight of the regrid monitor (0: uniform arclength)
  double regrid_tolerance = 1.5; // regrid once cell masses spread beyond this ratio
  double snapshot_dt = 1e-3;     // record a snapshot at least this often in time
  double snapshot_growth = 1.25; // ... and whenever max R grows by this factor
  double extinct_fraction = 0.05;  // min R / max R above this at the stop means extinction
  long max_steps = 50'000'000;
  int material_labels = 65;      // tracked material points; 0 tracks one per node

  void validate() const;
};

enum class TerminalKind { running, singular, extinct };

std::string to_string(TerminalKind k);

struct TerminalStatus {
  TerminalKind kind = TerminalKind::running;
  double time = 0;    // stop time (or extinction estimate for extinct)
  int node = -1;      // argmax R node at the stop
  double s = 0;       // its arclength position
  double x = 0;       // its coordinate
  double R = 0;       // max R at the stop
};

struct FlowHistory {
  std::vector<double> times;
  std::vector<WarpedProfile> snapshots;
  std::vector<Eigen::VectorXd> material;  // arclength of tracked material labels per snapshot
  TerminalStatus status;
  long steps = 0;
  double threshold = 0;

  std::size_t size() const { return times.size(); }
};

/// Evaluation of the gauge-fixed evolution at one state.
struct FlowDerivative {
  Eigen::VectorXd dw;       // d_t w at fixed coordinate x
  double dlog_length = 0;   // d_t log L; phi scales uniformly
  Eigen::VectorXd drift;    // d_t of arclength (from the left end) of material points at node positions
  Eigen::VectorXd tangential;  // arclength velocity of coordinate points relative to material ones
  WarpedCurvatures curv;
};

FlowDerivative flow_derivative(const WarpedProfile& p);

/// Largest dt the step control admits for this profile.
double stable_dt(const WarpedProfile& p, const StepControl& c, const WarpedCurvatures& curv);

/// One explicit RK2 step; throws ParameterError when dt breaks the CFL bound.
WarpedProfile step(const WarpedProfile& p, double dt, const StepControl& c);

/// Re-parametrises x so that the monitor 1 + beta L |R|^(1/2) is equidistributed.
WarpedProfile regrid(const WarpedProfile& p, double beta);

/// Same construction onto n_out nodes.
WarpedProfile resample(const WarpedProfile& p, int n_out, double beta);

/// Resumable flow state.
struct RunnerState {
  WarpedProfile current;
  Eigen::VectorXd labels;  // material label arclengths
  long steps = 0;
  double next_snapshot = 0;
  double last_snapshot_R = 0;
  FlowHistory history;
};

/// Records the initial snapshot and places the material labels.
RunnerState start_run(const WarpedProfile& p, const StepControl& c);

/// Advances until t_end, a terminal status, or `step_budget` steps (< 0: unlimited).
/// Returns true when the run is finished.
bool advance(RunnerState& st, const StepControl& c, double t_end, long step_budget = -1);

FlowHistory run(const WarpedProfile& p, const StepControl& c, double t_end);

/// Flow recording snapshots exactly at the given increasing times (plus the start); stops early at a terminal status.
FlowHistory sample_flow(const WarpedProfile& p, StepControl c, const std::vector<double>& times);

/// Rescales every snapshot, time stamp and material label of a history by lambda (times by lambda^2).
FlowHistory rescale(const FlowHistory& h, double lambda);

}  // namespace ricci
