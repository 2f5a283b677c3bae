#pragma once

// File forms: JSON for charts, profiles, checkpoints and ledgers; CSV for traces.
// Doubles go through JSON numbers, which round-trip exactly; non-finite values
// are written as the strings "inf", "-inf" and "nan".

#include <string>

#include "json.hpp"
#include "ricci/chart_geometry.hpp"
#include "ricci/flow_engine.hpp"
#include "ricci/monitors.hpp"
#include "ricci/surgery.hpp"

namespace ricci::io {

using Json = nlohmann::json;

Json number(double x);
double to_double(const Json& j);

Json to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

/// {"dim", "dims", "spacing", "periodic", "components"}: components row-major over nodes,
/// each node's Dim x Dim block row-major.
template <int Dim>
Json chart_to_json(const GridMetric<double, Dim>& m);

/// Throws FormatError on shape errors, DegenerateMetricError on asymmetric or indefinite nodes.
template <int Dim>
GridMetric<double, Dim> chart_from_json(const Json& j);

Json to_json(const WarpedProfile& p);
WarpedProfile profile_from_json(const Json& j);

Json to_json(const StepControl& c);
StepControl step_control_from_json(const Json& j);

Json to_json(const TerminalStatus& s);
TerminalStatus terminal_status_from_json(const Json& j);

Json to_json(const FlowHistory& h);
FlowHistory history_from_json(const Json& j);

/// Full runner state plus the control and target time of the run.
struct Checkpoint {
  RunnerState state;
  StepControl control;
  double t_end = 0;
  Json config;  // opaque, carried for the front end
};

Json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const Json& j);

Json to_json(const ComponentLedger& l);
ComponentLedger ledger_from_json(const Json& j);

/// One row per snapshot; `component` goes in the first column.
std::string trace_csv_header(const MonitorTrace& tr);
std::string trace_csv_rows(const MonitorTrace& tr, int component);

/// Shortest text that parses back to the same double.
std::string format_double(double x);

std::string read_file(const std::string& path);
/// Writes through a temporary file and a rename.
void write_file(const std::string& path, const std::string& text);

Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);

}  // namespace ricci::io
