#pragma once

// Controlled quantities along a warped flow history: R_min, pinching, W2,
// Harnack expression, volume and distances between material markers.

#include <utility>
#include <vector>

#include "ricci/flow_engine.hpp"

namespace ricci {

struct MonitorRecord {
  double t = 0;
  double r_min = 0, r_max = 0;
  int argmax = -1;
  double volume = 0;
  double min_sectional = 0;
  double pinching_max = 0;       // max over nodes of max(0, -K_min) / (1 + |R|)
  double pinching_at_rmax = 0;   // same ratio at the argmax-R node
  double w2 = 0;                 // area of the minimal stationary cross-sphere (NaN without poles)
  double harnack = 0;            // min over nodes and V of the Harnack expression (NaN if not evaluated)
  std::vector<double> distances; // per marker pair
};

struct MonitorTrace {
  std::vector<MonitorRecord> records;
  std::vector<std::pair<int, int>> markers;  // material label index pairs
  bool nonneg_start = false;                 // all sectional curvatures >= -tol at t = 0
  double ds_max = 0;                         // largest node arclength spacing seen
  std::size_t size() const { return records.size(); }
};

/// Evaluates every monitor per snapshot; empty `markers` tracks (first,last) and (first,middle) labels.
MonitorTrace compute_trace(const FlowHistory& h, std::vector<std::pair<int, int>> markers = {});

struct IntervalVerdict {
  double t0 = 0, t1 = 0;
  double value = 0;  // observed quantity at t1
  double bound = 0;  // comparison value at t1
  double tol = 0;
  double gap = 0;    // signed margin relative to scale; 0 means saturated
  bool pass = true;
};

struct Verdict {
  bool pass = true;
  double max_gap = 0;  // largest relative margin; small means saturated
  double min_gap = 0;  // smallest relative margin (most negative = worst violation)
  std::vector<IntervalVerdict> intervals;
};

/// d_t R_min >= (2/3) R_min^2, compared against the exact ODE solution over each interval.
Verdict check_rmin_ode(const MonitorTrace& tr, double tol_rel = 1e-3);

/// d_t W2 <= -4 pi - R_min W2 / 2, integrated over each interval.
Verdict check_w2_ode(const MonitorTrace& tr, double tol_rel = 1e-3);

/// Vol(t) <= Vol(0) exp(-R_min(0) t); non-increasing when curvature starts non-negative.
Verdict volume_bound_check(const MonitorTrace& tr, double tol_rel = 1e-6);

/// Marker distances non-increasing (meaningful for non-negatively curved runs).
Verdict distance_contraction_check(const MonitorTrace& tr, double tol_rel = 1e-6);

/// Pinching ratio max(0, -K_min)/(1 + |R|) per node.
Eigen::VectorXd pinching_ratio(const WarpedCurvatures& c);

/// Ratio series at the node nearest a material label, per snapshot.
std::vector<double> pinching_at_label(const FlowHistory& h, int label);

/// Material label nearest the terminal argmax-R location.
int blowup_label(const FlowHistory& h);

/// Area of the minimal stationary cross-sphere, or NaN when the profile has no poles.
double w2(const WarpedProfile& p);

struct HarnackValue {
  double value = 0;  // min over nodes of the V-minimised expression
  int node = -1;
  double R = 0;      // scalar curvature at that node
  double r_max = 0;
};

/// Harnack expression d_t R + R/t + 2 <dR,V> + 2 Ric(V,V) minimised over V, with d_t R = Delta R + 2|Ric|^2.
HarnackValue harnack_deficit(const WarpedProfile& p);

/// Same, on the snapshot nearest time t.
HarnackValue harnack_deficit(const FlowHistory& h, double t);

}  // namespace ricci
