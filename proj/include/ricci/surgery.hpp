#pragma once

// Standard cap, cut-and-glue on warped profiles, the component ledger and the
// flow-with-surgery driver.

#include <limits>
#include <string>
#include <vector>

#include "ricci/canonical_neighborhoods.hpp"
#include "ricci/flow_engine.hpp"
#include "ricci/warped.hpp"

namespace ricci {

/// Unit-radius cap: w'(v) = G(v/s0) with G(u) = exp(-a u^2 / (1 - u^2)^k) for u < 1, G = 0 beyond,
/// v the distance from the tip. `a` is solved so that w reaches 1 exactly at v = s0.
struct StandardCap {
  double transition_length = 2;  // s0
  int smoothness_order = 1;      // k
  double a = 0;
  double cylinder_length = 8;    // unit cylinder kept after the transition in `profile`
  WarpedProfile profile;         // pole on the left, pinned unit cylinder on the right
  double min_sectional = 0;      // certificate over the transition, sampled finely
  double min_R = 0;

  double w(double v) const;    // radius at distance v from the tip
  double ws(double v) const;
  double wss(double v) const;
  double volume(double v) const;  // volume between the tip and distance v, 4 pi int w^2

  std::vector<double> table_;  // int_0^u G at panel edges of [0, 1]
};

/// Throws ParameterError outside transition_length in [1, 4] or smoothness_order < 1,
/// ConstructionError (sample index) when the certificate K >= 0, R > 0 fails.
StandardCap build_standard_cap(double transition_length = 2, int smoothness_order = 1, int nodes = 513,
                               double cylinder_length = 8);

struct StandardCapReport {
  FlowHistory history;            // cap scaled to R = 1 on its cylinder (radius sqrt 2)
  std::vector<double> far_R;      // R at the far-field probe per snapshot
  std::vector<double> rmin_scaled;  // R_min (1 - t) per snapshot
  double far_field_error = 0;     // max relative deviation of far_R from 1 / (1 - t)
  double inf_rmin_scaled = 0;
  double min_sectional = 0;       // over all snapshots, in units of R_max
};

/// Flows the cap with the far end pinned to the exact shrinking cylinder and samples at `times`.
StandardCapReport evolve_standard_cap(const StandardCap& cap, const StepControl& control,
                                      const std::vector<double>& times = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});

/// One cut: the sphere A h beyond the site, towards `direction` (the discarded tip).
struct SurgeryCut {
  SurgerySite site;
  int direction = 1;
  int region = 0;  // high-curvature region the cut belongs to
};

struct SurgeryOptions {
  int nodes = 0;             // nodes per piece after the glue; 0 keeps the input count
  double monitor_beta = 1;   // monitor used for the final resample
  double half_length = 2;    // delta-neck window, in units of h
};

struct SurgeryOutcome {
  std::vector<WarpedProfile> pieces;          // retained components, ordered by arclength
  std::vector<std::vector<int>> piece_cuts;   // cut indices capped on each piece
  std::vector<double> region_volume_removed;  // by region index
  double volume_before = 0;
  double volume_after = 0;
  double volume_removed = 0;  // from the construction, independent of volume_after
  double volume_tolerance = 0;  // quadrature error estimate from 2x resampling of input and pieces
  double max_blend_wss = 0;   // max |w_ss| inside the blend zones after resampling
  double min_sectional = 0;   // min sectional curvature over the pieces
};

/// Cuts every horn at its cut sphere, discards the tips and glues the cap scaled to the cut radius,
/// blending the slope of w to zero over [site, cut]. Throws UnsafeSurgeryError when a cut leaves its delta-neck window,
/// the site quality exceeds delta or the cuts do not bound the retained pieces consistently, and
/// BlendFailureError when a piece has K < -0.1 h^-2.
SurgeryOutcome perform_surgery(const WarpedProfile& p, const std::vector<SurgeryCut>& cuts, double h, double A,
                               double delta, const StandardCap& cap, const SurgeryOptions& opt = {});

/// Lower bound constant: every horn surgery removes at least c h^3, c = (4 pi / 3) 2^(-3/2).
inline constexpr double kSurgeryVolumeConstant = 1.4809609793861218;

enum class TopologyLabel { S3, RP3_like, S2xS1_like, quotient, unknown };

std::string to_string(TopologyLabel t);
TopologyLabel topology_label_from_string(const std::string& s);

enum class ComponentFate { live, extinct, removed, surgered };

std::string to_string(ComponentFate f);
ComponentFate component_fate_from_string(const std::string& s);

struct LedgerComponent {
  int id = 0;
  double birth = 0;
  double death = std::numeric_limits<double>::infinity();
  TopologyLabel label = TopologyLabel::unknown;  // known topology of this component itself
  ComponentFate fate = ComponentFate::live;
};

enum class SurgeryKind {
  neck,      // two caps on different pieces: reverse is a connected sum
  self_neck, // two caps on one piece: reverse adds an S2 x S1 summand
  end,       // one cap, the tip beyond it ran to an end: reverse adds an S3 summand
  removal    // a whole component dropped
};

std::string to_string(SurgeryKind k);
SurgeryKind surgery_kind_from_string(const std::string& s);

struct SurgeryEvent {
  double time = 0;
  int horn = 0;  // region index at that time
  SurgeryKind kind = SurgeryKind::neck;
  double h = 0, A = 0, delta = 0;
  double quality = 0;  // worst site quality of the region
  double volume_removed = 0;
  std::vector<int> components_before, components_after;
};

struct ComponentLedger {
  std::vector<LedgerComponent> components;
  std::vector<SurgeryEvent> events;

  int add_component(double birth, TopologyLabel label = TopologyLabel::unknown);
  LedgerComponent& component(int id);
  const LedgerComponent& component(int id) const;
  /// Components with birth <= t < death.
  std::vector<int> live_at(double t) const;
  int surgery_count() const;  // events other than removals
};

struct TopologyExpression {
  std::vector<TopologyLabel> summands;  // connected sum, S3 summands dropped unless alone
  bool partial = false;                 // an unknown label was met

  std::string to_string() const;
  bool is_sphere() const { return !partial && summands.size() == 1 && summands[0] == TopologyLabel::S3; }
};

/// Connected sum with S3 as the identity.
TopologyExpression connected_sum(const TopologyExpression& a, const TopologyExpression& b);

struct ComponentTopology {
  int id = 0;
  TopologyExpression topology;
};

/// For each component live at `time`, its topology rebuilt from later labels by undoing surgeries.
std::vector<ComponentTopology> reconstruct_presurgery_topology(const ComponentLedger& ledger, double time);

/// Topology of a closed profile: S3 for a sphere, S2xS1 for a periodic one, unknown otherwise.
TopologyLabel profile_topology(const WarpedProfile& p);

struct SurgeryParams {
  double r_fraction = 2.5e-4;  // low curvature means R < r_fraction * R at the singular stop
  double h_scale = 0.05;     // h = h_scale * r, r the low-curvature scale
  double A = 2;
  double delta = 0.3;
  NeckCriteria horn_neck{2.0, 0.35};
  double transition_length = 2;
  int smoothness_order = 1;
  int max_refinements = 3;   // node doublings when a delta-neck is under-resolved
  int max_h_halvings = 2;    // retries with h / 2 when no delta-neck is found
  SurgeryOptions glue;
  int max_surgeries = 64;
};

struct ComponentRun {
  int id = 0;
  FlowHistory history;
};

/// Volume books and glue diagnostics of one singular time.
struct SurgeryBooks {
  double time = 0;
  double h = 0;
  int nodes = 0;  // nodes of the profile the cuts were placed on
  double volume_before = 0, volume_after = 0, volume_removed = 0, volume_tolerance = 0;
  double max_blend_wss = 0, min_sectional = 0;
};

struct SurgeryRunResult {
  std::vector<ComponentRun> runs;
  std::vector<SurgeryBooks> books;
  ComponentLedger ledger;
  double h = 0;                // surgery scale of the run (0 when no surgery happened)
  int extinctions = 0;
  double extinction_time = 0;  // last extinction
  bool finished = false;       // every component extinct or removed before t_end
  double volume_budget = 0;    // Vol(0) exp(-R_min(0) t) / (c h^3)
  bool discreteness_ok = true; // surgeries <= budget + removals
  std::vector<std::string> notes;
};

/// Alternates flow and surgery until every component is extinct or t_end.
/// Throws ResolutionError when refinements or h halvings run out.
SurgeryRunResult run_with_surgery(const WarpedProfile& initial, const StepControl& control, const SurgeryParams& params,
                                  double t_end);

}  // namespace ricci
