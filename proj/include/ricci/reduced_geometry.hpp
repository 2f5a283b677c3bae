#pragma once

// Reduced length and reduced volume over a warped flow history, and the
// kappa-noncollapsing diagnostic.
//
// Paths live in the meridian half-plane (s, theta), theta the angle on the
// cross-sphere from the basepoint's direction; projecting any path onto it
// does not increase its length, so minimising there is exact. Spatial lattice
// points are material points (fractional label index), so a lattice site is a
// fixed point of the manifold across snapshots; they are graded in size away
// from the basepoint so that the smallest tau level is resolved. With sigma = sqrt(tau) a step
// at constant speed in sigma costs avg(d^2) / (2 dsigma), the squared length
// taken linear in tau between levels; int R sqrt(tau) dtau is integrated in
// closed form with 1/R linear in tau (R linear when either end is not positive).
// Both models are exact on round shrinking spheres and cylinders.

#include <Eigen/Dense>

#include <vector>

#include "ricci/flow_engine.hpp"

namespace ricci {

struct SpacetimePoint {
  int snapshot = 0;  // history index of t0
  double s = 0;      // arclength at that snapshot
};

struct ReducedLengthOptions {
  int refine = 4;          // lattice sites per material label interval, away from the basepoint
  double base_spacing = 0; // site spacing at the basepoint; 0: half the first level's sqrt(tau); < 0: uniform sites
  int level_stride = 1;    // use every n-th snapshot of the window (the last is always kept)
  double grade = 0.05;     // growth of the site spacing per unit distance from the basepoint
  int theta_nodes = 0;     // > 0: uniform grid on [0, pi]; 0: 1 node at a pole basepoint, else geometric from the basepoint
  bool subcell = true;     // refine each minimum by a local quadratic fit (off: pure lattice paths)
  double light_cone = 0;   // moves longer than c sqrt(sqrt(tau_max) dsigma) are skipped; 0 = unlimited
  double tau_max = 0;      // 0: all earlier snapshots
};

/// Lattice of admissible spacetime sites; levels run backward from the basepoint (tau_0 = 0).
class ReducedLattice {
 public:
  ReducedLattice(const FlowHistory& h, SpacetimePoint base, const ReducedLengthOptions& opt = {});

  int levels() const { return static_cast<int>(taus_.size()); }
  int sites() const { return ns_ * nth_; }
  int s_sites() const { return ns_; }
  int theta_sites() const { return nth_; }
  double tau(int k) const { return taus_[k]; }
  int snapshot(int k) const { return snap_[k]; }
  int base_site() const { return base_; }
  double theta(int m) const { return theta_[m]; }
  double sigma(int k, int a) const { return sig_[k][a / nth_]; }
  double w(int k, int a) const { return w_[k][a / nth_]; }
  double R(int k, int a) const { return R_[k][a / nth_]; }
  double arclength(int k) const { return len_[k]; }
  bool periodic() const { return periodic_; }

  /// Step cost from site a at level k to site b at level k + 1, or +inf when outside the light cone.
  double step_cost(int k, int a, int b) const;

  /// Split of the step cost between s-sites: cost = a + b dtheta^2.
  struct PairCost {
    double a = 0, b = 0;
    double d2 = 0;  // squared s-distance averaged over the step (light cone test)
    double w2 = 0;  // averaged w^2
  };
  PairCost pair_cost(int k, int is, int js) const;
  double cost_from(const PairCost& pc, int k, int ma, int mb) const;
  bool subcell() const { return subcell_; }

  /// Quadrature weight of site a at level k for int f dV.
  double volume_weight(int k, int a) const;

 private:
  std::vector<double> taus_;
  std::vector<int> snap_;
  std::vector<Eigen::VectorXd> sig_, w_, R_;
  std::vector<double> len_;
  Eigen::VectorXd theta_;
  int ns_ = 0, nth_ = 1, base_ = 0;
  bool periodic_ = false;
  bool subcell_ = true;
  double cone2_ = 0;  // squared light-cone length per unit dsigma
};

struct LGeodesicGrid {
  SpacetimePoint base;
  std::vector<double> taus;
  std::vector<Eigen::VectorXd> L;  // per level, per site (+inf when unreachable)
  std::vector<Eigen::VectorXd> l;  // L / (2 sqrt(tau)); level 0 holds 0 at the base
  std::vector<Eigen::VectorXi> parent;
};

/// L-length of a lattice path (one site per level starting at the base).
double l_length_of_path(const ReducedLattice& lat, const std::vector<int>& path);

/// Dynamic programming over the lattice.
LGeodesicGrid reduced_length_field(const ReducedLattice& lat);
LGeodesicGrid reduced_length_field(const FlowHistory& h, SpacetimePoint base, const ReducedLengthOptions& opt = {});

/// Minimal L per site at the last level by exhaustive enumeration (small lattices only).
Eigen::VectorXd reduced_length_brute_force(const ReducedLattice& lat);

/// Largest improvement any single-step relaxation would make (0 for an optimal field).
double dp_optimality_defect(const ReducedLattice& lat, const LGeodesicGrid& g);

/// (4 pi tau)^(-3/2) int exp(-l) dV at level k (k >= 1).
double reduced_volume(const ReducedLattice& lat, const LGeodesicGrid& g, int k);

/// Reduced volume at every level k >= 1.
std::vector<double> reduced_volume_ladder(const ReducedLattice& lat, const LGeodesicGrid& g);

struct ReducedVolumeEstimate {
  double value = 0;
  double error = 0;  // |value - same quadrature on every other site|
};

ReducedVolumeEstimate reduced_volume_estimate(const ReducedLattice& lat, const LGeodesicGrid& g, int k);

struct MonotoneVerdict {
  bool pass = true;
  double max_increase = 0;  // largest V(k+1) - V(k)
  double tol = 0;
};

MonotoneVerdict check_reduced_volume_monotone(const std::vector<double>& ladder, double tol = 1e-3);

/// Same, each step allowed the sum of the two levels' error estimates on top of tol.
MonotoneVerdict check_reduced_volume_monotone(const std::vector<double>& ladder, const std::vector<double>& errors,
                                              double tol);

struct KappaReport {
  bool normalized_curvature_ok = false;  // |Rm| <= r^-2 on the parabolic cylinder
  double volume_ratio = 0;               // Vol(B(x, r)) / r^3
  double ball_volume = 0;
};

/// Per-basepoint record: tau ladder, reduced volume ladder with error estimates, monotonicity verdict.
struct ReducedVolumeReport {
  SpacetimePoint base;
  std::vector<double> taus, values;
  std::vector<double> errors;  // spatial quadrature estimate plus the change on halving the tau levels
  MonotoneVerdict verdict;
};

ReducedVolumeReport reduced_volume_report(const FlowHistory& h, SpacetimePoint base, ReducedLengthOptions opt = {},
                                          double tol = 1e-3);

/// Ball volume by geodesic polar coordinates in the meridian plane, out to the cut locus.
double geodesic_ball_volume(const WarpedProfile& p, double s0, double r, int rays = 512, int steps = 400);

/// Static flat space in polar form: pole at s = 0, frozen end at `radius`, one snapshot per time,
/// `labels` material points spread uniformly.
FlowHistory flat_history(int nodes, double radius, int labels, const std::vector<double>& times);

KappaReport kappa_noncollapse(const FlowHistory& h, SpacetimePoint x, double r);

}  // namespace ricci
