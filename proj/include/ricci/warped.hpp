#pragma once

// Rotationally symmetric metrics g = phi(x)^2 dx^2 + w(x)^2 g_S2 on x in [0,1].

#include <Eigen/Dense>

#include <algorithm>
#include <string>

#include "ricci/errors.hpp"

namespace ricci {

/// Boundary behaviour at one end of the x-interval.
///  pole:     w = 0 with |w_s| = 1 (smooth closing of the sphere)
///  frozen:   reflecting end, w_s = 0, the end node evolves with the flow
///  pinned:   reflecting end with w prescribed as sqrt(pin - 2t) (exact shrinking cylinder)
///  periodic: both ends identified
enum class EndMode { pole, frozen, pinned, periodic };

enum class Topology { closed_sphere, cylinder_segment };

std::string to_string(EndMode m);
EndMode end_mode_from_string(const std::string& s);

struct WarpedProfile {
  Eigen::VectorXd phi;  // length per unit x
  Eigen::VectorXd w;    // radius of the cross-sphere
  EndMode left = EndMode::pole;
  EndMode right = EndMode::pole;
  double pin_left = 0;   // w^2 + 2t at a pinned end
  double pin_right = 0;
  double t = 0;

  int n() const { return static_cast<int>(w.size()); }
  bool periodic() const { return left == EndMode::periodic; }
  Topology topology() const {
    return (left == EndMode::pole && right == EndMode::pole) ? Topology::closed_sphere : Topology::cylinder_segment;
  }
  /// Coordinate spacing; periodic grids do not repeat the endpoint.
  double h() const { return periodic() ? 1.0 / n() : 1.0 / (n() - 1); }
  double x(int i) const { return i * h(); }

  /// Throws ParameterError / PinchedProfileError when invariants fail.
  void validate() const;
};

/// Closed-form pointwise curvature of the ansatz, per node.
struct WarpedCurvatures {
  Eigen::VectorXd s;        // arclength from the left end
  Eigen::VectorXd ws, wss;  // d_s w, d_s^2 w
  Eigen::VectorXd k_sph;    // (1 - w_s^2)/w^2, plane tangent to the cross-sphere
  Eigen::VectorXd k_mix;    // -w_ss/w, planes containing the radial direction
  Eigen::VectorXd ric_ss;   // Ric(e_s, e_s) = 2 k_mix
  Eigen::VectorXd ric_sph;  // Ric on a unit sphere direction = k_mix + k_sph
  Eigen::VectorXd R;
  double length = 0;          // total arclength (one period when periodic)

  /// |Rm| = 2 sqrt(2 k_mix^2 + k_sph^2)
  Eigen::VectorXd riem_norm() const {
    return 2 * (2 * k_mix.array().square() + k_sph.array().square()).sqrt().matrix();
  }

  double min_sectional(int i) const { return std::min(k_sph[i], k_mix[i]); }
};

WarpedCurvatures warped_curvatures(const WarpedProfile& p);

/// Ricci flow time derivative at fixed x: d_t w and d_t log phi.
struct WarpedRhs {
  Eigen::VectorXd dw;
  Eigen::VectorXd dlogphi;
};

WarpedRhs warped_rhs(const WarpedProfile& p);

/// Riemannian volume 4 pi int w^2 phi dx.
double profile_volume(const WarpedProfile& p);

/// Returns the profile of lambda^2 g (w and phi scale by lambda, time by lambda^2).
WarpedProfile rescale(const WarpedProfile& p, double lambda);

namespace detail {

/// Arrays padded with two ghost nodes each side according to the end modes.
struct Padded {
  Eigen::VectorXd w, phi;  // size n + 4 (n + 5 for periodic, to close the loop)
  int n = 0;
  double h = 0;
  int off = 2;
};

Padded pad(const WarpedProfile& p);

/// Ghost-padded copy of a node field; odd reflection at pole ends when requested.
Eigen::VectorXd pad_field(const WarpedProfile& p, const Eigen::VectorXd& f, bool odd_at_poles);

/// Fourth-order first and second x-derivatives at node i of a padded array.
double dx1(const Eigen::VectorXd& f, int j, double h);
double dx2(const Eigen::VectorXd& f, int j, double h);

/// Cumulative integral over nodes of a padded node field; size n (n + 1 when periodic).
Eigen::VectorXd cumulative(const Eigen::VectorXd& fpad, int n, int count, double h);

/// Even extrapolation of node 0 from nodes 1..3 (f = a + b x^2 + c x^4).
inline double even_extrapolate(double f1, double f2, double f3) { return (15 * f1 - 6 * f2 + f3) / 10; }

}  // namespace detail

/// Arclength positions of the nodes and evaluation of w at arbitrary arclength.
class ProfileInterpolant {
 public:
  explicit ProfileInterpolant(const WarpedProfile& p);
  double length() const { return length_; }
  const Eigen::VectorXd& s() const { return s_; }
  /// Interpolates a node field f (same end parities as w when `odd_at_poles`).
  double eval(const Eigen::VectorXd& f, double s, bool odd_at_poles) const;
  /// Interpolates with explicit reflection parity at each non-periodic end.
  double eval_parity(const Eigen::VectorXd& f, double s, bool odd_left, bool odd_right) const;
  double w(double s) const { return eval(w_, s, true); }

 private:
  Eigen::VectorXd s_, w_;
  double length_;
  EndMode left_, right_;
  bool periodic_;
};

}  // namespace ricci
