#pragma once

#include <string>
#include <vector>

#include "ricci/warped.hpp"

namespace ricci {

/// Round S^3 of radius rho: w = rho sin(pi x), phi = pi rho.
WarpedProfile round_sphere(int n, double rho = 1.0);

/// Cylinder w = w0 of the given length with frozen or periodic ends.
WarpedProfile cylinder_segment(int n, double w0 = 1.0, double length = 20.0, EndMode ends = EndMode::frozen);

/// w = rho sin(pi x) (1 - depth * sum_k exp(-|u_k|^power)), u_k = (cos(pi x) - cos(pi c_k)) / (pi width),
/// with phi = pi rho (1 - depth * sum_k exp(-|u_k(0)|^power)) so that |w_s| = 1 at the poles.
/// An optional dimple multiplies by (1 - dimple_depth * sum_k exp(-v_k^2)), v_k built like u_k.
struct DumbbellShape {
  double rho = 1.0;
  double depth = 0.8;
  double width = 0.2;
  int power = 8;
  std::vector<double> centers{0.5};
  double dimple_depth = 0.05;  // narrow Gaussian dimple at each center; seeds the pinch at the center
  double dimple_width = 0.0285;
};

WarpedProfile dumbbell(int n, const DumbbellShape& shape = {});

/// Three bulbs joined by two necks at x = 1/3 and 2/3.
DumbbellShape double_dumbbell_shape();

/// Names: round-sphere, cylinder-segment, cylinder-periodic, dumbbell, double-dumbbell.
WarpedProfile warped_preset(const std::string& name, int n);

std::vector<std::string> preset_names();

}  // namespace ricci
