#include "ricci/presets.hpp"

#include <cmath>
#include <numbers>

namespace ricci {

using std::numbers::pi;

WarpedProfile round_sphere(int n, double rho) {
  if (!(rho > 0)) throw ParameterError("sphere radius must be positive");
  WarpedProfile p;
  p.w.resize(n);
  p.phi = Eigen::VectorXd::Constant(n, pi * rho);
  for (int i = 0; i < n; ++i) p.w[i] = rho * std::sin(pi * i / (n - 1.0));
  p.w[0] = p.w[n - 1] = 0;
  p.validate();
  return p;
}

WarpedProfile cylinder_segment(int n, double w0, double length, EndMode ends) {
  if (!(w0 > 0) || !(length > 0)) throw ParameterError("cylinder radius and length must be positive");
  if (ends == EndMode::pole) throw ParameterError("cylinder ends cannot be poles");
  WarpedProfile p;
  p.w = Eigen::VectorXd::Constant(n, w0);
  p.phi = Eigen::VectorXd::Constant(n, length);
  p.left = p.right = ends;
  p.pin_left = p.pin_right = w0 * w0;
  p.validate();
  return p;
}

// Functions of cos(pi x) are even about both poles.
static double bumps(const DumbbellShape& sh, double x, double width, int power) {
  double g = 0;
  for (double c : sh.centers) {
    double u = std::abs(std::cos(pi * x) - std::cos(pi * c)) / (pi * width);
    g += std::exp(-std::pow(u, power));
  }
  return g;
}

static double factor(const DumbbellShape& sh, double x) {
  double f = 1 - sh.depth * bumps(sh, x, sh.width, sh.power);
  if (sh.dimple_depth > 0) f *= 1 - sh.dimple_depth * bumps(sh, x, sh.dimple_width, 2);
  return f;
}

WarpedProfile dumbbell(int n, const DumbbellShape& sh) {
  if (!(sh.depth > 0 && sh.depth < 1) || !(sh.width > 0) || !(sh.rho > 0) || sh.power < 2 || sh.power % 2 ||
      !(sh.dimple_depth >= 0 && sh.dimple_depth < 1) || !(sh.dimple_width > 0))
    throw ParameterError("dumbbell needs 0 < depth < 1, width > 0, rho > 0 and an even power");
  WarpedProfile p;
  p.w.resize(n);
  double f0 = pi * sh.rho * factor(sh, 0.0);
  p.phi = Eigen::VectorXd::Constant(n, f0);
  for (int i = 0; i < n; ++i) {
    double x = i / (n - 1.0);
    p.w[i] = sh.rho * std::sin(pi * x) * factor(sh, x);
  }
  p.w[0] = p.w[n - 1] = 0;
  p.validate();
  return p;
}

DumbbellShape double_dumbbell_shape() {
  DumbbellShape sh;
  sh.centers = {1.0 / 3.0, 2.0 / 3.0};
  sh.width = 0.1;
  return sh;
}

WarpedProfile warped_preset(const std::string& name, int n) {
  if (name == "round-sphere") return round_sphere(n, 1.0);
  if (name == "cylinder-segment") return cylinder_segment(n, 1.0, 20.0, EndMode::frozen);
  if (name == "cylinder-periodic") return cylinder_segment(n, 1.0, 20.0, EndMode::periodic);
  if (name == "dumbbell") return dumbbell(n);
  if (name == "double-dumbbell") return dumbbell(n, double_dumbbell_shape());
  throw ParameterError("unknown scenario '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"round-sphere", "cylinder-segment", "cylinder-periodic", "dumbbell", "double-dumbbell", "flat-torus-perturbed"};
}

}  // namespace ricci
