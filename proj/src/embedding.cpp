#include "ricci/embedding.hpp"

#include <cmath>
#include <numbers>

namespace ricci {

GridMetric3d embed_warped(const WarpedProfile& p, int first, int last, int theta_nodes, double theta_step) {
  if (first < 0 || last >= p.n() || last - first < 4) throw ParameterError("node window needs 5 nodes inside the profile");
  if (theta_nodes < 5 || theta_nodes % 2 == 0) throw ParameterError("theta_nodes must be odd and at least 5");
  double hx = p.h();
  double ht = theta_step > 0 ? theta_step : hx;
  int nx = last - first + 1;
  GridMetric3d m({nx, theta_nodes, 1}, {hx, ht, 1.0}, {false, false, false});
  int mid = theta_nodes / 2;
  for (int i = 0; i < nx; ++i) {
    double w = p.w[first + i], phi = p.phi[first + i];
    if (!(w > 0)) throw PinchedProfileError("embedding needs w > 0", first + i);
    for (int j = 0; j < theta_nodes; ++j) {
      double th = std::numbers::pi / 2 + (j - mid) * ht;
      double sn = std::sin(th);
      Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
      g(0, 0) = phi * phi;
      g(1, 1) = w * w;
      g(2, 2) = w * w * sn * sn;
      m.g[m.ravel({i, j, 0})] = g;
    }
  }
  return m;
}

Eigen::VectorXd chart_scalar_on_axis(const GridMetric3d& m) {
  auto R = scalar_curvature(m);
  int mid = m.dims[1] / 2;
  Eigen::VectorXd out(m.dims[0]);
  for (int i = 0; i < m.dims[0]; ++i) out[i] = R[m.ravel({i, mid, 0})];
  return out;
}

}  // namespace ricci
