#pragma once

// The warped metric written in the chart (x, theta, psi):
// g = phi^2 dx^2 + w^2 (dtheta^2 + sin^2 theta dpsi^2).

#include "ricci/chart_geometry.hpp"
#include "ricci/warped.hpp"

namespace ricci {

/// Chart over profile nodes [first, last] (no poles), theta on `theta_nodes` nodes centred on pi/2
/// with spacing `theta_step` (0 takes the x spacing), psi a single node.
GridMetric3d embed_warped(const WarpedProfile& p, int first, int last, int theta_nodes = 5, double theta_step = 0);

/// Scalar curvature of the chart along its theta-centre line, one value per profile node in [first, last].
Eigen::VectorXd chart_scalar_on_axis(const GridMetric3d& m);

}  // namespace ricci
