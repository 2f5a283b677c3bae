#pragma once

// Gradient soliton residuals Ric + Hess f - c g with c = 1/2 (shrinking) or 0 (steady).

#include <string>

#include "ricci/chart_geometry.hpp"
#include "ricci/warped.hpp"

namespace ricci {

enum class SolitonMode { shrinking, steady };

std::string to_string(SolitonMode m);
SolitonMode soliton_mode_from_string(const std::string& s);

template <typename Scalar, int Dim>
struct SolitonResidual {
  GridField<SymTensor<Scalar, Dim>> field;
  Scalar sup = 0;  // max over nodes of |residual|_g
};

template <typename Scalar, int Dim>
SolitonResidual<Scalar, Dim> soliton_residual(const GridMetric<Scalar, Dim>& m, const std::vector<Scalar>& f,
                                              SolitonMode mode) {
  auto ric = ricci(m);
  auto hess = hessian(m, f);
  Scalar c = mode == SolitonMode::shrinking ? Scalar(0.5) : Scalar(0);
  SolitonResidual<Scalar, Dim> out;
  out.field.resize(ric.size());
  for (std::size_t n = 0; n < ric.size(); ++n) {
    out.field[n] = ric[n] + hess[n] - c * m.g[n];
    SymTensor<Scalar, Dim> gi = m.g[n].inverse();
    SymTensor<Scalar, Dim> t = gi * out.field[n];
    out.sup = std::max(out.sup, std::sqrt(std::abs((t * t).trace())));
  }
  return out;
}

/// Residual of a warped profile with potential f(x) in the orthonormal frame:
/// ss = Ric_ss + f_ss - c, sph = Ric_sph + w_s f_s / w - c.
struct WarpedSolitonResidual {
  Eigen::VectorXd ss, sph;
  double sup = 0;  // max sqrt(ss^2 + 2 sph^2)
};

WarpedSolitonResidual soliton_residual(const WarpedProfile& p, const Eigen::VectorXd& f, SolitonMode mode);

}  // namespace ricci
