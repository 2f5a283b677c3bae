#include "ricci/soliton.hpp"

#include <cmath>

namespace ricci {

std::string to_string(SolitonMode m) { return m == SolitonMode::shrinking ? "shrinking" : "steady"; }

SolitonMode soliton_mode_from_string(const std::string& s) {
  if (s == "shrinking") return SolitonMode::shrinking;
  if (s == "steady") return SolitonMode::steady;
  throw ParameterError("unknown soliton mode '" + s + "'");
}

WarpedSolitonResidual soliton_residual(const WarpedProfile& p, const Eigen::VectorXd& f, SolitonMode mode) {
  if (f.size() != p.n()) throw ParameterError("potential size does not match the profile");
  auto c = warped_curvatures(p);
  auto pd = detail::pad(p);
  auto fp = detail::pad_field(p, f, false);
  int n = p.n();
  double h = pd.h, k = mode == SolitonMode::shrinking ? 0.5 : 0.0;
  WarpedSolitonResidual r;
  r.ss.resize(n);
  r.sph.resize(n);
  for (int i = 0; i < n; ++i) {
    int j = i + 2;
    double phi = pd.phi[j], phix = detail::dx1(pd.phi, j, h);
    double fx = detail::dx1(fp, j, h), fxx = detail::dx2(fp, j, h);
    double fs = fx / phi;
    double fss = (fxx - fs * phix) / (phi * phi);
    // w_s f_s / w -> f_ss at a smooth pole
    double cross = p.w[i] > 0 ? c.ws[i] * fs / p.w[i] : fss;
    r.ss[i] = c.ric_ss[i] + fss - k;
    r.sph[i] = c.ric_sph[i] + cross - k;
    r.sup = std::max(r.sup, std::sqrt(r.ss[i] * r.ss[i] + 2 * r.sph[i] * r.sph[i]));
  }
  return r;
}

}  // namespace ricci
