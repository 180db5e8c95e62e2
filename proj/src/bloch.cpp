#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cvq/error.hpp"
#include "cvq/state.hpp"

namespace cvq {
namespace {

// Expansion of the pole states in the non-orthogonal {vac, coh} pair:
//   |x-> = [(c + s)|vac> - (c - s)|coh>] / (sqrt2 sin theta_d)
//   |x+> = [-(c - s)|vac> + (c + s)|coh>] / (sqrt2 sin theta_d)
// with c = cos(theta_d/2), s = sin(theta_d/2).
struct PoleExpansion {
  double minus_vac, minus_coh, plus_vac, plus_coh;
};

PoleExpansion pole_expansion(OverlapAngle theta_d) {
  const double c = std::cos(theta_d.theta() / 2.0);
  const double s = std::sin(theta_d.theta() / 2.0);
  const double scale = 1.0 / (kSqrt2 * theta_d.sin());
  return {(c + s) * scale, -(c - s) * scale, -(c - s) * scale, (c + s) * scale};
}

}  // namespace

QubitParams bloch_to_params(const BlochVector& b, OverlapAngle theta_d, const ModeFrame& frame) {
  const double cos_d = theta_d.cos();
  const double sin_d = theta_d.sin();
  const double denom = 1.0 - b.x * cos_d;
  if (!(denom > 0.0)) throw std::invalid_argument("bloch_to_params: 1 - x_q cos(theta_d) must be positive");

  double T = 0.5 * (1.0 + b.z * sin_d / denom);
  T = std::clamp(T, 0.0, 1.0);

  const double re = b.x - cos_d;
  const double im = b.y * sin_d;
  // Removable singularity: the state is a pure vac or coh term, phase irrelevant.
  const double phi = std::hypot(re, im) < 1e-14 ? 0.0 : std::atan2(im, re);
  return QubitParams(T, phi, theta_d.displacement(frame));
}

BlochVector params_to_bloch(const QubitParams& params, OverlapAngle theta_d) {
  const double T = params.T();
  const double n_arb = normalization_factor(T, params.phi(), theta_d);
  const cplx w_vac = std::sqrt(T) / std::sqrt(n_arb);
  const cplx w_coh = std::polar(std::sqrt(1.0 - T), params.phi()) / std::sqrt(n_arb);
  const double c = theta_d.cos();

  // <vac|psi> and <coh|psi>; the pole expansion coefficients are real.
  const cplx on_vac = w_vac + w_coh * c;
  const cplx on_coh = w_vac * c + w_coh;
  const auto e = pole_expansion(theta_d);
  const cplx a_minus = e.minus_vac * on_vac + e.minus_coh * on_coh;
  const cplx a_plus = e.plus_vac * on_vac + e.plus_coh * on_coh;

  const cplx cross = std::conj(a_minus) * a_plus;
  const double z = std::norm(a_minus) - std::norm(a_plus);
  BlochVector b{2.0 * cross.real(), 2.0 * cross.imag(), z};
  const double n = b.norm();
  if (!(std::abs(n - 1.0) < 1e-8)) throw NumericError("params_to_bloch: state left the qubit subspace");
  return BlochVector{b.x / n, b.y / n, b.z / n};
}

}  // namespace cvq
