#include "cvq/wavefunction.hpp"

#include <cmath>
#include <vector>

#include "cvq/propagation.hpp"

namespace cvq {

cplx coherent_amplitude(const ModeFrame& frame, cplx alpha, double x) {
  const double w0 = frame.w0();
  const double amp = std::pow(2.0 / (kPi * w0 * w0), 0.25);
  const double x0 = frame.displacement(alpha.real());
  const double k0 = frame.tilt_wavenumber(alpha.imag());
  const double u = (x - x0) / w0;
  return amp * std::exp(cplx(-u * u, k0 * x - 0.5 * k0 * x0));
}

double position_density(const SuperpositionState& state, double x) {
  const auto terms = state.terms();
  std::vector<cplx> amp(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    amp[i] = terms[i].coeff * coherent_amplitude(state.frame(), terms[i].alpha_x, x);
  double rho = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    rho += std::norm(amp[i]);
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      const cplx gy = coherent_overlap(terms[i].alpha_y, terms[j].alpha_y);
      rho += 2.0 * (amp[i] * std::conj(amp[j]) * gy).real();
    }
  }
  return rho;
}

double wavenumber_density(const SuperpositionState& state, double kappa) {
  // The quarter rotation maps P onto X'; with X' = sqrt2 x/w0 and
  // P = w0 kappa/sqrt2 that is x = w0^2 kappa / 2.
  const double w0 = state.frame().w0();
  const double scale = w0 * w0 / 2.0;
  const auto rotated = rotate_phase_space(state, kPi / 2.0);
  return position_density(rotated, scale * kappa) * scale;
}

}  // namespace cvq
