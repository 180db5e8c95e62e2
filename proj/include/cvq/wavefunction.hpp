#pragma once

#include "cvq/state.hpp"

namespace cvq {

/// Position-space amplitude of one normalized coherent factor along an axis
/// (1/sqrt(m)):
///   (2/(pi w0^2))^{1/4} exp(-(x - x0)^2/w0^2 + i k0 x - i k0 x0 / 2)
/// with x0 = sqrt2 w0 Re(alpha), k0 = 2 sqrt2 Im(alpha) / w0.
cplx coherent_amplitude(const ModeFrame& frame, cplx alpha, double x);

/// y-integrated position density I(x) (1/m).
double position_density(const SuperpositionState& state, double x);

/// Transverse-wavenumber density of kappa = p_x / hbar (m).
double wavenumber_density(const SuperpositionState& state, double kappa);

}  // namespace cvq
