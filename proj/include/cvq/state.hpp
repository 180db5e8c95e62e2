#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "cvq/frame.hpp"

namespace cvq {

using cplx = std::complex<double>;

/// One displaced-Gaussian (coherent) component of a transverse mode.
///
/// Displacement amplitudes follow the convention d = sqrt(2) w0 Re(alpha);
/// Im(alpha) is a transverse tilt. The term wavefunction itself is always
/// normalized, `coeff` carries the weight.
struct CoherentTerm {
  cplx coeff{1.0, 0.0};
  cplx alpha_x{};
  cplx alpha_y{};
};

/// <beta|alpha> = exp(-|alpha|^2 - |beta|^2 + 2 conj(beta) alpha).
cplx coherent_overlap(cplx alpha, cplx beta);

/// Overlap of the (unweighted) term wavefunctions <bra|ket>, x and y factors.
cplx term_overlap(const CoherentTerm& bra, const CoherentTerm& ket);

/// Normalized finite superposition of coherent terms.
class SuperpositionState {
 public:
  /// Normalizes the terms. Throws std::invalid_argument for an empty list and
  /// NumericError when the superposition has (numerically) zero norm.
  SuperpositionState(ModeFrame frame, std::vector<CoherentTerm> terms, bool collapsed = false);

  const ModeFrame& frame() const { return frame_; }
  std::span<const CoherentTerm> terms() const { return terms_; }
  /// <psi|psi> of the weights as given, before normalization (N_arb for qubits).
  double raw_norm() const { return raw_norm_; }
  /// True when a two-beam setting degenerated to a single Gaussian (d = 0).
  bool collapsed() const { return collapsed_; }

 private:
  ModeFrame frame_;
  std::vector<CoherentTerm> terms_;
  double raw_norm_ = 1.0;
  bool collapsed_ = false;
};

/// <a|b>. Both states must share a frame.
cplx inner_product(const SuperpositionState& a, const SuperpositionState& b);
double fidelity(const SuperpositionState& a, const SuperpositionState& b);

/// theta_d defined by cos(theta_d) = <vac|coh> = exp(-|alpha|^2), 0 < theta_d < pi/2.
class OverlapAngle {
 public:
  static OverlapAngle from_theta(double theta_d);
  static OverlapAngle from_alpha(double alpha);
  static OverlapAngle from_displacement(double d, const ModeFrame& frame) {
    return from_alpha(frame.alpha_for(d));
  }

  double theta() const { return theta_; }
  double cos() const { return cos_; }
  double sin() const { return std::sqrt((1.0 - cos_) * (1.0 + cos_)); }
  double alpha() const { return std::sqrt(-std::log(cos_)); }
  double displacement(const ModeFrame& frame) const { return frame.displacement(alpha()); }

 private:
  OverlapAngle(double theta, double c) : theta_(theta), cos_(c) {}
  double theta_;
  double cos_;
};

/// Wrap an angle to [0, 2pi).
double wrap_two_pi(double angle);
/// Wrap an angle to (-pi, pi].
double wrap_signed(double angle);

/// Interferometer setting: transmittance T, relative phase phi, displacement d (m).
class QubitParams {
 public:
  QubitParams(double transmittance, double phi, double displacement);

  double T() const { return T_; }
  /// Relative phase in [0, 2pi).
  double phi() const { return phi_; }
  /// Relative phase in (-pi, pi], the representative the measurements quote.
  double phi_signed() const { return wrap_signed(phi_); }
  double d() const { return d_; }

 private:
  double T_;
  double phi_;
  double d_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  /// Checks the unit-sphere invariant (within 1e-9) and renormalizes exactly.
  static BlochVector checked(double x, double y, double z);
  static BlochVector from_angles(double theta, double phi);
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// N_arb = 1 + 2 sqrt(T(1-T)) cos(theta_d) cos(phi). NumericError when <= 1e-15.
double normalization_factor(double transmittance, double phi, OverlapAngle theta_d);

/// sqrt(T)|vac> + e^{i phi} sqrt(1-T)|coh(d)>, normalized.
SuperpositionState make_qubit_state(const QubitParams& params, const ModeFrame& frame);

enum class TypicalState { Vacuum, Coherent, CatPlus, CatMinus, XMinus, XPlus, PMinus, PPlus };

std::string_view to_string(TypicalState kind);
/// Parses "vac", "coh", "cat_plus", "cat_minus", "x_minus", "x_plus", "p_minus", "p_plus".
TypicalState typical_state_from_string(std::string_view name);
inline constexpr TypicalState kAllTypicalStates[] = {
    TypicalState::Vacuum,  TypicalState::Coherent, TypicalState::CatPlus, TypicalState::CatMinus,
    TypicalState::XMinus, TypicalState::XPlus,    TypicalState::PMinus,  TypicalState::PPlus};

struct TypicalStateResult {
  QubitParams params;
  SuperpositionState state;
};

/// Interferometer setting and state for one of the eight typical qubit states.
///
/// cat_plus  = (|vac> + |coh>) / sqrt(2 N_up)   (T, phi) = (1/2, 0)
/// cat_minus = (|vac> - |coh>) / sqrt(2 N_down) (T, phi) = (1/2, pi)
/// x_minus/x_plus: T = (1 +- sin theta_d)/2, phi = pi
/// p_minus/p_plus: T = 1/2, phi = -+(pi - theta_d)
TypicalStateResult make_typical_state(TypicalState kind, OverlapAngle theta_d, const ModeFrame& frame);

/// Interferometer setting producing the Bloch state b in the {|x->, |x+>} basis.
/// At the removable singularity (x = cos theta_d, y = 0) phi is defined as 0.
QubitParams bloch_to_params(const BlochVector& b, OverlapAngle theta_d, const ModeFrame& frame);

/// Bloch vector of the state produced by `params`, in the orthonormal
/// {|x->, |x+>} basis.
BlochVector params_to_bloch(const QubitParams& params, OverlapAngle theta_d);

}  // namespace cvq
