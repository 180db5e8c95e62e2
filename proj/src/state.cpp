#include "cvq/state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cvq/error.hpp"

namespace cvq {

cplx coherent_overlap(cplx alpha, cplx beta) {
  return std::exp(-std::norm(alpha) - std::norm(beta) + 2.0 * std::conj(beta) * alpha);
}

cplx term_overlap(const CoherentTerm& bra, const CoherentTerm& ket) {
  return coherent_overlap(ket.alpha_x, bra.alpha_x) * coherent_overlap(ket.alpha_y, bra.alpha_y);
}

SuperpositionState::SuperpositionState(ModeFrame frame, std::vector<CoherentTerm> terms, bool collapsed)
    : frame_(frame), terms_(std::move(terms)), collapsed_(collapsed) {
  if (terms_.empty()) throw std::invalid_argument("SuperpositionState: term list is empty");
  double norm = 0.0;
  for (const auto& a : terms_)
    for (const auto& b : terms_) norm += (std::conj(a.coeff) * b.coeff * term_overlap(a, b)).real();
  if (!(norm > 1e-300) || !std::isfinite(norm))
    throw NumericError("SuperpositionState: superposition has zero norm");
  raw_norm_ = norm;
  const double scale = 1.0 / std::sqrt(norm);
  for (auto& t : terms_) t.coeff *= scale;
}

cplx inner_product(const SuperpositionState& a, const SuperpositionState& b) {
  if (!(a.frame() == b.frame())) throw std::invalid_argument("inner_product: states use different mode frames");
  cplx sum{};
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) sum += std::conj(ta.coeff) * tb.coeff * term_overlap(ta, tb);
  return sum;
}

double fidelity(const SuperpositionState& a, const SuperpositionState& b) {
  return std::norm(inner_product(a, b));
}

OverlapAngle OverlapAngle::from_theta(double theta_d) {
  if (!(theta_d > 0.0 && theta_d < kPi / 2.0))
    throw std::invalid_argument("OverlapAngle: theta_d must lie in (0, pi/2), got " + std::to_string(theta_d));
  return OverlapAngle(theta_d, std::cos(theta_d));
}

OverlapAngle OverlapAngle::from_alpha(double alpha) {
  const double c = std::exp(-alpha * alpha);
  if (!(alpha > 0.0) || !(c > 0.0))
    throw std::invalid_argument("OverlapAngle: |alpha| must be positive and finite, got " + std::to_string(alpha));
  return OverlapAngle(std::acos(c), c);
}

double wrap_two_pi(double angle) {
  double r = std::fmod(angle, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi) r = 0.0;
  return r;
}

double wrap_signed(double angle) {
  double r = wrap_two_pi(angle);
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

QubitParams::QubitParams(double transmittance, double phi, double displacement)
    : T_(transmittance), phi_(wrap_two_pi(phi)), d_(displacement) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0))
    throw std::invalid_argument("QubitParams: T must lie in [0, 1], got " + std::to_string(transmittance));
  if (!std::isfinite(phi)) throw std::invalid_argument("QubitParams: phi must be finite");
  if (!(displacement >= 0.0) || !std::isfinite(displacement))
    throw std::invalid_argument("QubitParams: d must be >= 0, got " + std::to_string(displacement));
}

BlochVector BlochVector::checked(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (!(std::abs(n - 1.0) <= 1e-9))
    throw std::invalid_argument("BlochVector: |b| must be 1, got " + std::to_string(n));
  return BlochVector{x / n, y / n, z / n};
}

BlochVector BlochVector::from_angles(double theta, double phi) {
  return BlochVector{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double normalization_factor(double transmittance, double phi, OverlapAngle theta_d) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0))
    throw std::invalid_argument("normalization_factor: T must lie in [0, 1]");
  const double n =
      1.0 + 2.0 * std::sqrt(transmittance * (1.0 - transmittance)) * theta_d.cos() * std::cos(phi);
  if (!(n > 1e-15)) throw NumericError("normalization_factor: N_arb <= 1e-15 (degenerate overlap angle)");
  return n;
}

SuperpositionState make_qubit_state(const QubitParams& params, const ModeFrame& frame) {
  const double T = params.T();
  const cplx phase = std::polar(1.0, params.phi());
  const double alpha = frame.alpha_for(params.d());
  if (T == 1.0) return SuperpositionState(frame, {CoherentTerm{1.0, 0.0, 0.0}});
  if (T == 0.0) return SuperpositionState(frame, {CoherentTerm{phase, alpha, 0.0}});
  if (params.d() == 0.0) {
    const cplx c = std::sqrt(T) + phase * std::sqrt(1.0 - T);
    if (std::abs(c) < 1e-12)
      throw NumericError("make_qubit_state: beams cancel completely (d = 0, T = 1/2, phi = pi)");
    return SuperpositionState(frame, {CoherentTerm{c, 0.0, 0.0}}, /*collapsed=*/true);
  }
  return SuperpositionState(frame, {CoherentTerm{std::sqrt(T), 0.0, 0.0},
                                    CoherentTerm{phase * std::sqrt(1.0 - T), alpha, 0.0}});
}

std::string_view to_string(TypicalState kind) {
  switch (kind) {
    case TypicalState::Vacuum: return "vac";
    case TypicalState::Coherent: return "coh";
    case TypicalState::CatPlus: return "cat_plus";
    case TypicalState::CatMinus: return "cat_minus";
    case TypicalState::XMinus: return "x_minus";
    case TypicalState::XPlus: return "x_plus";
    case TypicalState::PMinus: return "p_minus";
    case TypicalState::PPlus: return "p_plus";
  }
  return "?";
}

TypicalState typical_state_from_string(std::string_view name) {
  for (auto kind : kAllTypicalStates)
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown typical state '" + std::string(name) + "'");
}

TypicalStateResult make_typical_state(TypicalState kind, OverlapAngle theta_d, const ModeFrame& frame) {
  const double s = theta_d.sin();
  const double d = theta_d.displacement(frame);
  auto params = [&] {
    switch (kind) {
      case TypicalState::Vacuum: return QubitParams(1.0, 0.0, d);
      case TypicalState::Coherent: return QubitParams(0.0, 0.0, d);
      case TypicalState::CatPlus: return QubitParams(0.5, 0.0, d);
      case TypicalState::CatMinus: return QubitParams(0.5, kPi, d);
      case TypicalState::XMinus: return QubitParams((1.0 + s) / 2.0, kPi, d);
      case TypicalState::XPlus: return QubitParams((1.0 - s) / 2.0, kPi, d);
      case TypicalState::PMinus: return QubitParams(0.5, -(kPi - theta_d.theta()), d);
      case TypicalState::PPlus: return QubitParams(0.5, kPi - theta_d.theta(), d);
    }
    throw std::invalid_argument("make_typical_state: unknown kind");
  }();
  return TypicalStateResult{params, make_qubit_state(params, frame)};
}

}  // namespace cvq
