#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cvq/state.hpp"

namespace cvq {

/// Gaussian-beam parameters of the vacuum mode at distance z from the waist.
struct BeamParams {
  double z = 0.0;
  double w = 0.0;      // beam radius (1/e^2 intensity)
  double R = 0.0;      // wavefront radius, +inf at the waist
  double gouy = 0.0;   // -atan(z / z_R)
  cplx q{};            // 1/q = 1/R + 2i/(k w^2)
};

BeamParams beam_params_at(const ModeFrame& frame, double z);

/// Paraxial ray matrix acting on (x, v_x) with v_x = p_x / (hbar k).
struct RayMatrix {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double det() const { return a * d - b * c; }
  friend RayMatrix operator*(const RayMatrix& l, const RayMatrix& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
};

RayMatrix ray_free(double z);
/// Thin lens; f = 0 is rejected.
RayMatrix ray_lens(double f);
/// Product of elements listed in propagation order (first element acts first).
RayMatrix compose(std::span<const RayMatrix> elements);
double max_abs_difference(const RayMatrix& a, const RayMatrix& b);

/// Single-lens phase-space rotator: free(L) -> lens(f) -> free(L), L = f(1 - cos theta_L).
class LensSystem {
 public:
  LensSystem(double focal_length, double theta_l);

  double focal_length() const { return f_; }
  double theta() const { return theta_; }
  double spacing() const { return f_ * (1.0 - std::cos(theta_)); }
  /// f0 = f sin(theta_L), converts ray slope to position.
  double conversion_factor() const { return f_ * std::sin(theta_); }
  /// Product of the three elements.
  RayMatrix matrix() const;
  /// [[cos, f0 sin], [-sin/f0, cos]] evaluated without dividing by f0.
  RayMatrix rotation_form() const;

 private:
  double f_;
  double theta_;
};

/// Graded-index fiber with zigzag period cT' = 2 pi c / omega_GI.
struct FiberSpec {
  double period = 1e-3;
};

/// Phase-space rotation exp(-i theta n) about the point (center_x, center_y)
/// given in the alpha convention. With zero center every term maps
/// alpha -> alpha e^{-i theta}; otherwise the displacement phases of
/// D(c) R(theta) D(-c) are folded into the coefficients.
SuperpositionState rotate_phase_space(const SuperpositionState& state, double theta, cplx center_x = 0.0,
                                      cplx center_y = 0.0);

/// Harmonic evolution over `length` of GI fiber: rotation by 2 pi length / cT'
/// about the fiber axis, located at x = axis_offset (m).
SuperpositionState gi_fiber_evolve(const SuperpositionState& state, double length, const FiberSpec& fiber,
                                   double axis_offset = 0.0);

/// Envelope Psi(x, y, z) of a state after free propagation over z.
class PropagatedEnvelope {
 public:
  PropagatedEnvelope(SuperpositionState state, double z);

  double z() const { return z_; }
  cplx operator()(double x, double y) const;
  /// x-factor of a separable state (all terms share alpha_y); throws otherwise.
  cplx x_profile(double x) const;
  const SuperpositionState& initial_state() const { return state_; }

 private:
  SuperpositionState state_;
  double z_;
};

/// Each term propagates as a (possibly tilted) Gaussian beam.
PropagatedEnvelope propagate_analytic(const SuperpositionState& state, double z);

/// One-axis propagated field of a single coherent factor (1/sqrt(m)).
cplx propagated_coherent_amplitude(const ModeFrame& frame, cplx alpha, double x, double z);

/// Uniformly sampled complex envelope along x.
struct EnvelopeSamples {
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<cplx> values;

  double x_at(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
  std::size_t size() const { return values.size(); }
  double power() const;
  double mean_x() const;
  /// Root-mean-square width about the centroid.
  double rms_width() const;
};

EnvelopeSamples sample_envelope(const PropagatedEnvelope& envelope, double x0, double dx, std::size_t n);

struct SampleGrid {
  double x0 = 0.0;
  double dx = 0.0;
  std::size_t n = 0;
};

/// Fresnel-kernel quadrature K(x, x'; z/c) over the input samples.
///
/// The default output window is centred on the drifted centroid with a
/// half-width of 8 estimated beam radii. Throws NumericError when the input
/// window does not hold the envelope, the chirp is undersampled, or more than
/// 1e-6 of the power is lost.
EnvelopeSamples propagate_kernel(const EnvelopeSamples& input, double z, double k);
EnvelopeSamples propagate_kernel(const EnvelopeSamples& input, double z, double k, const SampleGrid& output);

}  // namespace cvq
