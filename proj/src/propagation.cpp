#include "cvq/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cvq/error.hpp"
#include "cvq/wavefunction.hpp"

namespace cvq {

BeamParams beam_params_at(const ModeFrame& frame, double z) {
  const double zr = frame.rayleigh_range();
  BeamParams p;
  p.z = z;
  p.w = frame.w0() * std::sqrt(1.0 + (z / zr) * (z / zr));
  p.R = z == 0.0 ? std::numeric_limits<double>::infinity() : z * (1.0 + (zr / z) * (zr / z));
  p.gouy = -std::atan(z / zr);
  p.q = cplx(z, -zr);
  return p;
}

RayMatrix ray_free(double z) { return {1.0, z, 0.0, 1.0}; }

RayMatrix ray_lens(double f) {
  if (f == 0.0 || !std::isfinite(f)) throw std::invalid_argument("ray_lens: focal length must be finite and non-zero");
  return {1.0, 0.0, -1.0 / f, 1.0};
}

RayMatrix compose(std::span<const RayMatrix> elements) {
  RayMatrix m;
  for (const auto& e : elements) m = e * m;
  return m;
}

double max_abs_difference(const RayMatrix& a, const RayMatrix& b) {
  return std::max({std::abs(a.a - b.a), std::abs(a.b - b.b), std::abs(a.c - b.c), std::abs(a.d - b.d)});
}

LensSystem::LensSystem(double focal_length, double theta_l) : f_(focal_length), theta_(theta_l) {
  if (!(focal_length > 0.0)) throw std::invalid_argument("LensSystem: focal length must be > 0");
  if (!(theta_l > 0.0 && theta_l <= kPi)) throw std::invalid_argument("LensSystem: theta_L must lie in (0, pi]");
}

RayMatrix LensSystem::matrix() const {
  const RayMatrix elements[] = {ray_free(spacing()), ray_lens(f_), ray_free(spacing())};
  return compose(elements);
}

RayMatrix LensSystem::rotation_form() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  // -sin/f0 = -1/f.
  return {c, f_ * s * s, -1.0 / f_, c};
}

SuperpositionState rotate_phase_space(const SuperpositionState& state, double theta, cplx center_x,
                                      cplx center_y) {
  const cplx turn = std::polar(1.0, -theta);
  // Works in the [a, a^dagger] = 1 scaling, a = sqrt2 alpha, where
  // D(u) D(v) = exp(i Im(u conj v)) D(u + v).
  auto rotate_axis = [&](cplx alpha, cplx center, cplx& phase) {
    const cplx a = kSqrt2 * alpha;
    const cplx c = kSqrt2 * center;
    const cplx g = (a - c) * turn;
    phase *= std::polar(1.0, (std::conj(c) * a).imag() + (c * std::conj(g)).imag());
    return (g + c) / kSqrt2;
  };
  std::vector<CoherentTerm> terms(state.terms().begin(), state.terms().end());
  for (auto& t : terms) {
    cplx phase{1.0, 0.0};
    t.alpha_x = rotate_axis(t.alpha_x, center_x, phase);
    t.alpha_y = rotate_axis(t.alpha_y, center_y, phase);
    t.coeff *= phase;
  }
  return SuperpositionState(state.frame(), std::move(terms), state.collapsed());
}

SuperpositionState gi_fiber_evolve(const SuperpositionState& state, double length, const FiberSpec& fiber,
                                   double axis_offset) {
  if (!(length >= 0.0)) throw std::invalid_argument("gi_fiber_evolve: length must be >= 0");
  if (!(fiber.period > 0.0)) throw std::invalid_argument("gi_fiber_evolve: fiber period must be > 0");
  const double theta = 2.0 * kPi * length / fiber.period;
  return rotate_phase_space(state, theta, state.frame().alpha_for(axis_offset), 0.0);
}

cplx propagated_coherent_amplitude(const ModeFrame& frame, cplx alpha, double x, double z) {
  if (z == 0.0) return coherent_amplitude(frame, alpha, x);
  const double w0 = frame.w0();
  const double k = frame.k();
  const double amp = std::pow(2.0 / (kPi * w0 * w0), 0.25);
  const double x0 = frame.displacement(alpha.real());
  const double k0 = frame.tilt_wavenumber(alpha.imag());
  const cplx q0(0.0, -frame.rayleigh_range());
  const cplx q = z + q0;
  const double u = x - x0 - k0 * z / k;
  // Galilean boost of a shifted Gaussian beam: the centre drifts by k0 z / k.
  const cplx exponent = cplx(0.0, k) * u * u / (2.0 * q) + cplx(0.0, k0 * x - k0 * k0 * z / (2.0 * k) - 0.5 * k0 * x0);
  return amp * std::sqrt(q0 / q) * std::exp(exponent);
}

PropagatedEnvelope::PropagatedEnvelope(SuperpositionState state, double z) : state_(std::move(state)), z_(z) {}

cplx PropagatedEnvelope::operator()(double x, double y) const {
  cplx sum{};
  for (const auto& t : state_.terms())
    sum += t.coeff * propagated_coherent_amplitude(state_.frame(), t.alpha_x, x, z_) *
           propagated_coherent_amplitude(state_.frame(), t.alpha_y, y, z_);
  return sum;
}

cplx PropagatedEnvelope::x_profile(double x) const {
  const auto terms = state_.terms();
  const cplx ay = terms.front().alpha_y;
  cplx sum{};
  for (const auto& t : terms) {
    if (t.alpha_y != ay) throw std::invalid_argument("x_profile: state is not separable in x and y");
    sum += t.coeff * propagated_coherent_amplitude(state_.frame(), t.alpha_x, x, z_);
  }
  return sum;
}

PropagatedEnvelope propagate_analytic(const SuperpositionState& state, double z) {
  return PropagatedEnvelope(state, z);
}

double EnvelopeSamples::power() const {
  double p = 0.0;
  for (const auto& v : values) p += std::norm(v);
  return p * dx;
}

double EnvelopeSamples::mean_x() const {
  double m = 0.0, p = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    m += x_at(i) * std::norm(values[i]);
    p += std::norm(values[i]);
  }
  return m / p;
}

double EnvelopeSamples::rms_width() const {
  const double mean = mean_x();
  double v = 0.0, p = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = x_at(i) - mean;
    v += u * u * std::norm(values[i]);
    p += std::norm(values[i]);
  }
  return std::sqrt(v / p);
}

EnvelopeSamples sample_envelope(const PropagatedEnvelope& envelope, double x0, double dx, std::size_t n) {
  EnvelopeSamples s{x0, dx, std::vector<cplx>(n)};
  for (std::size_t i = 0; i < n; ++i) s.values[i] = envelope.x_profile(s.x_at(i));
  return s;
}

namespace {

void check_input_window(const EnvelopeSamples& in) {
  if (in.values.size() < 16 || !(in.dx > 0.0)) throw std::invalid_argument("propagate_kernel: need >= 16 samples with dx > 0");
  double peak = 0.0;
  for (const auto& v : in.values) peak = std::max(peak, std::norm(v));
  if (!(peak > 0.0)) throw std::invalid_argument("propagate_kernel: input envelope is zero");
  const double edge = std::max(std::norm(in.values.front()), std::norm(in.values.back()));
  if (edge > 1e-8 * peak)
    throw NumericError("propagate_kernel: input window truncates the envelope (edge/peak = " +
                       std::to_string(edge / peak) + ")");
}

// Centroid drift and spread estimate from <kappa> and <kappa^2> of the samples.
void kinematics(const EnvelopeSamples& in, double& mean_kappa, double& rms_kappa) {
  cplx first{};
  double second = 0.0, p = 0.0;
  for (std::size_t i = 1; i + 1 < in.values.size(); ++i) {
    const cplx deriv = (in.values[i + 1] - in.values[i - 1]) / (2.0 * in.dx);
    first += std::conj(in.values[i]) * deriv;
    second += std::norm(deriv);
    p += std::norm(in.values[i]);
  }
  mean_kappa = (first / cplx(0.0, 1.0)).real() / p;
  rms_kappa = std::sqrt(std::max(0.0, second / p - mean_kappa * mean_kappa));
}

}  // namespace

EnvelopeSamples propagate_kernel(const EnvelopeSamples& input, double z, double k) {
  check_input_window(input);
  double mean_kappa = 0.0, rms_kappa = 0.0;
  kinematics(input, mean_kappa, rms_kappa);
  const double centre = input.mean_x() + z * mean_kappa / k;
  const double radius = 2.0 * (input.rms_width() + std::abs(z) * rms_kappa / k);
  const double half = 8.0 * radius;
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half / input.dx)) + 1;
  return propagate_kernel(input, z, k, SampleGrid{centre - half, input.dx, n});
}

EnvelopeSamples propagate_kernel(const EnvelopeSamples& input, double z, double k, const SampleGrid& output) {
  if (!(z >= 0.0)) throw std::invalid_argument("propagate_kernel: z must be >= 0");
  if (!(k > 0.0)) throw std::invalid_argument("propagate_kernel: k must be > 0");
  if (output.n == 0 || !(output.dx > 0.0)) throw std::invalid_argument("propagate_kernel: empty output grid");
  check_input_window(input);

  EnvelopeSamples out{output.x0, output.dx, std::vector<cplx>(output.n)};
  if (z == 0.0) {
    for (std::size_t i = 0; i < output.n; ++i) {
      const double pos = (out.x_at(i) - input.x0) / input.dx;
      const auto j = static_cast<long>(std::lround(pos));
      if (std::abs(pos - static_cast<double>(j)) < 1e-9 && j >= 0 && j < static_cast<long>(input.size()))
        out.values[i] = input.values[static_cast<std::size_t>(j)];
    }
  } else {
    const double in_lo = input.x0, in_hi = input.x_at(input.size() - 1);
    const double out_lo = output.x0, out_hi = out.x_at(output.n - 1);
    const double max_sep = std::max(std::abs(out_hi - in_lo), std::abs(in_hi - out_lo));
    const double phase_step = k * max_sep * input.dx / z;
    if (phase_step >= kPi)
      throw NumericError("propagate_kernel: kernel chirp undersampled (phase step " + std::to_string(phase_step) +
                         " rad >= pi); refine dx or increase z");

    const cplx prefactor = std::sqrt(cplx(k / (2.0 * kPi * z), 0.0) / cplx(0.0, 1.0)) * input.dx;
    const double chirp = k / (2.0 * z);
    for (std::size_t i = 0; i < output.n; ++i) {
      const double x = out.x_at(i);
      cplx acc{};
      for (std::size_t j = 0; j < input.size(); ++j) {
        const double sep = x - input.x_at(j);
        acc += input.values[j] * std::polar(1.0, chirp * sep * sep);
      }
      out.values[i] = prefactor * acc;
    }
  }

  const double p_in = input.power();
  const double p_out = out.power();
  if (std::abs(p_in - p_out) > 1e-6 * p_in)
    throw NumericError("propagate_kernel: power not conserved (relative loss " +
                       std::to_string((p_in - p_out) / p_in) + "); widen the output window");
  return out;
}

}  // namespace cvq
