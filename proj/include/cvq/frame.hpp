#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cvq {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kSpeedOfLight = 299792458.0;      // m/s

/// Unit system of a transverse mode: vacuum waist and wavelength.
///
/// The vacuum wavefunction is exp(-(x^2 + y^2) / w0^2), i.e. w0 is the
/// intensity 1/e^2 radius. Everything else in the library (displacement
/// amplitudes, Wigner scaling, CCD coordinates) is expressed relative to it.
class ModeFrame {
 public:
  ModeFrame(double w0, double wavelength) : w0_(w0), wavelength_(wavelength) {
    if (!(w0 > 0.0) || !std::isfinite(w0)) throw std::invalid_argument("ModeFrame: w0 must be > 0");
    if (!(wavelength > 0.0) || !std::isfinite(wavelength))
      throw std::invalid_argument("ModeFrame: wavelength must be > 0");
  }

  /// The experimental frame: w0 = 0.12 mm, lambda = 780 nm.
  static ModeFrame laboratory() { return ModeFrame(0.12e-3, 780e-9); }

  double w0() const { return w0_; }
  double wavelength() const { return wavelength_; }
  double k() const { return 2.0 * kPi / wavelength_; }
  double rayleigh_range() const { return k() * w0_ * w0_ / 2.0; }
  /// Effective mass m' = hbar k / c of the paraxial free-particle analogy.
  double effective_mass() const { return kHbar * k() / kSpeedOfLight; }

  /// x-offset of a term with real displacement amplitude alpha.
  double displacement(double alpha) const { return kSqrt2 * w0_ * alpha; }
  double alpha_for(double displacement) const { return displacement / (kSqrt2 * w0_); }
  /// Transverse wavenumber carried by the imaginary part of alpha.
  double tilt_wavenumber(double imag_alpha) const { return 2.0 * kSqrt2 * imag_alpha / w0_; }

  friend bool operator==(const ModeFrame&, const ModeFrame&) = default;

 private:
  double w0_;
  double wavelength_;
};

}  // namespace cvq
