#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cvq/state.hpp"

namespace cvq {

enum class PlaneKind { Position, Momentum };

/// Observation plane. The momentum plane is the back focal plane of a single
/// lens at theta_L = pi/2, where x' = f kappa / k.
struct PlaneSpec {
  PlaneKind kind = PlaneKind::Momentum;
  double focal_length = 0.145;  // m
  double theta_l = kPi / 2.0;

  static PlaneSpec position() { return {PlaneKind::Position, 0.145, 0.0}; }
  static PlaneSpec momentum(double f = 0.145) { return {PlaneKind::Momentum, f, kPi / 2.0}; }
  void validate() const;
  bool operator==(const PlaneSpec&) const = default;
};

struct CcdConfig {
  std::size_t nx = 720;
  std::size_t ny = 480;
  double pitch = 6.5e-6;          // m
  int bit_depth = 8;
  double background = 0.0;        // counts
  double exposure_scale = 0.0;    // counts per unit pixel power fraction; <= 0 selects auto exposure
  double visibility = 1.0;
  std::uint64_t seed = 0;
  bool shot_noise = false;

  void validate() const;
  std::uint32_t max_count() const { return (1u << bit_depth) - 1u; }
  /// Centre of pixel i along an axis of n pixels, chip centre at 0.
  double pixel_center(std::size_t i, std::size_t n) const {
    return (static_cast<double>(i) + 0.5 - static_cast<double>(n) / 2.0) * pitch;
  }
};

struct CcdImage {
  CcdConfig config;
  PlaneSpec plane;
  std::vector<std::uint16_t> counts;  // row-major, counts[iy * nx + ix]
  bool saturated = false;

  std::uint16_t at(std::size_t ix, std::size_t iy) const { return counts[iy * config.nx + ix]; }
};

/// Power fraction landing on each pixel (point-sampled intensity times pitch^2),
/// with the cross terms scaled by the visibility. Row-major ny x nx.
std::vector<double> pixel_power(const SuperpositionState& state, const PlaneSpec& plane, const CcdConfig& config);

/// Exposure that maps the brightest pixel to `fill` of full scale above background.
double auto_exposure(const SuperpositionState& state, const PlaneSpec& plane, const CcdConfig& config,
                     double fill = 0.9);

/// Renders, quantizes (round half away from zero, then clamp) and flags
/// saturation. A fully saturated chip is a NumericError.
CcdImage render_ccd(const SuperpositionState& state, const PlaneSpec& plane, const CcdConfig& config);
CcdImage render_ccd(const QubitParams& params, const ModeFrame& frame, const PlaneSpec& plane,
                    const CcdConfig& config);

/// Column sums minus the median of the 8 + 8 border columns, clipped at zero
/// and normalized to unit sum.
std::vector<double> profile_from_image(const CcdImage& image);

/// Physical coordinate of every profile sample (pixel centres, m).
std::vector<double> profile_coordinates(std::size_t n, double pitch);

struct GaussianFit {
  double center = 0.0;     // m
  double radius = 0.0;     // 1/e^2 intensity radius, m
  double amplitude = 0.0;  // per sample
  double rss = 0.0;
  double relative_rss = 0.0;  // rss / sum(profile^2)
  bool poor = false;
  int iterations = 0;
};

/// Fits A exp(-2 (x - c)^2 / r^2). Poor when relative_rss exceeds kPoorFitThreshold.
inline constexpr double kPoorFitThreshold = 0.02;
GaussianFit fit_gaussian_profile(const std::vector<double>& profile, double pitch);

struct FringeModel {
  double d = 0.0;          // beam separation, m
  double w0 = 0.0;         // m
  double T = 0.5;
  double focal_length = 0.145;
  double wavelength = 780e-9;
  double pitch = 6.5e-6;
  double visibility = 1.0;
};

struct PhaseEstimate {
  double phi = 0.0;  // (-pi, pi]
  double amplitude = 0.0;
  double rss = 0.0;
  double noise_rms = 0.0;
  double fringe_amplitude = 0.0;
};

/// Least-squares fit of A G(x') (1 + V 2 sqrt(T(1-T)) cos(phi - d kappa)) with
/// kappa = k x' / f; phi is the only free shape parameter.
/// Throws NumericError("phase unidentifiable") when the fringe amplitude is
/// below three times the residual noise floor.
PhaseEstimate estimate_relative_phase(const std::vector<double>& momentum_profile, const FringeModel& model);

struct ScenarioCurve {
  std::string panel;    // e.g. "fig5_a-2"
  std::string label;
  PlaneKind plane = PlaneKind::Position;
  std::vector<double> coordinate;  // m in the CCD plane
  std::vector<double> density;     // 1/m
  std::vector<double> sql;         // reference I_half in the same plane
  double phi = 0.0;
  double T = 0.0;
};

/// Theoretical position/momentum-plane curves for the vacuum and coherent
/// panels and the four equator states at theta_d = 0.40 pi.
std::vector<ScenarioCurve> scenario_reports(const ModeFrame& frame, double focal_length = 0.145,
                                            std::size_t samples = 721);

/// Relative phases of the four equator states in the reproduction scenario.
inline constexpr double kEquatorPhases[4] = {0.98 * kPi, -0.18 * kPi, -0.72 * kPi, 0.57 * kPi};

}  // namespace cvq
