#pragma once

#include <cstddef>
#include <vector>

#include "cvq/state.hpp"

namespace cvq {

/// Coordinates of a phase-space grid.
///
/// Scaled units are the figure axes X = sqrt2 (x - x_origin)/w0 and
/// P = w0 p_x / (sqrt2 hbar); values are then densities per dX dP.
/// SI units are x (m) and p_x (kg m/s), densities per dx dp_x.
enum class PhaseUnits { Scaled, SI };

struct PhaseSpaceGrid {
  double x_min = -4.0, x_max = 4.0;
  std::size_t nx = 64;
  double p_min = -4.0, p_max = 4.0;
  std::size_t np = 64;
  PhaseUnits units = PhaseUnits::Scaled;
  double x_origin = 0.0;  // m, only used for scaled units

  void validate() const;
  double x_at(std::size_t i) const { return x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(nx - 1); }
  double p_at(std::size_t j) const { return p_min + (p_max - p_min) * static_cast<double>(j) / static_cast<double>(np - 1); }
  double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
  double dp() const { return (p_max - p_min) / static_cast<double>(np - 1); }

  /// Grid coordinate -> physical position (m).
  double position(double x, const ModeFrame& frame) const;
  /// Grid coordinate -> transverse wavenumber kappa = p_x / hbar (1/m).
  double wavenumber(double p, const ModeFrame& frame) const;
  /// Multiplier turning a (x, kappa) density into a density in grid units.
  double density_scale() const;
};

struct WignerMap {
  PhaseSpaceGrid grid;
  std::vector<double> values;  // row-major, values[ip * nx + ix]

  double at(std::size_t ix, std::size_t ip) const { return values[ip * grid.nx + ix]; }
  /// Trapezoid integral over the grid window.
  double integral() const;
  /// Trapezoid integral over p for every x column.
  std::vector<double> integrate_over_p() const;
  /// Trapezoid integral over x for every p row.
  std::vector<double> integrate_over_x() const;
};

/// Closed-form Wigner function of the two-beam state in SI units (1/(J s)).
///
///   W = [T W_vac + (1-T) W_coh + 2 sqrt(T(1-T)) W_half cos(phi - d p/hbar)] / N_arb
double wigner_closed_form(const QubitParams& params, const ModeFrame& frame, double x, double p);

/// Exact Wigner function of an arbitrary superposition, reduced over y, as a
/// density in (x, kappa) (equivalently in the scaled (X, P) axes).
double wigner_analytic(const SuperpositionState& state, double x, double kappa);

/// Wigner map by direct quadrature of the reduced Wigner integral over the
/// separation coordinate. Adaptive trapezoid (initial step w0/64, Richardson
/// checked); NumericError when the step refinement budget is exhausted.
WignerMap wigner_numeric(const SuperpositionState& state, const PhaseSpaceGrid& grid);

/// Same map from the analytic cross-Wigner terms.
WignerMap wigner_analytic_map(const SuperpositionState& state, const PhaseSpaceGrid& grid);

/// Grid of n x n points covering +-4 standard deviations around the centroid,
/// widened x1.5 until the boundary is below 1e-8 of the peak. Odd n puts a
/// node on the centroid.
PhaseSpaceGrid auto_grid(const SuperpositionState& state, std::size_t n, PhaseUnits units = PhaseUnits::Scaled,
                         double x_origin = 0.0);

/// Closed-form position marginal (1/m).
double marginal_position(const QubitParams& params, const ModeFrame& frame, double x);
/// Closed-form momentum marginal, density per unit p_x (1/(kg m/s)).
double marginal_momentum(const QubitParams& params, const ModeFrame& frame, double p);

struct QuadratureMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Moments of X cos(theta) + P sin(theta) with X = sqrt2 x / w0 (origin at the
/// vacuum centre) and P = w0 p_x/(sqrt2 hbar). The vacuum has variance 1/2.
QuadratureMoments quadrature_moments(const SuperpositionState& state, double theta);

struct NegativityReport {
  double min_value = 0.0;
  double x_at_min = 0.0;  // grid units
  double p_at_min = 0.0;
  double negative_volume = 0.0;
};

NegativityReport negativity_scan(const WignerMap& map);
NegativityReport negativity_scan(const SuperpositionState& state, const PhaseSpaceGrid& grid);

}  // namespace cvq
