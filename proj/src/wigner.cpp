#include "cvq/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cvq/error.hpp"
#include "cvq/wavefunction.hpp"

namespace cvq {

void PhaseSpaceGrid::validate() const {
  if (nx < 2 || np < 2) throw std::invalid_argument("PhaseSpaceGrid: need at least 2 points per axis");
  if (!(x_max > x_min) || !(p_max > p_min)) throw std::invalid_argument("PhaseSpaceGrid: max must exceed min");
}

double PhaseSpaceGrid::position(double x, const ModeFrame& frame) const {
  return units == PhaseUnits::Scaled ? x_origin + frame.w0() * x / kSqrt2 : x;
}

double PhaseSpaceGrid::wavenumber(double p, const ModeFrame& frame) const {
  return units == PhaseUnits::Scaled ? kSqrt2 * p / frame.w0() : p / kHbar;
}

double PhaseSpaceGrid::density_scale() const { return units == PhaseUnits::Scaled ? 1.0 : 1.0 / kHbar; }

namespace {

double trapezoid(const std::vector<double>& f, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i == 0 || i + 1 == f.size() ? 0.5 : 1.0) * f[i];
  return s * h;
}

}  // namespace

double WignerMap::integral() const {
  return trapezoid(integrate_over_p(), grid.dx());
}

std::vector<double> WignerMap::integrate_over_p() const {
  std::vector<double> out(grid.nx), col(grid.np);
  for (std::size_t ix = 0; ix < grid.nx; ++ix) {
    for (std::size_t ip = 0; ip < grid.np; ++ip) col[ip] = at(ix, ip);
    out[ix] = trapezoid(col, grid.dp());
  }
  return out;
}

std::vector<double> WignerMap::integrate_over_x() const {
  std::vector<double> out(grid.np), row(grid.nx);
  for (std::size_t ip = 0; ip < grid.np; ++ip) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) row[ix] = at(ix, ip);
    out[ip] = trapezoid(row, grid.dx());
  }
  return out;
}

double wigner_closed_form(const QubitParams& params, const ModeFrame& frame, double x, double p) {
  const double w0 = frame.w0();
  const double T = params.T();
  const double d = params.d();
  auto w_vac = [&](double u) {
    return std::exp(-2.0 * u * u / (w0 * w0) - w0 * w0 * p * p / (2.0 * kHbar * kHbar)) / (kPi * kHbar);
  };
  const double cross = 2.0 * std::sqrt(T * (1.0 - T));
  const double n_arb = 1.0 + cross * std::exp(-d * d / (2.0 * w0 * w0)) * std::cos(params.phi());
  if (!(n_arb > 1e-15)) throw NumericError("wigner_closed_form: N_arb <= 1e-15");
  return (T * w_vac(x) + (1.0 - T) * w_vac(x - d) + cross * w_vac(x - d / 2.0) * std::cos(params.phi() - d * p / kHbar)) /
         n_arb;
}

double wigner_analytic(const SuperpositionState& state, double x, double kappa) {
  // Cross-Wigner of coherent states in the [a, a^dagger] = 1 scaling:
  //   W_{|a><b|}(zeta) = <b|a> exp(-2 (conj(zeta) - conj(b)) (zeta - a)) / pi
  // with zeta = x / w0 + i w0 kappa / 2 and a = sqrt2 alpha.
  const double w0 = state.frame().w0();
  const cplx zeta(x / w0, w0 * kappa / 2.0);
  const auto terms = state.terms();
  double w = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = i; j < terms.size(); ++j) {
      const cplx a = kSqrt2 * terms[i].alpha_x;
      const cplx b = kSqrt2 * terms[j].alpha_x;
      const cplx overlap = coherent_overlap(terms[i].alpha_x, terms[j].alpha_x) *
                           coherent_overlap(terms[i].alpha_y, terms[j].alpha_y);
      const cplx value = terms[i].coeff * std::conj(terms[j].coeff) * overlap *
                         std::exp(-2.0 * (std::conj(zeta) - std::conj(b)) * (zeta - a));
      w += (i == j ? 1.0 : 2.0) * value.real();
    }
  }
  return w / kPi;
}

WignerMap wigner_analytic_map(const SuperpositionState& state, const PhaseSpaceGrid& grid) {
  grid.validate();
  WignerMap map{grid, std::vector<double>(grid.nx * grid.np)};
  const double scale = grid.density_scale();
  for (std::size_t ip = 0; ip < grid.np; ++ip) {
    const double kappa = grid.wavenumber(grid.p_at(ip), state.frame());
    for (std::size_t ix = 0; ix < grid.nx; ++ix)
      map.values[ip * grid.nx + ix] = scale * wigner_analytic(state, grid.position(grid.x_at(ix), state.frame()), kappa);
  }
  return map;
}

namespace {

constexpr double kWindowHalfWidth = 8.0;  // in w0 around each pair's separation centre
constexpr int kInitialStepDivisor = 64;   // h = w0 / 64
constexpr int kMaxRefinements = 3;

// Integrates f(s) e^{-i s kappa} over s for all kappa at one x with trapezoid
// steps h and 2h; returns false when the two disagree beyond tolerance.
bool integrate_pair(const std::vector<cplx>& f, double s0, double h, const std::vector<double>& kappas,
                    std::vector<cplx>& result) {
  double scale = 0.0;
  for (const auto& v : f) scale += std::abs(v);
  scale *= h;
  const double tol = 1e-12 * std::max(scale, 1e-300);
  const std::size_t n = f.size();
  for (std::size_t m = 0; m < kappas.size(); ++m) {
    const double kappa = kappas[m];
    cplx r = std::polar(1.0, -s0 * kappa);
    const cplx step = std::polar(1.0, -h * kappa);
    cplx fine{}, coarse{};
    for (std::size_t i = 0; i < n; ++i) {
      const cplx term = f[i] * r;
      const double wt = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
      fine += wt * term;
      if (i % 2 == 0) coarse += wt * term;
      r *= step;
    }
    fine *= h;
    coarse *= 2.0 * h;
    if (std::abs(fine - coarse) > tol) return false;
    result[m] = fine;
  }
  return true;
}

}  // namespace

WignerMap wigner_numeric(const SuperpositionState& state, const PhaseSpaceGrid& grid) {
  grid.validate();
  const ModeFrame& frame = state.frame();
  const double w0 = frame.w0();
  const auto terms = state.terms();
  const std::size_t nt = terms.size();

  std::vector<double> kappas(grid.np);
  for (std::size_t ip = 0; ip < grid.np; ++ip) kappas[ip] = grid.wavenumber(grid.p_at(ip), frame);

  WignerMap map{grid, std::vector<double>(grid.nx * grid.np, 0.0)};
  std::vector<cplx> f, integral(grid.np);
  for (std::size_t ix = 0; ix < grid.nx; ++ix) {
    const double x = grid.position(grid.x_at(ix), frame);
    std::vector<double> column(grid.np, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = i; j < nt; ++j) {
        const cplx weight = (i == j ? 1.0 : 2.0) * terms[i].coeff * std::conj(terms[j].coeff) *
                            coherent_overlap(terms[i].alpha_y, terms[j].alpha_y);
        const double centre = frame.displacement(terms[i].alpha_x.real()) - frame.displacement(terms[j].alpha_x.real());
        bool converged = false;
        for (int level = 0; level <= kMaxRefinements && !converged; ++level) {
          const double h = w0 / (kInitialStepDivisor << level);
          const auto half_steps = static_cast<std::size_t>(kWindowHalfWidth * (kInitialStepDivisor << level));
          const double s0 = centre - h * static_cast<double>(half_steps);
          f.resize(2 * half_steps + 1);
          for (std::size_t n = 0; n < f.size(); ++n) {
            const double s = s0 + h * static_cast<double>(n);
            f[n] = coherent_amplitude(frame, terms[i].alpha_x, x + s / 2.0) *
                   std::conj(coherent_amplitude(frame, terms[j].alpha_x, x - s / 2.0));
          }
          converged = integrate_pair(f, s0, h, kappas, integral);
        }
        if (!converged)
          throw NumericError("wigner_numeric: quadrature did not converge at x = " + std::to_string(x) + " m");
        for (std::size_t ip = 0; ip < grid.np; ++ip) column[ip] += (weight * integral[ip]).real();
      }
    }
    const double scale = grid.density_scale() / (2.0 * kPi);
    for (std::size_t ip = 0; ip < grid.np; ++ip) map.values[ip * grid.nx + ix] = scale * column[ip];
  }
  return map;
}

QuadratureMoments quadrature_moments(const SuperpositionState& state, double theta) {
  // <a>, <a^2>, <a^dagger a> from coherent-state algebra, a = sqrt2 alpha_x.
  cplx mean_a{}, mean_a2{};
  double number = 0.0;
  const auto terms = state.terms();
  for (const auto& bra : terms) {
    for (const auto& ket : terms) {
      const cplx w = std::conj(bra.coeff) * ket.coeff * term_overlap(bra, ket);
      const cplx a = kSqrt2 * ket.alpha_x;
      const cplx b = kSqrt2 * bra.alpha_x;
      mean_a += w * a;
      mean_a2 += w * a * a;
      number += (w * std::conj(b) * a).real();
    }
  }
  const cplx turn = std::polar(1.0, -theta);
  const double mean = kSqrt2 * (turn * mean_a).real();
  const double second = (turn * turn * mean_a2).real() + number + 0.5;
  return {mean, second - mean * mean};
}

PhaseSpaceGrid auto_grid(const SuperpositionState& state, std::size_t n, PhaseUnits units, double x_origin) {
  if (n < 2) throw std::invalid_argument("auto_grid: need n >= 2");
  const ModeFrame& frame = state.frame();
  const double w0 = frame.w0();
  const auto mx = quadrature_moments(state, 0.0);
  const auto mp = quadrature_moments(state, kPi / 2.0);

  // Work in the scaled axes, convert at the end.
  const double cx = mx.mean - kSqrt2 * x_origin / w0;
  const double cp = mp.mean;
  double hx = 4.0 * std::sqrt(mx.variance);
  double hp = 4.0 * std::sqrt(mp.variance);

  auto make = [&](double half_x, double half_p) {
    PhaseSpaceGrid g;
    g.nx = g.np = n;
    g.units = PhaseUnits::Scaled;
    g.x_origin = x_origin;
    g.x_min = cx - half_x;
    g.x_max = cx + half_x;
    g.p_min = cp - half_p;
    g.p_max = cp + half_p;
    return g;
  };

  constexpr std::size_t probe = 33;
  for (int iter = 0; iter < 40; ++iter) {
    const auto g = make(hx, hp);
    auto eval = [&](double X, double P) {
      return std::abs(wigner_analytic(state, g.position(X, frame), g.wavenumber(P, frame)));
    };
    double peak = eval(cx, cp);
    for (std::size_t i = 0; i < probe; ++i)
      for (std::size_t j = 0; j < probe; ++j)
        peak = std::max(peak, eval(g.x_min + (g.x_max - g.x_min) * i / (probe - 1.0),
                                   g.p_min + (g.p_max - g.p_min) * j / (probe - 1.0)));
    double edge_x = 0.0, edge_p = 0.0;
    const std::size_t m = std::max<std::size_t>(n, 129);
    for (std::size_t i = 0; i < m; ++i) {
      const double X = g.x_min + (g.x_max - g.x_min) * i / (m - 1.0);
      const double P = g.p_min + (g.p_max - g.p_min) * i / (m - 1.0);
      edge_p = std::max({edge_p, eval(X, g.p_min), eval(X, g.p_max)});
      edge_x = std::max({edge_x, eval(g.x_min, P), eval(g.x_max, P)});
    }
    const bool grow_x = edge_x > 1e-8 * peak;
    const bool grow_p = edge_p > 1e-8 * peak;
    if (!grow_x && !grow_p) {
      if (units == PhaseUnits::Scaled) return g;
      PhaseSpaceGrid si = g;
      si.units = PhaseUnits::SI;
      si.x_origin = 0.0;
      si.x_min = g.position(g.x_min, frame);
      si.x_max = g.position(g.x_max, frame);
      si.p_min = kHbar * g.wavenumber(g.p_min, frame);
      si.p_max = kHbar * g.wavenumber(g.p_max, frame);
      return si;
    }
    if (grow_x) hx *= 1.5;
    if (grow_p) hp *= 1.5;
  }
  throw NumericError("auto_grid: boundary did not decay below 1e-8 of the peak");
}

double marginal_position(const QubitParams& params, const ModeFrame& frame, double x) {
  const double w0 = frame.w0();
  const double T = params.T();
  const double d = params.d();
  auto i_vac = [&](double u) { return std::sqrt(2.0 / kPi) / w0 * std::exp(-2.0 * u * u / (w0 * w0)); };
  const double cross = 2.0 * std::sqrt(T * (1.0 - T));
  const double cos_d = std::exp(-d * d / (2.0 * w0 * w0));
  const double n_arb = 1.0 + cross * cos_d * std::cos(params.phi());
  if (!(n_arb > 1e-15)) throw NumericError("marginal_position: N_arb <= 1e-15");
  return (T * i_vac(x) + (1.0 - T) * i_vac(x - d) + cross * i_vac(x - d / 2.0) * cos_d * std::cos(params.phi())) /
         n_arb;
}

double marginal_momentum(const QubitParams& params, const ModeFrame& frame, double p) {
  const double w0 = frame.w0();
  const double T = params.T();
  const double d = params.d();
  const double i_vac = w0 / (std::sqrt(2.0 * kPi) * kHbar) * std::exp(-w0 * w0 * p * p / (2.0 * kHbar * kHbar));
  const double cross = 2.0 * std::sqrt(T * (1.0 - T));
  const double n_arb = 1.0 + cross * std::exp(-d * d / (2.0 * w0 * w0)) * std::cos(params.phi());
  if (!(n_arb > 1e-15)) throw NumericError("marginal_momentum: N_arb <= 1e-15");
  return i_vac * (1.0 + cross * std::cos(params.phi() - d * p / kHbar)) / n_arb;
}

NegativityReport negativity_scan(const WignerMap& map) {
  NegativityReport r;
  r.min_value = map.values.front();
  const double cell = map.grid.dx() * map.grid.dp();
  for (std::size_t ip = 0; ip < map.grid.np; ++ip) {
    for (std::size_t ix = 0; ix < map.grid.nx; ++ix) {
      const double v = map.at(ix, ip);
      if (v < r.min_value || (ix == 0 && ip == 0)) {
        r.min_value = v;
        r.x_at_min = map.grid.x_at(ix);
        r.p_at_min = map.grid.p_at(ip);
      }
      if (v < 0.0) r.negative_volume += -v * cell;
    }
  }
  return r;
}

NegativityReport negativity_scan(const SuperpositionState& state, const PhaseSpaceGrid& grid) {
  return negativity_scan(wigner_analytic_map(state, grid));
}

}  // namespace cvq
