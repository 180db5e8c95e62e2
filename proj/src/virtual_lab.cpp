#include "cvq/virtual_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "cvq/error.hpp"
#include "cvq/propagation.hpp"
#include "cvq/rng.hpp"
#include "cvq/wavefunction.hpp"

namespace cvq {

void PlaneSpec::validate() const {
  if (kind == PlaneKind::Position) return;
  if (!(focal_length > 0.0)) throw std::invalid_argument("PlaneSpec: focal length must be > 0");
  // Only the Fourier plane maps the mode onto itself up to a scale for f != z_R.
  if (std::abs(theta_l - kPi / 2.0) > 1e-12)
    throw std::invalid_argument("PlaneSpec: momentum plane requires theta_L = pi/2");
}

void CcdConfig::validate() const {
  if (nx == 0 || ny == 0) throw std::invalid_argument("CcdConfig: sensor must have at least one pixel");
  if (!(pitch > 0.0)) throw std::invalid_argument("CcdConfig: pitch must be > 0");
  if (bit_depth != 8 && bit_depth != 12 && bit_depth != 16)
    throw std::invalid_argument("CcdConfig: bit depth must be 8, 12 or 16");
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw std::invalid_argument("CcdConfig: visibility must lie in [0, 1]");
  if (!(background >= 0.0)) throw std::invalid_argument("CcdConfig: background must be >= 0");
  if (!std::isfinite(exposure_scale)) throw std::invalid_argument("CcdConfig: exposure scale must be finite");
}

std::vector<double> pixel_power(const SuperpositionState& state, const PlaneSpec& plane, const CcdConfig& config) {
  plane.validate();
  config.validate();
  const ModeFrame& frame = state.frame();

  // Momentum plane: x' = x_r f / z_R with x_r the position axis of the
  // quarter-rotated state; the amplitude picks up sqrt(z_R / f) per axis.
  const bool momentum = plane.kind == PlaneKind::Momentum;
  const SuperpositionState observed = momentum ? rotate_phase_space(state, kPi / 2.0) : state;
  const double to_mode = momentum ? frame.rayleigh_range() / plane.focal_length : 1.0;
  const double amp_scale = std::sqrt(to_mode);

  const auto terms = observed.terms();
  const std::size_t nt = terms.size();
  std::vector<cplx> fx(nt * config.nx), fy(nt * config.ny);
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t i = 0; i < config.nx; ++i)
      fx[t * config.nx + i] =
          terms[t].coeff * amp_scale * coherent_amplitude(frame, terms[t].alpha_x, to_mode * config.pixel_center(i, config.nx));
    for (std::size_t j = 0; j < config.ny; ++j)
      fy[t * config.ny + j] = amp_scale * coherent_amplitude(frame, terms[t].alpha_y, to_mode * config.pixel_center(j, config.ny));
  }

  const double area = config.pitch * config.pitch;
  std::vector<double> power(config.nx * config.ny);
  for (std::size_t j = 0; j < config.ny; ++j) {
    for (std::size_t i = 0; i < config.nx; ++i) {
      double direct = 0.0, cross = 0.0;
      for (std::size_t a = 0; a < nt; ++a) {
        const cplx ua = fx[a * config.nx + i] * fy[a * config.ny + j];
        direct += std::norm(ua);
        for (std::size_t b = a + 1; b < nt; ++b)
          cross += 2.0 * (ua * std::conj(fx[b * config.nx + i] * fy[b * config.ny + j])).real();
      }
      power[j * config.nx + i] = std::max(0.0, direct + config.visibility * cross) * area;
    }
  }
  return power;
}

double auto_exposure(const SuperpositionState& state, const PlaneSpec& plane, const CcdConfig& config, double fill) {
  if (!(fill > 0.0 && fill <= 1.0)) throw std::invalid_argument("auto_exposure: fill must lie in (0, 1]");
  const double headroom = static_cast<double>(config.max_count()) - config.background;
  if (!(headroom > 0.0)) throw std::invalid_argument("auto_exposure: background leaves no dynamic range");
  const auto power = pixel_power(state, plane, config);
  const double peak = *std::max_element(power.begin(), power.end());
  if (!(peak > 0.0)) throw NumericError("auto_exposure: no power reaches the sensor");
  return fill * headroom / peak;
}

CcdImage render_ccd(const SuperpositionState& state, const PlaneSpec& plane, const CcdConfig& config) {
  const auto power = pixel_power(state, plane, config);
  CcdImage image{config, plane, std::vector<std::uint16_t>(power.size()), false};
  double exposure = config.exposure_scale;
  if (exposure <= 0.0) {
    exposure = auto_exposure(state, plane, config);
    image.config.exposure_scale = exposure;
  }
  const double top = static_cast<double>(config.max_count());
  std::size_t at_max = 0;
  for (std::size_t j = 0; j < config.ny; ++j) {
    Substream stream(config.seed, j);
    for (std::size_t i = 0; i < config.nx; ++i) {
      double signal = exposure * power[j * config.nx + i];
      if (config.shot_noise && signal > 0.0) signal = static_cast<double>(std::poisson_distribution<long long>(signal)(stream));
      const double value = std::clamp(std::round(config.background + signal), 0.0, top);
      image.counts[j * config.nx + i] = static_cast<std::uint16_t>(value);
      if (value == top) ++at_max;
    }
  }
  image.saturated = at_max > 0;
  if (at_max == image.counts.size())
    throw NumericError("render_ccd: every pixel saturated; exposure misconfigured");
  return image;
}

CcdImage render_ccd(const QubitParams& params, const ModeFrame& frame, const PlaneSpec& plane, const CcdConfig& config) {
  return render_ccd(make_qubit_state(params, frame), plane, config);
}

std::vector<double> profile_from_image(const CcdImage& image) {
  const auto& cfg = image.config;
  constexpr std::size_t kBorder = 8;
  if (cfg.nx < 2 * kBorder + 1) throw std::invalid_argument("profile_from_image: need more than 16 columns");
  if (image.counts.size() != cfg.nx * cfg.ny) throw std::invalid_argument("profile_from_image: pixel count mismatch");
  const std::uint16_t top = static_cast<std::uint16_t>(cfg.max_count());
  if (std::all_of(image.counts.begin(), image.counts.end(), [top](std::uint16_t c) { return c >= top; }))
    throw NumericError("profile_from_image: image is fully saturated");

  std::vector<double> columns(cfg.nx, 0.0);
  for (std::size_t j = 0; j < cfg.ny; ++j)
    for (std::size_t i = 0; i < cfg.nx; ++i) columns[i] += image.counts[j * cfg.nx + i];

  std::vector<double> border;
  border.insert(border.end(), columns.begin(), columns.begin() + kBorder);
  border.insert(border.end(), columns.end() - kBorder, columns.end());
  std::sort(border.begin(), border.end());
  const double background = 0.5 * (border[kBorder - 1] + border[kBorder]);

  double total = 0.0;
  for (auto& c : columns) {
    c = std::max(0.0, c - background);
    total += c;
  }
  if (!(total > 0.0)) throw NumericError("profile_from_image: no signal above background");
  for (auto& c : columns) c /= total;
  return columns;
}

std::vector<double> profile_coordinates(std::size_t n, double pitch) {
  CcdConfig cfg;
  cfg.pitch = pitch;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = cfg.pixel_center(i, n);
  return x;
}

}  // namespace cvq
