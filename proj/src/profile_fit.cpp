#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cvq/error.hpp"
#include "cvq/virtual_lab.hpp"

namespace cvq {

namespace {

struct Iterate {
  Eigen::Vector3d params;  // amplitude, centre (px), radius (px)
  double rss;
  double lambda;
};

std::string dump(const std::vector<Iterate>& history) {
  std::ostringstream os;
  const std::size_t from = history.size() > 5 ? history.size() - 5 : 0;
  for (std::size_t i = from; i < history.size(); ++i) {
    const auto& it = history[i];
    os << " [" << i << ": A=" << it.params[0] << " c=" << it.params[1] << "px r=" << it.params[2]
       << "px rss=" << it.rss << " lambda=" << it.lambda << "]";
  }
  return os.str();
}

}  // namespace

GaussianFit fit_gaussian_profile(const std::vector<double>& profile, double pitch) {
  if (!(pitch > 0.0)) throw std::invalid_argument("fit_gaussian_profile: pitch must be > 0");
  const auto nonzero = std::count_if(profile.begin(), profile.end(), [](double v) { return v != 0.0; });
  if (nonzero < 8) throw std::invalid_argument("fit_gaussian_profile: need at least 8 non-zero samples");

  // Pixel units keep the normal equations well conditioned.
  const std::size_t n = profile.size();
  const auto coords = profile_coordinates(n, 1.0);
  double sum = 0.0, first = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += profile[i];
    first += coords[i] * profile[i];
    peak = std::max(peak, profile[i]);
  }
  if (!(sum > 0.0) || !(peak > 0.0)) throw std::invalid_argument("fit_gaussian_profile: profile has no positive mass");
  const double mean = first / sum;
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i) second += (coords[i] - mean) * (coords[i] - mean) * profile[i];
  const double sigma = std::sqrt(std::max(second / sum, 0.25));

  double norm2 = 0.0;
  for (double v : profile) norm2 += v * v;
  const double scale = peak;

  auto residuals = [&](const Eigen::Vector3d& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = coords[i] - p[1];
      const double g = std::exp(-2.0 * u * u / (p[2] * p[2]));
      r[static_cast<Eigen::Index>(i)] = p[0] * g - profile[i] / scale;
      rss += r[static_cast<Eigen::Index>(i)] * r[static_cast<Eigen::Index>(i)];
      if (jac) {
        const auto row = static_cast<Eigen::Index>(i);
        (*jac)(row, 0) = g;
        (*jac)(row, 1) = p[0] * g * 4.0 * u / (p[2] * p[2]);
        (*jac)(row, 2) = p[0] * g * 4.0 * u * u / (p[2] * p[2] * p[2]);
      }
    }
    return rss;
  };

  Eigen::Vector3d p(1.0, mean, 2.0 * sigma);
  Eigen::VectorXd r(static_cast<Eigen::Index>(n)), r_trial(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 3);
  double lambda = 1e-3;
  double rss = residuals(p, r, &jac);
  std::vector<Iterate> history{{p, rss, lambda}};

  constexpr int kMaxIterations = 200;
  bool converged = false;
  int iter = 0;
  for (; iter < kMaxIterations && !converged; ++iter) {
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * r;
    bool accepted = false;
    while (!accepted && lambda < 1e12) {
      Eigen::Matrix3d lhs = jtj;
      lhs.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector3d step = lhs.ldlt().solve(-grad);
      const Eigen::Vector3d trial = p + step;
      if (!(trial[2] > 0.0) || !step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const double rss_trial = residuals(trial, r_trial, nullptr);
      if (rss_trial <= rss) {
        const double drop = rss - rss_trial;
        const double rel_step = step.cwiseAbs().cwiseQuotient(p.cwiseAbs().cwiseMax(1e-12)).maxCoeff();
        p = trial;
        rss = residuals(p, r, &jac);
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        converged = rel_step < 1e-10 || drop <= 1e-15 * std::max(rss, 1e-300);
      } else {
        lambda *= 10.0;
      }
    }
    history.push_back({p, rss, lambda});
    if (!accepted) converged = true;  // no descent direction left: stationary
  }
  if (!converged || !p.allFinite())
    throw NumericError("fit_gaussian_profile: no convergence after " + std::to_string(kMaxIterations) +
                       " iterations;" + dump(history));

  GaussianFit fit;
  fit.amplitude = p[0] * scale;
  fit.center = p[1] * pitch;
  fit.radius = std::abs(p[2]) * pitch;
  fit.rss = rss * scale * scale;
  fit.relative_rss = fit.rss / norm2;
  fit.poor = fit.relative_rss > kPoorFitThreshold;
  fit.iterations = iter;
  return fit;
}

PhaseEstimate estimate_relative_phase(const std::vector<double>& profile, const FringeModel& model) {
  if (!(model.d > 0.0)) throw std::invalid_argument("estimate_relative_phase: d must be > 0");
  if (!(model.w0 > 0.0) || !(model.focal_length > 0.0) || !(model.wavelength > 0.0) || !(model.pitch > 0.0))
    throw std::invalid_argument("estimate_relative_phase: w0, f, wavelength and pitch must be > 0");
  if (!(model.T >= 0.0 && model.T <= 1.0)) throw std::invalid_argument("estimate_relative_phase: T must lie in [0, 1]");
  if (profile.size() < 8) throw std::invalid_argument("estimate_relative_phase: profile too short");

  const double contrast = model.visibility * 2.0 * std::sqrt(model.T * (1.0 - model.T));
  if (!(contrast > 1e-9)) throw NumericError("estimate_relative_phase: phase unidentifiable (no interference term)");

  const std::size_t n = profile.size();
  const double k = 2.0 * kPi / model.wavelength;
  const auto xs = profile_coordinates(n, model.pitch);
  std::vector<double> envelope(n), shift(n);
  double data2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double kappa = k * xs[i] / model.focal_length;
    envelope[i] = std::exp(-model.w0 * model.w0 * kappa * kappa / 2.0);
    shift[i] = model.d * kappa;
    data2 += profile[i] * profile[i];
  }

  // Amplitude is profiled out: rss(phi) = |p|^2 - (p.m)^2 / |m|^2.
  auto evaluate = [&](double phi, double& amplitude) {
    double pm = 0.0, mm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = envelope[i] * (1.0 + contrast * std::cos(phi - shift[i]));
      pm += profile[i] * m;
      mm += m * m;
    }
    amplitude = mm > 0.0 ? pm / mm : 0.0;
    return data2 - (mm > 0.0 ? pm * pm / mm : 0.0);
  };

  constexpr int kGrid = 720;
  double best_phi = 0.0, best = 0.0, amp = 0.0;
  for (int g = 0; g < kGrid; ++g) {
    const double phi = -kPi + 2.0 * kPi * (g + 1) / kGrid;
    const double v = evaluate(phi, amp);
    if (g == 0 || v < best) {
      best = v;
      best_phi = phi;
    }
  }
  const double h = 2.0 * kPi / kGrid;
  double lo = best_phi - h, hi = best_phi + h;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
  double fa = evaluate(a, amp), fb = evaluate(b, amp);
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = evaluate(a, amp);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = evaluate(b, amp);
    }
  }

  PhaseEstimate est;
  est.phi = wrap_signed(0.5 * (lo + hi));
  est.rss = std::max(0.0, evaluate(est.phi, est.amplitude));
  est.noise_rms = std::sqrt(est.rss / static_cast<double>(n - 2));
  est.fringe_amplitude = std::abs(est.amplitude) * contrast * *std::max_element(envelope.begin(), envelope.end());
  if (!(est.fringe_amplitude > 3.0 * est.noise_rms))
    throw NumericError("estimate_relative_phase: phase unidentifiable (fringe amplitude " +
                       std::to_string(est.fringe_amplitude) + " below 3x noise floor " +
                       std::to_string(est.noise_rms) + ")");
  return est;
}

}  // namespace cvq
