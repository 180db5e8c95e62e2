#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvq/error.hpp"
#include "cvq/virtual_lab.hpp"
#include "cvq/wigner.hpp"

using namespace cvq;

namespace {

const ModeFrame kLab = ModeFrame::laboratory();
const OverlapAngle kTheta = OverlapAngle::from_theta(0.4 * kPi);
const double kD = kTheta.displacement(kLab);

SuperpositionState typical(TypicalState k) { return make_typical_state(k, kTheta, kLab).state; }

CcdImage render(const SuperpositionState& s, const PlaneSpec& plane, double visibility = 1.0, double background = 0.0) {
  CcdConfig cfg;
  cfg.visibility = visibility;
  cfg.background = background;
  return render_ccd(s, plane, cfg);
}

// Closed-form marginal in the CCD plane at the pixel centres, normalized to unit sum.
std::vector<double> expected_profile(const QubitParams& p, const PlaneSpec& plane, const CcdConfig& cfg) {
  std::vector<double> out(cfg.nx);
  for (std::size_t i = 0; i < cfg.nx; ++i) {
    const double x = cfg.pixel_center(i, cfg.nx);
    out[i] = plane.kind == PlaneKind::Position
                 ? marginal_position(p, kLab, x)
                 : marginal_momentum(p, kLab, kHbar * kLab.k() * x / plane.focal_length);
  }
  const double s = std::accumulate(out.begin(), out.end(), 0.0);
  for (auto& v : out) v /= s;
  return out;
}

double fringe_contrast(const std::vector<double>& profile) {
  // Central trough against the two neighbouring maxima.
  const std::size_t mid = profile.size() / 2;
  const double lo = std::min(profile[mid - 1], profile[mid]);
  const double hi = *std::max_element(profile.begin(), profile.end());
  return (hi - lo) / (hi + lo);
}

}  // namespace

TEST(Config, Validation) {
  CcdConfig c;
  EXPECT_NO_THROW(c.validate());
  c.visibility = 1.2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = CcdConfig{};
  c.pitch = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = CcdConfig{};
  c.bit_depth = 10;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  for (int b : {8, 12, 16}) {
    c.bit_depth = b;
    EXPECT_NO_THROW(c.validate());
  }
  PlaneSpec bad = PlaneSpec::momentum();
  bad.theta_l = kPi / 3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Render, VacuumMomentumWidth) {
  const auto img = render(typical(TypicalState::Vacuum), PlaneSpec::momentum());
  const auto fit = fit_gaussian_profile(profile_from_image(img), img.config.pitch);
  EXPECT_NEAR(fit.radius / img.config.pitch, 46.0, 1.0);
  // Analytic 1/e^2 half-width of the momentum-plane vacuum: 2 f / (k w0).
  const double expected = 2.0 * 0.145 / (kLab.k() * kLab.w0());
  EXPECT_NEAR(fit.radius / expected, 1.0, 5e-3);
}

TEST(Render, VacuumPositionWidth) {
  const auto img = render(typical(TypicalState::Vacuum), PlaneSpec::position());
  const auto fit = fit_gaussian_profile(profile_from_image(img), img.config.pitch);
  EXPECT_NEAR(fit.radius / kLab.w0(), 1.0, 5e-3);
  EXPECT_NEAR(kLab.w0() / img.config.pitch, 18.5, 0.1);
  EXPECT_FALSE(fit.poor);
}

TEST(Render, OddCatMomentumTrough) {
  const auto img = render(typical(TypicalState::CatMinus), PlaneSpec::momentum(), 1.0, 3.0);
  for (std::size_t iy = 0; iy < img.config.ny; ++iy) {
    EXPECT_EQ(img.at(359, iy), 3);
    EXPECT_EQ(img.at(360, iy), 3);
  }
}

TEST(Render, CountsInRangeAndSaturation) {
  CcdConfig cfg;
  cfg.bit_depth = 12;
  const auto ok = render_ccd(typical(TypicalState::Coherent), PlaneSpec::position(), cfg);
  EXPECT_FALSE(ok.saturated);
  EXPECT_LE(*std::max_element(ok.counts.begin(), ok.counts.end()), cfg.max_count());
  cfg.exposure_scale = 50.0 * auto_exposure(typical(TypicalState::Coherent), PlaneSpec::position(), cfg);
  const auto hot = render_ccd(typical(TypicalState::Coherent), PlaneSpec::position(), cfg);
  EXPECT_TRUE(hot.saturated);
  EXPECT_LE(*std::max_element(hot.counts.begin(), hot.counts.end()), cfg.max_count());
  cfg.background = static_cast<double>(cfg.max_count());
  EXPECT_THROW(render_ccd(typical(TypicalState::Coherent), PlaneSpec::position(), cfg), NumericError);
}

TEST(Render, ParamsOverloadMatchesState) {
  const QubitParams p(0.3, 1.0, kD);
  CcdConfig cfg;
  const auto a = render_ccd(p, kLab, PlaneSpec::momentum(), cfg);
  const auto b = render_ccd(make_qubit_state(p, kLab), PlaneSpec::momentum(), cfg);
  EXPECT_EQ(a.counts, b.counts);
}

TEST(Render, ShotNoiseIsSeeded) {
  CcdConfig cfg;
  cfg.shot_noise = true;
  cfg.seed = 7;
  const auto s = typical(TypicalState::CatPlus);
  const auto a = render_ccd(s, PlaneSpec::momentum(), cfg), b = render_ccd(s, PlaneSpec::momentum(), cfg);
  EXPECT_EQ(a.counts, b.counts);
  cfg.seed = 8;
  EXPECT_NE(render_ccd(s, PlaneSpec::momentum(), cfg).counts, a.counts);
}

TEST(Profile, NormalizedAndDegenerate) {
  const auto img = render(typical(TypicalState::CatPlus), PlaneSpec::position(), 1.0, 12.0);
  const auto prof = profile_from_image(img);
  EXPECT_NEAR(std::accumulate(prof.begin(), prof.end(), 0.0), 1.0, 1e-12);
  CcdImage flat = img;
  std::fill(flat.counts.begin(), flat.counts.end(), std::uint16_t{12});
  EXPECT_THROW(profile_from_image(flat), NumericError);
}

TEST(Profile, RoundTripMatchesMarginals) {
  for (auto kind : kAllTypicalStates) {
    const auto ts = make_typical_state(kind, kTheta, kLab);
    for (const auto& plane : {PlaneSpec::position(), PlaneSpec::momentum()}) {
      const auto img = render(ts.state, plane);
      const auto prof = profile_from_image(img);
      const auto want = expected_profile(ts.params, plane, img.config);
      const double peak = *std::max_element(want.begin(), want.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < prof.size(); ++i) sum += (prof[i] - want[i]) * (prof[i] - want[i]);
      EXPECT_LE(std::sqrt(sum / prof.size()), 2.0 / 255.0 * peak) << to_string(kind);
    }
  }
}

TEST(Profile, VisibilityRaisesContrast) {
  double last = -1.0;
  for (double v : {0.8, 0.9, 0.97, 1.0}) {
    const auto c = fringe_contrast(profile_from_image(render(typical(TypicalState::CatMinus), PlaneSpec::momentum(), v)));
    EXPECT_GT(c, last) << v;
    last = c;
  }
}

TEST(GaussianFitting, CoherentCentreAndCatFlag) {
  const auto coh = render(typical(TypicalState::Coherent), PlaneSpec::position());
  const auto fc = fit_gaussian_profile(profile_from_image(coh), coh.config.pitch);
  EXPECT_NEAR(fc.center, kD, 0.5 * coh.config.pitch);
  EXPECT_NEAR(fc.radius / kLab.w0(), 1.0, 5e-3);
  const auto cat = render(typical(TypicalState::CatMinus), PlaneSpec::position());
  EXPECT_TRUE(fit_gaussian_profile(profile_from_image(cat), cat.config.pitch).poor);
}

TEST(GaussianFitting, RejectsSparseProfile) {
  std::vector<double> p(100, 0.0);
  p[50] = 1.0;
  EXPECT_THROW(fit_gaussian_profile(p, 6.5e-6), std::invalid_argument);
}

namespace {

FringeModel model(double T, double v) {
  FringeModel m;
  m.d = kD;
  m.w0 = kLab.w0();
  m.T = T;
  m.wavelength = kLab.wavelength();
  m.visibility = v;
  return m;
}

double injected_recovery(double phi) {
  CcdConfig cfg;
  cfg.visibility = 0.97;
  const auto img = render_ccd(QubitParams(0.5, phi, kD), kLab, PlaneSpec::momentum(), cfg);
  const auto est = estimate_relative_phase(profile_from_image(img), model(0.5, 0.97));
  return std::abs(wrap_signed(est.phi - phi));
}

}  // namespace

TEST(PhaseEstimate, RecoversEquatorPhases) {
  for (double phi : kEquatorPhases) EXPECT_LE(injected_recovery(phi), 0.03 * kPi) << phi / kPi;
}

TEST(PhaseEstimate, CalibrationOverEighths) {
  double total = 0.0, worst = 0.0;
  for (int k = -7; k <= 8; ++k) {
    const double e = injected_recovery(k * kPi / 8);
    total += e;
    worst = std::max(worst, e);
  }
  EXPECT_LE(total / 16, 0.03 * kPi);
  // Quantization bias at 8 bits stays far inside the budget.
  EXPECT_LE(worst, 1e-3 * kPi);
}

TEST(PhaseEstimate, NoFringesIsUnidentifiable) {
  const auto img = render_ccd(QubitParams(1.0, 0.0, kD), kLab, PlaneSpec::momentum(), CcdConfig{});
  EXPECT_THROW(estimate_relative_phase(profile_from_image(img), model(1.0, 1.0)), NumericError);
  // Weak fringes in a dim, shot-noise dominated frame.
  CcdConfig dim;
  dim.shot_noise = true;
  dim.seed = 3;
  dim.visibility = 0.02;
  const QubitParams p(0.5, 0.3, kD);
  dim.exposure_scale = auto_exposure(make_qubit_state(p, kLab), PlaneSpec::momentum(), dim) * 4.0 / 255.0;
  const auto noisy = render_ccd(p, kLab, PlaneSpec::momentum(), dim);
  EXPECT_THROW(estimate_relative_phase(profile_from_image(noisy), model(0.5, 0.02)), NumericError);
}

TEST(Scenarios, CurvesNormalizedAndShaped) {
  const auto curves = scenario_reports(kLab);
  ASSERT_EQ(curves.size(), 12u);
  auto integral = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
  };
  auto variance = [&](const ScenarioCurve& c, const std::vector<double>& y) {
    std::vector<double> m1(y.size()), m2(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      m1[i] = y[i] * c.coordinate[i];
      m2[i] = y[i] * c.coordinate[i] * c.coordinate[i];
    }
    const double mu = integral(c.coordinate, m1);
    return integral(c.coordinate, m2) - mu * mu;
  };
  for (const auto& c : curves) {
    EXPECT_NEAR(integral(c.coordinate, c.density), 1.0, 1e-6) << c.panel;
    EXPECT_NEAR(integral(c.coordinate, c.sql), 1.0, 1e-6) << c.panel;
    const auto peak_at = [&] {
      return c.coordinate[static_cast<std::size_t>(std::max_element(c.density.begin(), c.density.end()) - c.density.begin())];
    };
    // Vacuum 1/e^2 half-width in the momentum plane.
    const double half_width = 2.0 * 0.145 / (kLab.k() * kLab.w0());
    if (c.panel == "fig5_a-1") {
      // phi = 0.98 pi: a near-zero trough at d/2 between two peaks.
      const std::size_t mid = c.coordinate.size() / 2;
      const double top = *std::max_element(c.density.begin(), c.density.end());
      EXPECT_NEAR(c.coordinate[mid], kD / 2, 1e-12);
      EXPECT_LT(c.density[mid], 0.01 * top);
      EXPECT_GT(*std::max_element(c.density.begin(), c.density.begin() + mid), 0.9 * top);
      EXPECT_GT(*std::max_element(c.density.begin() + mid, c.density.end()), 0.9 * top);
    }
    if (c.panel == "fig5_b-2") {
      EXPECT_LT(std::abs(peak_at()), 0.25 * half_width);
      EXPECT_LT(variance(c, c.density), variance(c, c.sql));
    }
    if (c.panel == "fig5_c-2") EXPECT_LT(peak_at(), -0.25 * half_width);
    if (c.panel == "fig5_d-2") EXPECT_GT(peak_at(), 0.25 * half_width);
  }
}
