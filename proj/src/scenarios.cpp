#include <cmath>
#include <string>

#include "cvq/virtual_lab.hpp"
#include "cvq/wigner.hpp"

namespace cvq {

namespace {

ScenarioCurve curve(const std::string& panel, const std::string& label, PlaneKind plane, const QubitParams& params,
                    const ModeFrame& frame, double f, std::size_t samples) {
  ScenarioCurve c{panel, label, plane, {}, {}, {}, params.phi_signed(), params.T()};
  const double d = params.d();
  const double w0 = frame.w0();
  c.coordinate.resize(samples);
  c.density.resize(samples);
  c.sql.resize(samples);
  const QubitParams half(1.0, 0.0, 0.0);
  if (plane == PlaneKind::Position) {
    const double centre = d / 2.0;
    const double span = d / 2.0 + 5.0 * w0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = centre - span + 2.0 * span * static_cast<double>(i) / static_cast<double>(samples - 1);
      c.coordinate[i] = x;
      c.density[i] = marginal_position(params, frame, x);
      c.sql[i] = marginal_position(half, frame, x - centre);
    }
  } else {
    // x' = f p / (hbar k); densities carry the Jacobian hbar k / f.
    const double jac = kHbar * frame.k() / f;
    const double span = 5.0 * 2.0 * f / (frame.k() * w0);
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = -span + 2.0 * span * static_cast<double>(i) / static_cast<double>(samples - 1);
      const double p = jac * x;
      c.coordinate[i] = x;
      c.density[i] = jac * marginal_momentum(params, frame, p);
      c.sql[i] = jac * marginal_momentum(half, frame, p);
    }
  }
  return c;
}

}  // namespace

std::vector<ScenarioCurve> scenario_reports(const ModeFrame& frame, double focal_length, std::size_t samples) {
  if (samples < 3) samples = 3;
  const double d = OverlapAngle::from_theta(0.40 * kPi).displacement(frame);
  std::vector<ScenarioCurve> out;
  const QubitParams vac(1.0, 0.0, d), coh(0.0, 0.0, d);
  out.push_back(curve("fig4_a-1", "vac", PlaneKind::Position, vac, frame, focal_length, samples));
  out.push_back(curve("fig4_a-2", "vac", PlaneKind::Momentum, vac, frame, focal_length, samples));
  out.push_back(curve("fig4_b-1", "coh", PlaneKind::Position, coh, frame, focal_length, samples));
  out.push_back(curve("fig4_b-2", "coh", PlaneKind::Momentum, coh, frame, focal_length, samples));
  const char* letters[4] = {"a", "b", "c", "d"};
  const char* labels[4] = {"odd_cat_like", "even_cat_like", "p_minus_like", "p_plus_like"};
  for (int i = 0; i < 4; ++i) {
    const QubitParams params(0.5, kEquatorPhases[i], d);
    out.push_back(curve(std::string("fig5_") + letters[i] + "-1", labels[i], PlaneKind::Position, params, frame,
                        focal_length, samples));
    out.push_back(curve(std::string("fig5_") + letters[i] + "-2", labels[i], PlaneKind::Momentum, params, frame,
                        focal_length, samples));
  }
  return out;
}

}  // namespace cvq
