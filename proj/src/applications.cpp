#include "cvq/applications.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "cvq/rng.hpp"
#include "cvq/wavefunction.hpp"
#include "cvq/wigner.hpp"

namespace cvq {

std::vector<SweepPoint> profile_sweep(const std::vector<std::pair<double, double>>& path, double d,
                                      const ModeFrame& frame) {
  if (path.empty()) throw std::invalid_argument("profile_sweep: path must not be empty");
  std::vector<SweepPoint> out;
  out.reserve(path.size());
  for (const auto& [T, phi] : path) {
    const QubitParams params(T, phi, d);
    const auto state = make_qubit_state(params, frame);
    const auto mx = quadrature_moments(state, 0.0);
    const auto mp = quadrature_moments(state, kPi / 2.0);
    SweepPoint p;
    p.T = T;
    p.phi = params.phi_signed();
    p.delta_x = frame.w0() / kSqrt2 * std::sqrt(mx.variance);
    p.mean_vx = kSqrt2 * mp.mean / frame.w0() / frame.k();
    p.center_intensity = marginal_position(params, frame, d / 2.0);
    out.push_back(p);
  }
  return out;
}

std::string_view to_string(BasisScheme scheme) {
  switch (scheme) {
    case BasisScheme::FourCat: return "four_cat";
    case BasisScheme::TwelveState: return "twelve_state";
    case BasisScheme::FourHgReference: return "four_hg_reference";
  }
  return "unknown";
}

BasisScheme basis_scheme_from_string(std::string_view name) {
  for (auto s : {BasisScheme::FourCat, BasisScheme::TwelveState, BasisScheme::FourHgReference})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown basis scheme '" + std::string(name) +
                              "' (expected four_cat, twelve_state or four_hg_reference)");
}

double BasisSet::max_identity_deviation() const {
  double worst = 0.0;
  const std::size_t m = states.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, std::abs(gram_at(i, j) - cplx(i == j ? 1.0 : 0.0)));
  return worst;
}

SuperpositionState linear_combination(cplx a, const SuperpositionState& u, cplx b, const SuperpositionState& v) {
  if (!(u.frame() == v.frame())) throw std::invalid_argument("linear_combination: frame mismatch");
  std::vector<CoherentTerm> terms;
  for (const auto& t : u.terms()) terms.push_back({a * t.coeff, t.alpha_x, t.alpha_y});
  for (const auto& t : v.terms()) terms.push_back({b * t.coeff, t.alpha_x, t.alpha_y});
  return SuperpositionState(u.frame(), std::move(terms));
}

namespace {

// (D_y(-alpha/2) +- D_y(alpha/2)) |half>, |half> = D_x(alpha/2) |vac>.
SuperpositionState y_cat(double alpha, double sign, const ModeFrame& frame) {
  return SuperpositionState(frame, {{1.0, alpha / 2.0, -alpha / 2.0}, {sign, alpha / 2.0, alpha / 2.0}});
}

void fill_gram(BasisSet& set) {
  const std::size_t m = set.states.size();
  set.gram.assign(m * m, cplx{});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) set.gram[i * m + j] = inner_product(set.states[i], set.states[j]);
}

}  // namespace

BasisSet build_basis(BasisScheme scheme, OverlapAngle theta_d, const ModeFrame& frame) {
  const double alpha = theta_d.alpha();
  BasisSet set;
  set.name = std::string(to_string(scheme));
  set.center_x = alpha / 2.0;
  auto typical = [&](TypicalState k) { return make_typical_state(k, theta_d, frame).state; };
  const cplx i1(0.0, 1.0);
  switch (scheme) {
    case BasisScheme::FourCat:
      set.labels = {"cat_plus", "cat_minus", "cat_plus_y", "cat_minus_y"};
      set.states = {typical(TypicalState::CatPlus), typical(TypicalState::CatMinus), y_cat(alpha, 1.0, frame),
                    y_cat(alpha, -1.0, frame)};
      break;
    case BasisScheme::TwelveState: {
      const auto up_y = y_cat(alpha, 1.0, frame);
      const auto down_y = y_cat(alpha, -1.0, frame);
      set.labels = {"cat_plus",   "cat_minus",   "p_minus",   "p_plus",   "x_minus",   "x_plus",
                    "cat_plus_y", "cat_minus_y", "p_y_minus", "p_y_plus", "y_minus", "y_plus"};
      set.states = {typical(TypicalState::CatPlus),
                    typical(TypicalState::CatMinus),
                    typical(TypicalState::PMinus),
                    typical(TypicalState::PPlus),
                    typical(TypicalState::XMinus),
                    typical(TypicalState::XPlus),
                    up_y,
                    down_y,
                    linear_combination(1.0, up_y, i1, down_y),
                    linear_combination(1.0, up_y, -i1, down_y),
                    linear_combination(1.0, up_y, 1.0, down_y),
                    linear_combination(1.0, up_y, -1.0, down_y)};
      break;
    }
    case BasisScheme::FourHgReference:
      set.labels = {"vac", "coh_x", "coh_y", "coh_xy"};
      set.center_x = 0.0;
      set.states = {SuperpositionState(frame, {{1.0, 0.0, 0.0}}), SuperpositionState(frame, {{1.0, alpha, 0.0}}),
                    SuperpositionState(frame, {{1.0, 0.0, alpha}}), SuperpositionState(frame, {{1.0, alpha, alpha}})};
      break;
  }
  fill_gram(set);
  return set;
}

void ChannelModel::validate() const {
  if (!(rotation_jitter_sigma >= 0.0) || !(path_jitter_sigma >= 0.0) || !(overlap_noise_sigma >= 0.0))
    throw std::invalid_argument("ChannelModel: sigmas must be >= 0");
  if (!(fiber.period > 0.0)) throw std::invalid_argument("ChannelModel: fiber period must be > 0");
}

namespace {

std::size_t uniform_index(Substream& s, std::size_t m) {
  return std::min(m - 1, static_cast<std::size_t>(uniform01(s) * static_cast<double>(m)));
}

}  // namespace

ProtocolStats psk_link_simulate(std::size_t n, const BasisSet& basis, const ChannelModel& channel, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("psk_link_simulate: n must be >= 1");
  if (basis.size() == 0) throw std::invalid_argument("psk_link_simulate: empty basis");
  channel.validate();
  const std::size_t m = basis.size();
  ProtocolStats stats;
  stats.rounds = n;
  for (std::size_t r = 0; r < n; ++r) {
    Substream s(seed, r);
    std::normal_distribution<double> normal;
    const std::size_t sent = uniform_index(s, m);
    const double theta = channel.rotation_jitter_sigma * normal(s) +
                         2.0 * kPi * channel.path_jitter_sigma * normal(s) / channel.fiber.period;
    const auto received = theta == 0.0 ? basis.states[sent] : rotate_phase_space(basis.states[sent], theta, basis.center_x);
    std::size_t decided = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      cplx o = inner_product(basis.states[i], received);
      if (channel.overlap_noise_sigma > 0.0) {
        const double re = normal(s), im = normal(s);
        o += channel.overlap_noise_sigma * cplx(re, im);
      }
      if (std::norm(o) > best) {
        best = std::norm(o);
        decided = i;
      }
    }
    if (decided != sent) ++stats.errors;
  }
  stats.sifted = n;
  return stats;
}

ProtocolStats qkd_simulate(std::size_t n, OverlapAngle theta_d, double path_jitter_sigma, const FiberSpec& fiber,
                           std::uint64_t seed, const ModeFrame& frame) {
  if (n == 0) throw std::invalid_argument("qkd_simulate: n must be >= 1");
  if (!(path_jitter_sigma >= 0.0)) throw std::invalid_argument("qkd_simulate: path jitter sigma must be >= 0");
  if (!(fiber.period > 0.0)) throw std::invalid_argument("qkd_simulate: fiber period must be > 0");
  const SuperpositionState states[2][2] = {
      {make_typical_state(TypicalState::XMinus, theta_d, frame).state,
       make_typical_state(TypicalState::XPlus, theta_d, frame).state},
      {make_typical_state(TypicalState::PMinus, theta_d, frame).state,
       make_typical_state(TypicalState::PPlus, theta_d, frame).state}};
  const cplx centre = theta_d.alpha() / 2.0;

  ProtocolStats stats;
  stats.rounds = n;
  for (std::size_t r = 0; r < n; ++r) {
    Substream s(seed, r);
    std::normal_distribution<double> normal;
    const std::size_t send_basis = uniform_index(s, 2);
    const std::size_t bit = uniform_index(s, 2);
    const std::size_t meas_basis = uniform_index(s, 2);
    const double dz = path_jitter_sigma * normal(s);
    const double u = uniform01(s);

    const double theta = 2.0 * kPi * dz / fiber.period;
    const auto& sent = states[send_basis][bit];
    const auto received = theta == 0.0 ? sent : rotate_phase_space(sent, theta, centre);
    const double p0 = std::norm(inner_product(states[meas_basis][0], received));
    const double p1 = std::norm(inner_product(states[meas_basis][1], received));
    std::size_t outcome;
    if (u < p0) {
      outcome = 0;
    } else if (u < p0 + p1) {
      outcome = 1;
    } else {
      ++stats.lost;
      continue;
    }
    if (meas_basis == send_basis) {
      ++stats.sifted;
      if (outcome != bit) ++stats.errors;
    } else {
      ++stats.mismatched;
      if (outcome != bit) ++stats.mismatched_errors;
    }
  }
  return stats;
}

double Mixture::purity() const {
  double p = 0.0;
  for (const auto& [wi, si] : components)
    for (const auto& [wj, sj] : components) p += wi * wj * std::norm(inner_product(si, sj));
  return p;
}

double Mixture::wigner(double x, double kappa) const {
  double w = 0.0;
  for (const auto& [weight, state] : components) w += weight * wigner_analytic(state, x, kappa);
  return w;
}

double Mixture::position_density(double x) const {
  double rho = 0.0;
  for (const auto& [weight, state] : components) rho += weight * cvq::position_density(state, x);
  return rho;
}

Mixture dephased_mixture(double d, const ModeFrame& frame) {
  if (!(d > 0.0)) throw std::invalid_argument("dephased_mixture: d must be > 0");
  Mixture m;
  m.components.emplace_back(0.5, make_qubit_state(QubitParams(1.0, 0.0, d), frame));
  m.components.emplace_back(0.5, make_qubit_state(QubitParams(0.0, 0.0, d), frame));
  return m;
}

}  // namespace cvq
