#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cvq/propagation.hpp"
#include "cvq/state.hpp"

namespace cvq {

struct SweepPoint {
  double T = 0.0;
  double phi = 0.0;
  double delta_x = 0.0;           // position standard deviation, m
  double mean_vx = 0.0;           // <p_x> / (hbar k)
  double center_intensity = 0.0;  // position density at d/2, 1/m
};

/// Waist-plane statistics along a path of (T, phi) at fixed separation d.
std::vector<SweepPoint> profile_sweep(const std::vector<std::pair<double, double>>& path, double d,
                                      const ModeFrame& frame);

enum class BasisScheme { FourCat, TwelveState, FourHgReference };

std::string_view to_string(BasisScheme scheme);
BasisScheme basis_scheme_from_string(std::string_view name);

struct BasisSet {
  std::string name;
  std::vector<std::string> labels;
  std::vector<SuperpositionState> states;
  std::vector<cplx> gram;  // gram[i * M + j] = <s_i|s_j>
  cplx center_x{};         // common rotation centre (alpha convention)

  std::size_t size() const { return states.size(); }
  cplx gram_at(std::size_t i, std::size_t j) const { return gram[i * states.size() + j]; }
  /// Largest |G - I| entry.
  double max_identity_deviation() const;
};

BasisSet build_basis(BasisScheme scheme, OverlapAngle theta_d, const ModeFrame& frame);

/// Normalized a |u> + b |v>, terms concatenated.
SuperpositionState linear_combination(cplx a, const SuperpositionState& u, cplx b, const SuperpositionState& v);

struct ChannelModel {
  double rotation_jitter_sigma = 0.0;  // rad
  double path_jitter_sigma = 0.0;      // m, converted through the fiber period
  FiberSpec fiber{};
  double overlap_noise_sigma = 0.0;

  void validate() const;
};

struct ProtocolStats {
  std::size_t rounds = 0;
  std::size_t sifted = 0;
  std::size_t errors = 0;
  std::size_t lost = 0;  // outcomes outside the measured pair
  std::size_t mismatched = 0;
  std::size_t mismatched_errors = 0;

  double qber() const { return sifted ? static_cast<double>(errors) / static_cast<double>(sifted) : 0.0; }
  double ber() const { return rounds ? static_cast<double>(errors) / static_cast<double>(rounds) : 0.0; }
  double sift_rate() const { return rounds ? static_cast<double>(sifted) / static_cast<double>(rounds) : 0.0; }
  double mismatched_error_rate() const {
    return mismatched ? static_cast<double>(mismatched_errors) / static_cast<double>(mismatched) : 0.0;
  }
};

/// Classical decoding: each round sends a uniformly chosen basis state through
/// the channel and decodes by maximum |<b_i|psi>|^2, lowest index on ties.
ProtocolStats psk_link_simulate(std::size_t n, const BasisSet& basis, const ChannelModel& channel, std::uint64_t seed);

/// BB84 over {|x-/+>, |p-/+>} with Born-rule projective measurement; the
/// channel rotates about the qubit midpoint by 2 pi dz / cT', dz ~ N(0, sigma).
ProtocolStats qkd_simulate(std::size_t n, OverlapAngle theta_d, double path_jitter_sigma, const FiberSpec& fiber,
                           std::uint64_t seed, const ModeFrame& frame);

struct Mixture {
  std::vector<std::pair<double, SuperpositionState>> components;

  double purity() const;
  /// Reduced Wigner density in (x, kappa).
  double wigner(double x, double kappa) const;
  double position_density(double x) const;
};

/// Uniform phi-average of the T = 1/2 qubit: {(1/2, vac), (1/2, coh)}.
Mixture dephased_mixture(double d, const ModeFrame& frame);

}  // namespace cvq
