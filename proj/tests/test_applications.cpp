#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "cvq/applications.hpp"
#include "cvq/wigner.hpp"
#include "oracles.hpp"

using namespace cvq;

namespace {

const ModeFrame kLab = ModeFrame::laboratory();
const OverlapAngle kTheta = OverlapAngle::from_theta(0.4 * kPi);
const double kD = kTheta.displacement(kLab);
constexpr std::size_t kRounds = 100000;

double binomial_3sigma(double p, std::size_t n) { return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

std::size_t index_of(const BasisSet& b, const std::string& label) {
  return static_cast<std::size_t>(std::find(b.labels.begin(), b.labels.end(), label) - b.labels.begin());
}

}  // namespace

TEST(Sweep, CharacteristicPoints) {
  const double s = kTheta.sin();
  const std::vector<std::pair<double, double>> path = {
      {1.0, 0.0}, {(1 + s) / 2, kPi}, {(1 - s) / 2, kPi}, {0.5, -(kPi - kTheta.theta())}, {0.5, kPi - kTheta.theta()}, {0.5, kPi}};
  const auto pts = profile_sweep(path, kD, kLab);
  ASSERT_EQ(pts.size(), path.size());
  const double sql = pts[0].delta_x;
  EXPECT_NEAR(sql, kLab.w0() / 2, 1e-12 * kLab.w0());
  // |x-/+> sit exactly at the vacuum width rather than below it (see the
  // frozen moment values in the wigner tests).
  EXPECT_NEAR(pts[1].delta_x, sql, 1e-9 * sql);
  EXPECT_NEAR(pts[2].delta_x, sql, 1e-9 * sql);
  EXPECT_LT(pts[3].mean_vx, 0.0);
  EXPECT_GT(pts[4].mean_vx, 0.0);
  EXPECT_NEAR(pts[5].center_intensity * kLab.w0(), 0.0, 1e-14);
}

TEST(Sweep, Continuous) {
  // Halving the path step halves the largest jump between neighbours.
  auto largest_jumps = [](int n) {
    std::vector<std::pair<double, double>> path;
    for (int i = 0; i <= n; ++i) path.emplace_back(0.25 + 0.5 * i / n, 2 * kPi * i / n);
    const auto pts = profile_sweep(path, kD, kLab);
    double jx = 0.0, jv = 0.0, jc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      jx = std::max(jx, std::abs(pts[i].delta_x - pts[i - 1].delta_x));
      jv = std::max(jv, std::abs(pts[i].mean_vx - pts[i - 1].mean_vx));
      jc = std::max(jc, std::abs(pts[i].center_intensity - pts[i - 1].center_intensity));
    }
    return std::array<double, 3>{jx, jv, jc};
  };
  const auto coarse = largest_jumps(200), fine = largest_jumps(400);
  for (int k = 0; k < 3; ++k) EXPECT_LT(fine[k], 0.6 * coarse[k]) << k;
  EXPECT_THROW(profile_sweep({}, kD, kLab), std::invalid_argument);
}

TEST(Basis, InvariantsForAllSchemes) {
  for (auto scheme : {BasisScheme::FourCat, BasisScheme::TwelveState, BasisScheme::FourHgReference}) {
    const auto b = build_basis(scheme, kTheta, kLab);
    EXPECT_EQ(basis_scheme_from_string(to_string(scheme)), scheme);
    ASSERT_EQ(b.labels.size(), b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
      EXPECT_NEAR(std::abs(b.gram_at(i, i) - 1.0), 0.0, 1e-12);
      for (std::size_t j = 0; j < b.size(); ++j) {
        EXPECT_NEAR(std::abs(b.gram_at(i, j) - std::conj(b.gram_at(j, i))), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(b.gram_at(i, j) - inner_product(b.states[i], b.states[j])), 0.0, 1e-15);
      }
    }
  }
  EXPECT_THROW(basis_scheme_from_string("sixteen"), std::invalid_argument);
}

TEST(Basis, TwelveStateOverlaps) {
  const auto b = build_basis(BasisScheme::TwelveState, kTheta, kLab);
  EXPECT_NEAR(std::abs(b.gram_at(index_of(b, "x_minus"), index_of(b, "p_minus"))), 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::abs(b.gram_at(index_of(b, "x_minus"), index_of(b, "x_plus"))), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(b.gram_at(index_of(b, "y_minus"), index_of(b, "y_plus"))), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(b.gram_at(index_of(b, "p_y_minus"), index_of(b, "p_y_plus"))), 0.0, 1e-12);
}

TEST(Basis, FourCatCrossAxisOverlapsAgainstQuadrature) {
  // The x-cats and y-cats share the (alpha/2, 0) component, so their overlap
  // is fixed by separable one-axis quadrature.
  const auto b = build_basis(BasisScheme::FourCat, kTheta, kLab);
  auto overlap2d = [&](const SuperpositionState& u, const SuperpositionState& v) {
    cplx s{};
    for (const auto& tu : u.terms())
      for (const auto& tv : v.terms()) {
        const oracle::Wave ux{kLab.w0(), {{1.0, tu.alpha_x}}}, vx{kLab.w0(), {{1.0, tv.alpha_x}}};
        const oracle::Wave uy{kLab.w0(), {{1.0, tu.alpha_y}}}, vy{kLab.w0(), {{1.0, tv.alpha_y}}};
        s += std::conj(tu.coeff) * tv.coeff * oracle::overlap(ux, vx) * oracle::overlap(uy, vy);
      }
    return s;
  };
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_NEAR(std::abs(b.gram_at(i, j) - overlap2d(b.states[i], b.states[j])), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(b.gram_at(0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(b.gram_at(2, 3)), 0.0, 1e-12);
}

TEST(Basis, ReferencePairOverlap) {
  const auto b = build_basis(BasisScheme::FourHgReference, kTheta, kLab);
  EXPECT_NEAR(b.gram_at(0, 1).real(), kTheta.cos(), 1e-12);
  EXPECT_NEAR(b.gram_at(0, 1).imag(), 0.0, 1e-12);
}

TEST(LinearCombination, Normalized) {
  const auto b = build_basis(BasisScheme::FourCat, kTheta, kLab);
  const auto s = linear_combination({0.3, 0.1}, b.states[0], {-0.5, 0.2}, b.states[2]);
  EXPECT_NEAR(inner_product(s, s).real(), 1.0, 1e-12);
}

TEST(Psk, NoiselessIsExact) {
  for (auto scheme : {BasisScheme::FourCat, BasisScheme::TwelveState, BasisScheme::FourHgReference}) {
    const auto st = psk_link_simulate(kRounds, build_basis(scheme, kTheta, kLab), ChannelModel{}, 1);
    EXPECT_EQ(st.errors, 0u);
    EXPECT_EQ(st.rounds, kRounds);
  }
}

TEST(Psk, MonotoneInRotationJitter) {
  const auto b = build_basis(BasisScheme::TwelveState, kTheta, kLab);
  double last = -1.0;
  for (double s : {0.0, 0.1, 0.3, 1.0, 3.0}) {
    ChannelModel ch;
    ch.rotation_jitter_sigma = s;
    const double ber = psk_link_simulate(kRounds, b, ch, 11).ber();
    EXPECT_GE(ber, last - binomial_3sigma(std::max(ber, 1e-3), kRounds)) << s;
    last = ber;
  }
}

TEST(Psk, OverlapNoiseDrivesUniformGuessing) {
  for (auto scheme : {BasisScheme::FourCat, BasisScheme::TwelveState}) {
    const auto b = build_basis(scheme, kTheta, kLab);
    ChannelModel ch;
    ch.overlap_noise_sigma = 10.0;
    const double m = static_cast<double>(b.size());
    const double expect = (m - 1.0) / m;
    EXPECT_NEAR(psk_link_simulate(kRounds, b, ch, 5).ber(), expect, binomial_3sigma(expect, kRounds));
  }
}

TEST(Psk, RotationJitterSaturatesBelowGuessing) {
  // A phase-space rotation is not a random unitary: for large sigma the
  // error rate plateaus well below (M-1)/M.
  const auto b = build_basis(BasisScheme::FourCat, kTheta, kLab);
  ChannelModel a, c;
  a.rotation_jitter_sigma = 7.0;
  c.rotation_jitter_sigma = 30.0;
  const double ba = psk_link_simulate(kRounds, b, a, 3).ber(), bc = psk_link_simulate(kRounds, b, c, 3).ber();
  EXPECT_NEAR(ba, bc, 2 * binomial_3sigma(ba, kRounds));
  EXPECT_LT(bc, 0.75 - 0.1);
}

TEST(Psk, Deterministic) {
  const auto b = build_basis(BasisScheme::FourCat, kTheta, kLab);
  ChannelModel ch;
  ch.rotation_jitter_sigma = 0.5;
  ch.overlap_noise_sigma = 0.05;
  const auto a = psk_link_simulate(20000, b, ch, 99), c = psk_link_simulate(20000, b, ch, 99);
  EXPECT_EQ(a.errors, c.errors);
  EXPECT_THROW(psk_link_simulate(0, b, ch, 1), std::invalid_argument);
  ch.rotation_jitter_sigma = -1.0;
  EXPECT_THROW(ch.validate(), std::invalid_argument);
}

TEST(Qkd, NoJitterNoErrors) {
  const auto st = qkd_simulate(kRounds, kTheta, 0.0, FiberSpec{1e-3}, 42, kLab);
  EXPECT_EQ(st.errors, 0u);
  EXPECT_EQ(st.lost, 0u);
  EXPECT_LE(st.sifted, st.rounds);
  EXPECT_NEAR(st.sift_rate(), 0.5, binomial_3sigma(0.5, kRounds));
  // |<x|p>|^2 = 1/2 for every mismatched pair.
  EXPECT_NEAR(st.mismatched_error_rate(), 0.5, binomial_3sigma(0.5, st.mismatched));
}

TEST(Qkd, WavelengthJitterIsLoose) {
  EXPECT_LT(qkd_simulate(kRounds, kTheta, 780e-9, FiberSpec{1e-3}, 42, kLab).qber(), 1e-3);
}

TEST(Qkd, FullDephasing) {
  const auto st = qkd_simulate(kRounds, kTheta, 10e-3, FiberSpec{1e-3}, 42, kLab);
  EXPECT_NEAR(st.qber(), 0.5, binomial_3sigma(0.5, st.sifted));
  EXPECT_GE(st.qber(), 0.0);
  EXPECT_LE(st.qber(), 1.0);
}

TEST(Qkd, MonotoneInJitter) {
  double last = -1.0;
  for (double r : {0.0, 0.01, 0.05, 0.1, 0.5, 2.0}) {
    const auto st = qkd_simulate(kRounds, kTheta, r * 1e-3, FiberSpec{1e-3}, 42, kLab);
    EXPECT_GE(st.qber(), last - binomial_3sigma(std::max(st.qber(), 1e-3), st.sifted)) << r;
    last = st.qber();
  }
}

TEST(Qkd, Deterministic) {
  const auto a = qkd_simulate(5000, kTheta, 1e-4, FiberSpec{1e-3}, 7, kLab);
  const auto b = qkd_simulate(5000, kTheta, 1e-4, FiberSpec{1e-3}, 7, kLab);
  EXPECT_EQ(a.errors, b.errors);
  EXPECT_EQ(a.sifted, b.sifted);
  EXPECT_EQ(a.lost, b.lost);
}

TEST(Mixture, DephasedProperties) {
  const double d = kLab.w0();  // alpha = 1/sqrt2
  const auto m = dephased_mixture(d, kLab);
  EXPECT_NEAR(m.purity(), 0.683940, 1e-6);
  EXPECT_NEAR(m.purity(), (1 + std::exp(-1.0)) / 2, 1e-12);
  // Trace formula: sum_ij p_i p_j |<i|j>|^2.
  double tr = 0.0;
  for (const auto& [pi, si] : m.components)
    for (const auto& [pj, sj] : m.components) tr += pi * pj * std::norm(inner_product(si, sj));
  EXPECT_NEAR(m.purity(), tr, 1e-14);

  double minw = 1.0, integral = 0.0;
  const double h = 0.05;
  for (double X = -8; X <= 10; X += h)
    for (double P = -8; P <= 8; P += h) {
      const double w = m.wigner(X * kLab.w0() / kSqrt2, kSqrt2 * P / kLab.w0());
      minw = std::min(minw, w);
      integral += w * h * h;
    }
  EXPECT_GE(minw, 0.0);
  EXPECT_NEAR(integral, 1.0, 1e-6);

  auto ivac = [&](double x) { return std::sqrt(2 / kPi) / kLab.w0() * std::exp(-2 * x * x / (kLab.w0() * kLab.w0())); };
  for (double xr : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
    const double x = xr * kLab.w0();
    EXPECT_NEAR(m.position_density(x), 0.5 * ivac(x) + 0.5 * ivac(x - d), 1e-10 * ivac(0));
  }
  EXPECT_THROW(dephased_mixture(0.0, kLab), std::invalid_argument);
}
