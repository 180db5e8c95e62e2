#include <gtest/gtest.h>

#include <cmath>

#include "cvq/error.hpp"
#include "cvq/state.hpp"
#include "cvq/wavefunction.hpp"
#include "oracles.hpp"

using namespace cvq;

namespace {

const ModeFrame kLab = ModeFrame::laboratory();

oracle::Wave wave_of(const SuperpositionState& s) {
  oracle::Wave w{s.frame().w0(), {}};
  for (const auto& t : s.terms()) {
    EXPECT_EQ(t.alpha_y, cplx{});
    w.terms.emplace_back(t.coeff, t.alpha_x);
  }
  return w;
}

double d_w0() { return kLab.w0(); }

}  // namespace

TEST(CoherentOverlap, Identity) { EXPECT_NEAR(std::abs(coherent_overlap(0.0, 0.0) - 1.0), 0.0, 1e-15); }

TEST(CoherentOverlap, OffsetByWaist) {
  const double a = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(coherent_overlap(a, 0.0).real(), 0.606531, 1e-6);
  const oracle::Wave u{kLab.w0(), {{1.0, 0.0}}}, v{kLab.w0(), {{1.0, a}}};
  EXPECT_NEAR(std::abs(coherent_overlap(a, 0.0) - oracle::overlap(u, v)), 0.0, 1e-12);
}

TEST(CoherentOverlap, LaboratoryAlpha) {
  const cplx c = coherent_overlap(1.1, 0.0);
  EXPECT_NEAR(c.real(), 0.29820, 1e-5);
  EXPECT_NEAR(std::acos(c.real()) / kPi, 0.4036, 1e-4);
}

TEST(CoherentOverlap, ComplexArgumentsMatchQuadrature) {
  const cplx pairs[][2] = {{{0.3, 0.2}, {-0.4, 0.7}}, {{1.1, -0.5}, {0.2, 0.1}}, {{0.0, 0.9}, {0.6, 0.0}}};
  for (const auto& p : pairs) {
    const oracle::Wave ket{kLab.w0(), {{1.0, p[0]}}}, bra{kLab.w0(), {{1.0, p[1]}}};
    const cplx got = coherent_overlap(p[0], p[1]);
    EXPECT_NEAR(std::abs(got - oracle::overlap(bra, ket)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(got), std::exp(-std::norm(p[0] - p[1])), 1e-14);
  }
}

TEST(CoherentAmplitude, MatchesOracleWavefunction) {
  for (cplx a : {cplx{0.0, 0.0}, cplx{1.1, 0.0}, cplx{0.4, -0.8}})
    for (double x : {-2e-4, 0.0, 1e-4, 3e-4})
      EXPECT_NEAR(std::abs(coherent_amplitude(kLab, a, x) - oracle::gaussian(kLab.w0(), a, x)), 0.0,
                  1e-9 * std::abs(oracle::gaussian(kLab.w0(), 0.0, 0.0)));
}

TEST(ModeFrame, RejectsNonPositive) {
  EXPECT_THROW(ModeFrame(0.0, 780e-9), std::invalid_argument);
  EXPECT_THROW(ModeFrame(1e-4, -1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(kLab.rayleigh_range(), kLab.k() * kLab.w0() * kLab.w0() / 2.0);
}

TEST(QubitState, VacuumAndCoherentAreSingleTerms) {
  const auto vac = make_qubit_state(QubitParams(1.0, 1.234, d_w0()), kLab);
  ASSERT_EQ(vac.terms().size(), 1u);
  EXPECT_EQ(vac.terms()[0].alpha_x, cplx{});
  const auto coh = make_qubit_state(QubitParams(0.0, 0.0, d_w0()), kLab);
  ASSERT_EQ(coh.terms().size(), 1u);
  EXPECT_NEAR(kLab.displacement(coh.terms()[0].alpha_x.real()), d_w0(), 1e-18);
}

TEST(QubitState, OddCatNormalization) {
  const auto s = make_qubit_state(QubitParams(0.5, kPi, d_w0()), kLab);
  EXPECT_EQ(s.terms().size(), 2u);
  EXPECT_NEAR(s.raw_norm(), 1.0 - std::exp(-0.5), 1e-12);
  EXPECT_NEAR(s.raw_norm(), 0.393469, 1e-6);
}

TEST(QubitState, ZeroDisplacementCollapses) {
  const auto s = make_qubit_state(QubitParams(0.3, 0.7, 0.0), kLab);
  EXPECT_TRUE(s.collapsed());
  EXPECT_EQ(s.terms().size(), 1u);
  EXPECT_NEAR(std::abs(inner_product(s, s)), 1.0, 1e-12);
}

TEST(QubitState, RejectsInvalidParams) {
  EXPECT_THROW(QubitParams(1.5, 0.0, 1e-4), std::invalid_argument);
  EXPECT_THROW(QubitParams(0.5, 0.0, -1e-4), std::invalid_argument);
  EXPECT_NEAR(QubitParams(0.5, -kPi / 2, 0.0).phi(), 1.5 * kPi, 1e-15);
}

TEST(QubitState, NormalizedOnParameterGrid) {
  for (double T : {0.0, 0.25, 0.5, 0.75, 1.0})
    for (int j = 0; j < 8; ++j)
      for (double r : {0.5, 1.0, 2.0}) {
        const double phi = 2.0 * kPi * j / 8.0;
        const auto s = make_qubit_state(QubitParams(T, phi, r * kLab.w0()), kLab);
        EXPECT_NEAR(inner_product(s, s).real(), 1.0, 1e-12) << T << " " << phi << " " << r;
      }
}

TEST(NormalizationFactor, Examples) {
  const auto th = OverlapAngle::from_alpha(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(normalization_factor(0.5, kPi / 2, th), 1.0, 1e-15);
  EXPECT_NEAR(normalization_factor(0.5, 0.0, th), 1.606531, 1e-6);
  EXPECT_NEAR(normalization_factor(0.5, kPi, th), 0.393469, 1e-6);
  EXPECT_THROW(normalization_factor(0.5, kPi, OverlapAngle::from_alpha(1e-9)), NumericError);
}

TEST(NormalizationFactor, MatchesQuadratureNorm) {
  for (double T : {0.1, 0.5, 0.9})
    for (double phi : {0.0, 1.0, 2.5, kPi})
      for (double r : {0.5, 1.0, 2.0}) {
        const double d = r * kLab.w0();
        const auto th = OverlapAngle::from_displacement(d, kLab);
        const oracle::Wave w{kLab.w0(),
                             {{std::sqrt(T), 0.0}, {std::polar(std::sqrt(1.0 - T), phi), kLab.alpha_for(d)}}};
        EXPECT_NEAR(normalization_factor(T, phi, th), oracle::norm2(w), 1e-10);
      }
}

TEST(TypicalStates, GeneratingParameters) {
  const auto th = OverlapAngle::from_alpha(1.0 / std::sqrt(2.0));
  const auto xm = make_typical_state(TypicalState::XMinus, th, kLab);
  EXPECT_NEAR(xm.params.T(), 0.897531, 1e-6);
  EXPECT_NEAR(xm.params.phi(), kPi, 1e-15);
  const auto cp = make_typical_state(TypicalState::CatPlus, th, kLab);
  EXPECT_NEAR(cp.params.T(), 0.5, 1e-15);
  EXPECT_NEAR(cp.params.phi(), 0.0, 1e-15);
  const auto pm = make_typical_state(TypicalState::PMinus, OverlapAngle::from_theta(0.4036 * kPi), kLab);
  EXPECT_NEAR(pm.params.T(), 0.5, 1e-15);
  EXPECT_NEAR(pm.params.phi_signed(), -0.5964 * kPi, 1e-12);
}

TEST(TypicalStates, NamesRoundTrip) {
  for (auto k : kAllTypicalStates) EXPECT_EQ(typical_state_from_string(to_string(k)), k);
  EXPECT_THROW(typical_state_from_string("cat"), std::invalid_argument);
}

TEST(TypicalStates, OrthogonalPairs) {
  for (double th_pi : {0.25, 0.40, 0.45}) {
    const auto th = OverlapAngle::from_theta(th_pi * kPi);
    auto st = [&](TypicalState k) { return make_typical_state(k, th, kLab).state; };
    EXPECT_NEAR(std::abs(inner_product(st(TypicalState::XMinus), st(TypicalState::XPlus))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(inner_product(st(TypicalState::PMinus), st(TypicalState::PPlus))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(inner_product(st(TypicalState::XMinus), st(TypicalState::PMinus))), 1.0 / std::sqrt(2.0),
                1e-12);
    const cplx vc = inner_product(st(TypicalState::Vacuum), st(TypicalState::Coherent));
    EXPECT_NEAR(vc.real(), th.cos(), 1e-12);
    EXPECT_NEAR(vc.imag(), 0.0, 1e-12);
  }
}

TEST(TypicalStates, OverlapsAgreeWithQuadrature) {
  const auto th = OverlapAngle::from_alpha(1.1);
  for (auto a : kAllTypicalStates)
    for (auto b : kAllTypicalStates) {
      const auto sa = make_typical_state(a, th, kLab).state, sb = make_typical_state(b, th, kLab).state;
      EXPECT_NEAR(std::abs(inner_product(sa, sb) - oracle::overlap(wave_of(sa), wave_of(sb))), 0.0, 1e-10)
          << to_string(a) << " " << to_string(b);
    }
}

TEST(InnerProduct, FrameMismatchThrows) {
  const auto a = make_qubit_state(QubitParams(1.0, 0.0, 0.0), kLab);
  const auto b = make_qubit_state(QubitParams(1.0, 0.0, 0.0), ModeFrame(1e-4, 780e-9));
  EXPECT_THROW(inner_product(a, b), std::invalid_argument);
}

TEST(InnerProduct, Sesquilinear) {
  const auto a = make_qubit_state(QubitParams(0.3, 1.0, d_w0()), kLab);
  const auto b = make_qubit_state(QubitParams(0.6, 2.0, 1.5 * d_w0()), kLab);
  EXPECT_NEAR(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))), 0.0, 1e-15);
}

TEST(Bloch, Examples) {
  const auto th = OverlapAngle::from_theta(0.4 * kPi);
  const auto cm = bloch_to_params(BlochVector::checked(-1, 0, 0), th, kLab);
  EXPECT_NEAR(cm.T(), 0.5, 1e-12);
  EXPECT_NEAR(cm.phi(), kPi, 1e-12);
  const auto xm = bloch_to_params(BlochVector::checked(0, 0, 1), th, kLab);
  EXPECT_NEAR(xm.T(), (1.0 + th.sin()) / 2.0, 1e-12);
  EXPECT_NEAR(xm.phi(), kPi, 1e-12);
  const auto cp = bloch_to_params(BlochVector::checked(1, 0, 0), th, kLab);
  EXPECT_NEAR(cp.T(), 0.5, 1e-12);
  EXPECT_NEAR(wrap_signed(cp.phi()), 0.0, 1e-12);

  const auto b = params_to_bloch(QubitParams(0.5, kPi, kLab.w0()), th);
  EXPECT_NEAR(b.x, -1.0, 1e-12);
  EXPECT_NEAR(b.y, 0.0, 1e-12);
  EXPECT_NEAR(b.z, 0.0, 1e-12);
}

TEST(Bloch, SingularBranchDefinesPhiZero) {
  const auto th = OverlapAngle::from_theta(0.4 * kPi);
  const auto p = bloch_to_params(BlochVector::checked(th.cos(), 0.0, th.sin()), th, kLab);
  EXPECT_EQ(p.phi(), 0.0);
  EXPECT_NEAR(p.T(), 1.0, 1e-12);
}

TEST(Bloch, VacuumVectorAndPoleLimit) {
  const auto th = OverlapAngle::from_theta(0.4 * kPi);
  const auto v = params_to_bloch(QubitParams(1.0, 0.0, th.displacement(kLab)), th);
  EXPECT_NEAR(v.x, th.cos(), 1e-12);
  EXPECT_NEAR(v.y, 0.0, 1e-12);
  EXPECT_NEAR(v.z, th.sin(), 1e-12);
  const auto far = OverlapAngle::from_displacement(6.0 * kLab.w0(), kLab);
  const auto p = params_to_bloch(QubitParams(1.0, 0.0, 6.0 * kLab.w0()), far);
  EXPECT_NEAR(p.x, 0.0, 1e-6);
  EXPECT_NEAR(p.y, 0.0, 1e-6);
  EXPECT_NEAR(p.z, 1.0, 1e-6);
}

TEST(Bloch, RoundTripOnSphereGrid) {
  for (double th_pi : {0.25, 0.40, 0.45}) {
    const auto th = OverlapAngle::from_theta(th_pi * kPi);
    for (int i = 1; i <= 20; ++i)
      for (int j = 0; j < 40; ++j) {
        const auto b = BlochVector::from_angles(kPi * i / 21.0, 2.0 * kPi * j / 40.0);
        const auto back = params_to_bloch(bloch_to_params(b, th, kLab), th);
        EXPECT_NEAR(back.x, b.x, 1e-10);
        EXPECT_NEAR(back.y, b.y, 1e-10);
        EXPECT_NEAR(back.z, b.z, 1e-10);
      }
  }
}

TEST(Bloch, StateMatchesOrthonormalExpansion) {
  // The Bloch vector must describe the constructed state in the {x-, x+} basis.
  const auto th = OverlapAngle::from_theta(0.4 * kPi);
  const auto xm = make_typical_state(TypicalState::XMinus, th, kLab).state;
  const auto xp = make_typical_state(TypicalState::XPlus, th, kLab).state;
  for (double T : {0.1, 0.4, 0.8})
    for (double phi : {0.3, 2.0, 4.0}) {
      const QubitParams p(T, phi, th.displacement(kLab));
      const auto s = make_qubit_state(p, kLab);
      const cplx a = inner_product(xm, s), c = inner_product(xp, s);
      const cplx rho01 = a * std::conj(c);
      const auto b = params_to_bloch(p, th);
      EXPECT_NEAR(b.z, std::norm(a) - std::norm(c), 1e-10);
      EXPECT_NEAR(std::hypot(b.x, b.y), 2.0 * std::abs(rho01), 1e-10);
    }
}

TEST(Bloch, RejectsOffSphere) { EXPECT_THROW(BlochVector::checked(1, 1, 0), std::invalid_argument); }
