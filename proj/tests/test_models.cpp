#include <gtest/gtest.h>

#include <cmath>

#include "neem/girsanov.hpp"
#include "neem/models.hpp"
#include "neem/validate.hpp"

using namespace neem;

namespace {

PathState state1(double x, double v) {
    PathState s;
    s.x1 = Vec::Constant(1, x);
    s.x2 = Vec::Constant(1, v);
    return s;
}

PathState state2(double y1, double y2, double y3, double y4) {
    PathState s;
    s.x1 = Vec(2);
    s.x2 = Vec(2);
    s.x1 << y1, y3;
    s.x2 << y2, y4;
    return s;
}

Vec zeros(int n) { return Vec::Zero(n); }

}  // namespace

TEST(Rvp, ShiftVelocityDerivativeHandValue) {
    OscillatorModel m = build_rvp({});
    GammaJet j;
    gamma_jet(m, 0.0, state1(0.1, 0.2), zeros(1), j);
    EXPECT_NEAR(j.d2[0](0), -0.13, 1e-15);
    EXPECT_NEAR(j.d1[0](0), -0.04, 1e-15);
    EXPECT_NEAR(j.d22[0](0, 0), -1.2, 1e-15);
    EXPECT_NEAR(j.d12[0](0, 0), -0.2, 1e-15);
}

TEST(Rvp, NoCubicTermIsLinear) {
    RvpParams p;
    p.h3 = 0.0;
    OscillatorModel m = build_rvp(p);
    EXPECT_FALSE(m.has_nonlinear());
    EXPECT_EQ(phi(m, 0.0, state1(1.0, 2.0), zeros(1), Vec::Constant(1, 0.3))(0), 0.0);
}

TEST(Rvp, RejectsNonPositiveSigma) {
    RvpParams p;
    p.sigma = 0.0;
    EXPECT_THROW(build_rvp(p), ConfigError);
}

TEST(Dvp, ShiftHandValue) {
    DvpParams p;
    p.A = 0.0;
    OscillatorModel m = build_dvp(p);
    Vec g = gamma(m, 0.0, state1(2.0, 0.0), frozen_nonlinear(m, 0.0, state1(1.0, 0.0)));
    EXPECT_DOUBLE_EQ(g(0), -14.0);
}

TEST(Dvp, QuotientRuleDerivative) {
    // gamma = -(alpha/rho)(x^2 - x_f^3/x); d gamma/dx = -(alpha/rho)(2x + x_f^3/x^2)
    DvpParams p;
    p.A = 0.0;
    OscillatorModel m = build_dvp(p);
    GammaJet j;
    gamma_jet(m, 0.0, state1(2.0, 0.0), frozen_nonlinear(m, 0.0, state1(1.0, 0.0)), j);
    EXPECT_NEAR(j.d1[0](0), -4.0 * (4.0 + 0.25), 1e-12);
    p.quotient_rule = false;
    OscillatorModel n = build_dvp(p);
    gamma_jet(n, 0.0, state1(2.0, 0.0), frozen_nonlinear(n, 0.0, state1(1.0, 0.0)), j);
    EXPECT_NEAR(j.d1[0](0), -3.0 * 2.0 * 2.0 / 0.5, 1e-12);
}

TEST(Dvp, NoCubicTermIsLinear) {
    DvpParams p;
    p.alpha = 0.0;
    OscillatorModel m = build_dvp(p);
    EXPECT_FALSE(m.has_nonlinear());
}

TEST(Dvp, ForcingIsSinusoid) {
    DvpParams p;
    p.A = 2.0;
    p.m = 4.0;
    OscillatorModel m = build_dvp(p);
    EXPECT_NEAR(forcing_at(m, 0.25)(0), 0.5, 1e-15);
    EXPECT_NEAR(forcing_at(m, 0.5)(0), 0.0, 1e-15);
}

TEST(Dvp, DiffusionVanishesAtOrigin) {
    OscillatorModel m = build_dvp({});
    EXPECT_TRUE(m.vanishing_diffusion);
    EXPECT_EQ(diffusion_at(m, 0.0, state1(0.0, 1.0))(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(diffusion_at(m, 0.0, state1(2.0, 1.0))(0, 0), 1.0);
}

TEST(TwoDof, SecondChannelShiftHandValue) {
    OscillatorModel m = build_two_dof({});
    Vec g = gamma(m, 0.0, state2(0.0, 0.0, 0.1, 0.0), zeros(2));
    EXPECT_NEAR(g(0), 0.0, 1e-16);
    EXPECT_NEAR(g(1), -0.1, 1e-15);
}

TEST(TwoDof, LinearBlockCouplesMasses) {
    OscillatorModel m = build_two_dof({});
    BigVec d = drift_linear_part(m, 0.0, state2(1.0, 0.0, 0.0, 0.0));
    EXPECT_DOUBLE_EQ(d(2), -200.0);
    EXPECT_DOUBLE_EQ(d(3), 100.0);
}

TEST(TwoDof, DeclaredZeroTermsAreZero) {
    OscillatorModel m = build_two_dof({});
    GammaJet j;
    gamma_jet(m, 0.0, state2(0.3, -0.4, 0.5, 0.2), zeros(2), j);
    for (const auto& z : m.zero_terms) EXPECT_EQ(jet_entry(j, z.channel, z.block, z.i, z.j), 0.0);
}

TEST(Audit, ShippedModelsPass) {
    for (const auto& m : {build_rvp({}), build_dvp({}), build_two_dof({})}) {
        AuditResult a = derivative_audit(m, 100, 3);
        EXPECT_TRUE(a.passed()) << m.name << " jet " << a.max_rel_error << " phi " << a.phi_max_rel_error;
        EXPECT_EQ(a.zero_term_violations, 0) << m.name;
    }
}

TEST(Audit, FlippedSignFails) {
    for (const auto& m : {build_rvp({}), build_dvp({}), build_two_dof({})}) {
        AuditResult a = derivative_audit(with_flipped_gamma_sign(m), 100, 3);
        EXPECT_FALSE(a.passed()) << m.name;
    }
}

TEST(Audit, NumeratorOnlyDvpDerivativeFails) {
    DvpParams p;
    p.quotient_rule = false;
    EXPECT_FALSE(derivative_audit(build_dvp(p), 100, 3).passed());
}

TEST(Stationary, VanishingCubicTendsToGaussian) {
    RvpParams p;
    p.h3 = 1e-9;
    StationaryMoments s = rvp_stationary_moments(p);
    EXPECT_NEAR(s.ex2, 0.5, 1e-6);
    EXPECT_NEAR(s.ev2, 0.5, 1e-6);
}

TEST(Stationary, UnitParametersSymmetricMoments) {
    StationaryMoments s = rvp_stationary_moments({});
    EXPECT_NEAR(s.ex2, 0.26257, 1e-4);
    EXPECT_NEAR(s.ex2, s.ev2, 1e-10);
}

TEST(Stationary, ClosedFormInEnergy) {
    // E[H] = int H e^{-2(H + H^2)} dH / int e^{-2(H + H^2)} dH and E[x^2] = E[H]
    const int n = 200000;
    const double L = 20.0, h = L / n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
        double H = i * h, w = (i == 0 || i == n) ? 0.5 : 1.0;
        double e = std::exp(-2.0 * (H + H * H));
        num += w * H * e;
        den += w * e;
    }
    EXPECT_NEAR(rvp_stationary_moments({}).ex2, num / den, 1e-6);
}

TEST(Stationary, RejectsDegenerateParameters) {
    RvpParams p;
    p.h3 = 0.0;
    EXPECT_THROW(rvp_stationary_moments(p), ConfigError);
}
