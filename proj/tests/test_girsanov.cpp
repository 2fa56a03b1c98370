#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "neem/brownian.hpp"
#include "neem/em.hpp"
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

Vec scalar(double v) { return Vec::Constant(1, v); }

DvpParams dvp_unforced() {
    DvpParams p;
    p.A = 0.0;
    return p;
}

// gamma = c everywhere: constant nonlinearity, frozen value offset by c * sigma
OscillatorModel constant_shift_model(double sigma) {
    OscillatorModel m = build_ou(0.5, sigma);
    m.nonlinear_drift = [](double, const PathState&) { return Vec::Constant(1, 1.0); };
    return m;
}

// g^nl = -q v^2 with unit noise: gamma = -q v^2 - frozen
OscillatorModel quadratic_velocity_model(double q) {
    OscillatorModel m = build_ou(0.5, 1.0);
    m.nonlinear_drift = [q](double, const PathState& s) { return Vec::Constant(1, -q * s.x2(0) * s.x2(0)); };
    m.gamma_jet = [q](double, const PathState& s, const Vec& fr, GammaJet& j) {
        j.reset(1, 1);
        double v = s.x2(0);
        j.gamma(0) = -q * v * v - fr(0);
        j.d2[0](0) = -2.0 * q * v;
        j.d22[0](0, 0) = -2.0 * q;
    };
    return m;
}

}  // namespace

TEST(Delta, ZeroAtFrozenState) {
    OscillatorModel m = build_rvp({});
    PathState s = state1(0.3, -0.4);
    EXPECT_EQ(delta(m, 0.0, s, frozen_nonlinear(m, 0.0, s))(0), 0.0);
}

TEST(Delta, RvpHandEvaluation) {
    OscillatorModel m = build_rvp({});
    Vec d = delta(m, 0.0, state1(0.1, 0.2), frozen_nonlinear(m, 0.0, state1(0.0, 0.0)));
    EXPECT_NEAR(d(0), 0.01, 1e-16);
}

TEST(Delta, DvpHandEvaluation) {
    OscillatorModel m = build_dvp(dvp_unforced());
    Vec d = delta(m, 0.0, state1(2.0, 0.0), frozen_nonlinear(m, 0.0, state1(1.0, 0.0)));
    EXPECT_DOUBLE_EQ(d(0), 14.0);
}

TEST(Gamma, ZeroDeltaGivesZero) {
    OscillatorModel m = build_two_dof({});
    PathState s;
    s.x1 = Vec(2);
    s.x2 = Vec(2);
    s.x1 << 0.4, -0.1;
    s.x2 << 0.2, 0.3;
    Vec g = gamma(m, 0.0, s, frozen_nonlinear(m, 0.0, s));
    EXPECT_EQ(g(0), 0.0);
    EXPECT_EQ(g(1), 0.0);
}

TEST(Gamma, RvpHandEvaluation) {
    OscillatorModel m = build_rvp({});
    Vec g = gamma(m, 0.0, state1(0.1, 0.2), frozen_nonlinear(m, 0.0, state1(0.0, 0.0)));
    EXPECT_NEAR(g(0), -0.01, 1e-16);
}

TEST(Gamma, DvpHandEvaluation) {
    OscillatorModel m = build_dvp(dvp_unforced());
    Vec g = gamma(m, 0.0, state1(2.0, 0.0), frozen_nonlinear(m, 0.0, state1(1.0, 0.0)));
    EXPECT_DOUBLE_EQ(g(0), -14.0);
}

TEST(Gamma, DvpVanishingDiffusionIsSingular) {
    OscillatorModel m = build_dvp(dvp_unforced());
    EXPECT_THROW(gamma(m, 0.0, state1(0.0, 1.0), frozen_nonlinear(m, 0.0, state1(1.0, 0.0))), SingularShiftError);
}

TEST(Phi, LinearModelIsZero) {
    OscillatorModel m = build_linear_oscillator(1.0, 0.2, 1.0);
    for (PhiForm f : {PhiForm::Ito, PhiForm::Printed})
        EXPECT_EQ(phi(m, 0.0, state1(0.3, 0.4), scalar(0.0), scalar(0.7), f)(0), 0.0);
}

TEST(Phi, PrintedRvpAtFrozenPoint) {
    OscillatorModel m = build_rvp({});
    PathState s = state1(0.1, 0.2);
    Vec p = phi(m, 0.0, s, frozen_nonlinear(m, 0.0, s), scalar(0.0), PhiForm::Printed);
    EXPECT_NEAR(p(0), 0.13, 1e-15);
}

TEST(Phi, ItoRvpAtFrozenPointKeepsHalfCorrection) {
    // B~ = 0 and gamma = 0 leave only the quadratic-covariation half term
    OscillatorModel m = build_rvp({});
    PathState s = state1(0.1, 0.2);
    Vec p = phi(m, 0.0, s, frozen_nonlinear(m, 0.0, s), scalar(0.0), PhiForm::Ito);
    EXPECT_NEAR(p(0), -0.065, 1e-15);
}

TEST(Phi, PrintedDvpWithZeroBrownianIsMinusHalfGammaSquared) {
    OscillatorModel m = build_dvp(dvp_unforced());
    PathState s = state1(2.0, 0.5);
    Vec frozen = frozen_nonlinear(m, 0.0, state1(1.0, 0.0));
    EXPECT_DOUBLE_EQ(phi(m, 0.0, s, frozen, scalar(0.0), PhiForm::Printed)(0), -0.5 * 14.0 * 14.0);
    EXPECT_DOUBLE_EQ(phi(m, 0.0, s, frozen, scalar(0.0), PhiForm::Ito)(0), 0.5 * 14.0 * 14.0);
}

TEST(Phi, TwoChannelsReportedSeparately) {
    OscillatorModel m = build_two_dof({});
    PathState s, sf;
    s.x1 = sf.x1 = Vec(2);
    s.x2 = sf.x2 = Vec(2);
    s.x1 << 0.1, 0.2;
    s.x2 << -0.3, 0.05;
    sf.x1 << 0.0, 0.1;
    sf.x2 << 0.1, 0.0;
    Vec b(2);
    b << 0.02, -0.04;
    Vec frozen = frozen_nonlinear(m, 0.0, sf);
    Vec p = phi(m, 0.0, s, frozen, b);
    ASSERT_EQ(p.size(), 2);
    GirsanovEvaluator ev(m, PhiForm::Ito);
    EXPECT_NEAR(ev.eval(0.0, s, frozen, b).phi, p(0) + p(1), 1e-14);
}

TEST(Phi, DegenerateAlongAnyPathForLinearModel) {
    OscillatorModel m = build_linear_oscillator(1.0, 0.5, 1.0);
    GirsanovEvaluator ev(m, PhiForm::Ito);
    TimeGrid g(0.0, 1.0, 10, 5);
    auto nodes = em_path(m, g, 3, 0, DriftMode::Classical, state1(1.0, 0.0));
    for (const auto& s : nodes) {
        PointTerms t = ev.eval(s.t, s, Vec(), scalar(0.3));
        EXPECT_EQ(t.phi, 0.0);
        EXPECT_EQ(t.boundary, 0.0);
    }
}

TEST(Lambda1, ZeroBrownianAtBothEndsIsZero) {
    OscillatorModel m = build_rvp({});
    Vec frozen = frozen_nonlinear(m, 0.0, state1(0.1, 0.1));
    EXPECT_EQ(lambda1(m, 0.0, state1(0.2, 0.3), scalar(0.0), 0.01, state1(0.4, -0.1), scalar(0.0), frozen), 0.0);
}

TEST(Lambda1, DvpStationaryPathIsZero) {
    OscillatorModel m = build_dvp(dvp_unforced());
    PathState s = state1(1.3, 0.0);
    Vec frozen = frozen_nonlinear(m, 0.0, s);
    EXPECT_EQ(lambda1(m, 0.0, s, scalar(0.1), 0.01, s, scalar(0.6), frozen), 0.0);
}

TEST(Lambda1, ConstantShiftGivesShiftTimesBrownian) {
    const double c = 0.8, sigma = 2.0, b = 0.35;
    OscillatorModel m = constant_shift_model(sigma);
    // gamma = (1 - frozen) / sigma = c
    Vec frozen = scalar(1.0 - c * sigma);
    double l = lambda1(m, 0.0, state1(0.0, 0.2), scalar(0.0), 0.01, state1(0.1, 0.1), scalar(b), frozen);
    EXPECT_NEAR(l, c * b, 1e-15);
}

TEST(Lambda2, ZeroPhiIsZero) {
    std::vector<double> phi(11, 0.0);
    EXPECT_EQ(lambda2_log_integral(phi, 0.001), 0.0);
}

TEST(Lambda2, ConstantPhi) {
    std::vector<double> phi(11, 2.0);
    EXPECT_NEAR(lambda2_log_integral(phi, 0.001), -0.02, 1e-16);
}

TEST(Lambda2, LinearPhiIsExact) {
    std::vector<double> phi(11);
    for (int r = 0; r <= 10; ++r) phi[r] = 0.4 * r;
    EXPECT_NEAR(lambda2_log_integral(phi, 0.001), -0.02, 1e-16);
}

TEST(DiscreteRadonNikodym, ZeroShiftIsOne) {
    std::vector<double> g(5, 0.0), dx = {0.1, -0.2, 0.3, 0.0, 1.0};
    EXPECT_EQ(discrete_radon_nikodym(g, dx, 0.1), 1.0);
}

TEST(DiscreteRadonNikodym, SingleStepHandEvaluation) {
    std::vector<double> g = {1.0}, dx = {0.1};
    EXPECT_DOUBLE_EQ(discrete_radon_nikodym(g, dx, 0.04), std::exp(0.08));
}

TEST(DiscreteRadonNikodym, LengthMismatchIsConfigError) {
    std::vector<double> g = {1.0, 2.0}, dx = {0.1};
    EXPECT_THROW(discrete_radon_nikodym(g, dx, 0.1), ConfigError);
}

TEST(DiscreteRadonNikodym, AlwaysPositive) {
    std::vector<double> g = {3.0, -2.0, 1.5}, dx = {-0.9, 0.8, -0.7};
    EXPECT_GT(discrete_radon_nikodym(g, dx, 0.01), 0.0);
}

TEST(DiscreteRadonNikodym, UnitMeanOverGaussianPaths) {
    struct Setting {
        double gamma;
        int steps;
        double dt;
    };
    for (Setting s : {Setting{0.5, 10, 0.1}, Setting{1.0, 20, 0.05}, Setting{-0.3, 5, 0.2}}) {
        MeanEstimate e = lambda_unit_mean(s.gamma, s.steps, s.dt, 100000, 3);
        EXPECT_LT(std::abs(e.z()), 5.0) << "gamma " << s.gamma;
    }
}

TEST(ChangeOfMeasure, IndicatorMatchesShiftedNormal) {
    MeanEstimate e = change_of_measure(0.5, 0.0, 1.0, 1000000, 5);
    EXPECT_NEAR(e.target, 0.3829249225480262, 1e-12);
    EXPECT_LT(std::abs(e.z()), 3.0);
}

TEST(ItoSplit, BoundaryMinusIntegralMatchesDiscreteWeightOnFineGrid) {
    // gamma quadratic in velocity has no third derivative, so the split
    // bracket(t_i) - bracket(t_r) - int phi is exact in continuous time and the
    // discrete log Lambda_N of one macro step approaches it at the strong rate
    OscillatorModel m = quadratic_velocity_model(0.7);
    PathState x0 = state1(0.8, -0.6);
    Vec frozen = frozen_nonlinear(m, 0.0, x0);
    GirsanovEvaluator ev(m, PhiForm::Ito);
    auto rms_gap = [&](int n) {
        double acc = 0.0;
        for (std::uint32_t path = 0; path < 20; ++path) {
            TimeGrid g(0.0, 0.01, 1, n);
            IncrementPanel panel = sample_panel(g, 0, path, 21, 1);
            std::vector<PathState> sub;
            em_substeps(m, x0, panel, DriftMode::Frozen, frozen, sub);
            std::vector<double> gam, dx, phi_nodes;
            for (int r = 0; r < n; ++r) {
                gam.push_back(gamma(m, sub[r].t, sub[r], frozen)(0));
                dx.push_back(panel.increments(0, r));
            }
            for (int r = 0; r <= n; ++r)
                phi_nodes.push_back(ev.eval(sub[r].t, sub[r], frozen, scalar(panel.cumulative(0, r))).phi);
            double discrete = discrete_log_radon_nikodym(gam, dx, g.dt_sub());
            double split = ev.boundary(0.01, sub.back(), frozen, scalar(panel.cumulative(0, n))) -
                           ev.boundary(0.0, x0, frozen, scalar(0.0)) + lambda2_log_integral(phi_nodes, g.dt_sub());
            acc += (discrete - split) * (discrete - split);
        }
        return std::sqrt(acc / 20.0);
    };
    double coarse = rms_gap(1000), fine = rms_gap(16000);
    EXPECT_LT(coarse, 5e-4);
    EXPECT_LT(fine, 0.5 * coarse);
}
