#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "neem/em.hpp"
#include "neem/models.hpp"
#include "neem/sampler.hpp"
#include "neem/validate.hpp"

using namespace neem;

namespace {

PathState state1(double x, double v) {
    PathState s;
    s.x1 = Vec::Constant(1, x);
    s.x2 = Vec::Constant(1, v);
    return s;
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

TEST(BoundNormalize, ShiftRemovesNegativeLowerBound) {
    Normalized n = bound_normalize(-3.0, -3.0, -1.0, 0.01, 0.01);
    EXPECT_EQ(n.phi_tilde, 0.0);
    EXPECT_NEAR(n.log_compensation, 0.03, 1e-16);
    EXPECT_EQ(n.rate, 100.0);
    EXPECT_FALSE(n.raised);
}

TEST(BoundNormalize, LargePhiRaisesTheRate) {
    Normalized n = bound_normalize(150.0, 0.0, 10.0, 0.01, 0.001);
    EXPECT_EQ(n.phi_tilde, 150.0);
    EXPECT_EQ(n.rate, 150.0);
    EXPECT_TRUE(n.raised);
}

TEST(BoundNormalize, NonFinitePhiIsNumericError) {
    EXPECT_THROW(bound_normalize(std::nan(""), 0.0, 1.0, 0.01, 0.001), NumericError);
}

TEST(EstimateBounds, PadsBothSides) {
    std::vector<double> phi = {1.0, 3.0, 2.0};
    Bounds b = estimate_bounds(phi, 0.01, 0.1, BoundMode::Shift);
    EXPECT_DOUBLE_EQ(b.lower, 0.8);
    EXPECT_DOUBLE_EQ(b.upper, 3.2);
    EXPECT_EQ(b.rate, 100.0);
    Bounds z = estimate_bounds(phi, 0.01, 0.1, BoundMode::Zero);
    EXPECT_EQ(z.lower, 0.0);
}

TEST(EstimateBounds, WideSpanRaisesRate) {
    std::vector<double> phi = {-500.0, 500.0};
    Bounds b = estimate_bounds(phi, 0.01, 0.0, BoundMode::Shift);
    EXPECT_EQ(b.rate, 1000.0);
    EXPECT_TRUE(b.raised);
}

TEST(Thinning, ConstantRateMatchesExponential) {
    MeanEstimate e = thinning_acceptance(50.0, 0.0, 0.01, 100000, 1);
    EXPECT_NEAR(e.target, std::exp(-0.5), 1e-15);
    EXPECT_LT(std::abs(e.z()), 3.0);
}

TEST(Thinning, LinearRateMatchesExponential) {
    MeanEstimate e = thinning_acceptance(0.0, 8000.0, 0.01, 100000, 2);
    EXPECT_LT(std::abs(e.z()), 3.0);
}

TEST(Thinning, ZeroPhiAlwaysAccepts) {
    StreamKey key;
    key.stream = Stream::Thinning;
    for (std::uint32_t p = 0; p < 1000; ++p) {
        key.path = p;
        EXPECT_TRUE(accept_thinning([](double) { return 0.0; }, 0.0, 0.01, 100.0, key));
    }
}

TEST(Thinning, CountsViolations) {
    StreamKey key;
    key.stream = Stream::Thinning;
    ThinningStats st;
    for (std::uint32_t p = 0; p < 100; ++p) {
        key.path = p;
        accept_thinning([](double) { return -1.0; }, 0.0, 0.1, 100.0, key, &st);
    }
    EXPECT_GT(st.points, 0);
    EXPECT_EQ(st.violations, st.points);
}

TEST(Resample, EqualWeightsAreIdentity) {
    std::vector<double> lw(7, -2.5);
    auto anc = systematic_resample(lw, 0.37);
    for (int i = 0; i < 7; ++i) EXPECT_EQ(anc[i], i);
}

TEST(Resample, SingleSurvivorIsCopied) {
    std::vector<double> lw = {kNegInf, kNegInf, 0.0, kNegInf};
    auto anc = systematic_resample(lw, 0.9);
    for (int a : anc) EXPECT_EQ(a, 2);
}

TEST(Resample, NoValidPathIsNumericError) {
    std::vector<double> lw = {kNegInf, kNegInf};
    EXPECT_THROW(systematic_resample(lw, 0.5), NumericError);
}

TEST(Resample, SelectionFrequencyFollowsWeights) {
    // weights (0.75, 0.25) over two slots
    std::vector<double> lw = {std::log(0.75), std::log(0.25)};
    const int draws = 10000;
    long long first = 0;
    for (int i = 0; i < draws; ++i) {
        StreamKey key;
        key.stream = Stream::Synthetic;
        key.a = static_cast<std::uint32_t>(i);
        auto anc = systematic_resample(lw, uniform01(key));
        for (int a : anc) first += (a == 0);
    }
    EXPECT_NEAR(static_cast<double>(first) / (2.0 * draws), 0.75, 0.01);
}

TEST(Resample, PreservesWeightedMeanInExpectation) {
    std::vector<double> x = {1.0, 2.0, 5.0, -3.0, 0.5};
    std::vector<double> w = {0.1, 0.4, 0.2, 0.05, 0.25};
    std::vector<double> lw;
    double target = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lw.push_back(std::log(w[i]));
        target += w[i] * x[i];
    }
    const int draws = 20000;
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) {
        StreamKey key;
        key.stream = Stream::Synthetic;
        key.b = static_cast<std::uint32_t>(i);
        auto anc = systematic_resample(lw, uniform01(key));
        double m = 0.0;
        for (int a : anc) m += x[a];
        acc += m / static_cast<double>(anc.size());
    }
    EXPECT_NEAR(acc / draws, target, 0.02);
}

TEST(Ess, EqualWeightsGiveEnsembleSize) {
    std::vector<double> lw(50, 3.0);
    EXPECT_NEAR(effective_sample_size(lw), 50.0, 1e-12);
}

TEST(Ess, OneDominantWeightGivesOne) {
    std::vector<double> lw = {0.0, kNegInf, kNegInf};
    EXPECT_NEAR(effective_sample_size(lw), 1.0, 1e-15);
}

TEST(ResolveEval, VanishingDiffusionUsesDiscrete) {
    EXPECT_EQ(resolve_eval(build_dvp({}), PhiEval::Auto), PhiEval::Discrete);
    EXPECT_EQ(resolve_eval(build_rvp({}), PhiEval::Auto), PhiEval::Bridge);
    EXPECT_EQ(resolve_eval(build_dvp({}), PhiEval::Bridge), PhiEval::Bridge);
}

TEST(DiscretePhi, SplitReproducesSubstepLikelihoodRatio) {
    // gamma_N B~_N - h sum phi_r = sum gamma_r dB_r - h/2 sum gamma_r^2
    OscillatorModel m = build_rvp({});
    TimeGrid g(0.0, 0.1, 10, 16);
    PathState x0 = state1(0.7, -0.3);
    Vec frozen = frozen_nonlinear(m, 0.0, x0);
    for (std::uint32_t p = 0; p < 10; ++p) {
        IncrementPanel panel = sample_panel(g, 0, p, 4, 1);
        std::vector<PathState> sub;
        em_substeps(m, x0, panel, DriftMode::Frozen, frozen, sub);
        Eigen::MatrixXd gam;
        std::vector<double> phi;
        discrete_phi(m, sub, panel, frozen, g.dt_sub(), gam, phi);
        ASSERT_EQ(phi.size(), 16u);
        ASSERT_EQ(gam.cols(), 17);
        double split = gam(0, 16) * panel.cumulative(0, 16);
        std::vector<double> gs, dx;
        for (int r = 0; r < 16; ++r) {
            split -= g.dt_sub() * phi[r];
            gs.push_back(gam(0, r));
            dx.push_back(panel.increments(0, r));
        }
        EXPECT_NEAR(split, discrete_log_radon_nikodym(gs, dx, g.dt_sub()), 1e-12);
    }
}

TEST(PathStep, LinearModelAlwaysAcceptsWithZeroWeight) {
    OscillatorModel m = build_linear_oscillator(1.0, 0.2, 1.0);
    TimeGrid g(0.0, 1.0, 10, 5);
    SamplerOptions o;
    PathStep s = neem_path_step(m, g, 2, 3, state1(0.4, 0.1), o);
    EXPECT_TRUE(s.accepted);
    EXPECT_EQ(s.trials, 1);
    EXPECT_EQ(s.log_weight, 0.0);
}

TEST(PathStep, ZeroBoundStillAcceptsOften) {
    OscillatorModel m = build_rvp({});
    TimeGrid g(0.0, 1.0, 100, 10);
    for (BoundMode b : {BoundMode::Shift, BoundMode::Zero}) {
        SamplerOptions o;
        o.bound = b;
        int trials = 0;
        for (std::uint32_t p = 0; p < 200; ++p) {
            PathStep s = neem_path_step(m, g, 0, p, state1(1.0, 1.0), o);
            ASSERT_TRUE(s.accepted);
            trials += s.trials;
        }
        EXPECT_LT(trials, 260);
    }
}

TEST(Degeneracy, LinearModelReproducesEmExactly) {
    for (const auto& m : {build_linear_oscillator(1.0, 0.3, 0.8), build_ou(1.5, 1.0)}) {
        TimeGrid g(0.0, 2.0, 40, 4);
        SamplerOptions o;
        o.base.ensemble = 64;
        o.base.seed = 5;
        NeemDiagnostics d;
        MomentSeries ne = neem_simulate(m, g, state1(0.2, -0.1), o, &d);
        MomentSeries em = simulate_em(m, g, state1(0.2, -0.1), o.base);
        EXPECT_EQ(ne.m2, em.m2) << m.name;
        EXPECT_EQ(ne.se, em.se) << m.name;
        for (const auto& a : ne.acceptance) EXPECT_EQ(a.ratio(), 1.0);
        EXPECT_EQ(d.capped_paths, 0);
    }
}

TEST(NeemSimulate, ThreadCountDoesNotChangeResults) {
    OscillatorModel m = build_rvp({});
    TimeGrid g(0.0, 0.5, 50, 10);
    SamplerOptions a, b;
    a.base.ensemble = b.base.ensemble = 64;
    a.base.threads = 1;
    b.base.threads = 4;
    MomentSeries x = neem_simulate(m, g, state1(0.5, 0.5), a);
    MomentSeries y = neem_simulate(m, g, state1(0.5, 0.5), b);
    EXPECT_EQ(x.m2, y.m2);
    EXPECT_EQ(x.se, y.se);
    ASSERT_EQ(x.acceptance.size(), y.acceptance.size());
    for (std::size_t i = 0; i < x.acceptance.size(); ++i) EXPECT_EQ(x.acceptance[i].trials, y.acceptance[i].trials);
}

TEST(NeemSimulate, RejectsTinyEnsemble) {
    SamplerOptions o;
    o.base.ensemble = 1;
    EXPECT_THROW(neem_simulate(build_rvp({}), TimeGrid(0.0, 1.0, 10, 2), state1(0, 0), o), ConfigError);
}

TEST(NeemSimulate, DvpRunsWithoutCappedPaths) {
    OscillatorModel m = build_dvp({});
    TimeGrid g(0.0, 1.0, 100, 10);
    SamplerOptions o;
    o.base.ensemble = 50;
    NeemDiagnostics d;
    MomentSeries ms = neem_simulate(m, g, state1(0.01, 0.01), o, &d);
    EXPECT_EQ(d.capped_paths, 0);
    EXPECT_EQ(d.bound_violations, 0);
    for (const auto& row : ms.m2)
        for (double v : row) EXPECT_TRUE(std::isfinite(v));
}
