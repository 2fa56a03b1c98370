#include "neem/models.hpp"

#include <cmath>
#include <numbers>

namespace neem {

namespace {

BigMat second_order_block(const Mat& K, const Mat& C) {
    const int m = static_cast<int>(K.rows());
    BigMat g = BigMat::Zero(2 * m, 2 * m);
    g.block(0, m, m, m) = Mat::Identity(m, m);
    g.block(m, 0, m, m) = K;
    g.block(m, m, m, m) = C;
    return g;
}

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

}  // namespace

OscillatorModel build_rvp(const RvpParams& p) {
    if (!(p.sigma > 0)) throw ConfigError("rvp needs sigma > 0");
    if (p.h1 < 0 || p.h3 < 0) throw ConfigError("rvp needs h1, h3 >= 0");
    OscillatorModel m;
    m.name = "rvp";
    m.dof = 1;
    m.channels = 1;
    m.linear_drift = second_order_block(scalar(-1.0), scalar(-p.h1));
    const double sigma = p.sigma;
    m.diffusion = [sigma](double, const PathState&) { return scalar(sigma); };
    if (p.h3 != 0.0) {
        const double h3 = p.h3;
        m.nonlinear_drift = [h3](double, const PathState& s) {
            double x = s.x1(0), v = s.x2(0);
            return Vec::Constant(1, -h3 * (x * x * v + v * v * v));
        };
        m.gamma_jet = [h3, sigma](double, const PathState& s, const Vec& fr, GammaJet& j) {
            double x = s.x1(0), v = s.x2(0);
            j.reset(1, 1);
            j.gamma(0) = (-h3 * (x * x * v + v * v * v) - fr(0)) / sigma;
            j.d1[0](0) = -2.0 * h3 * x * v / sigma;
            j.d2[0](0) = -h3 * (x * x + 3.0 * v * v) / sigma;
            j.d22[0](0, 0) = -6.0 * h3 * v / sigma;
            j.d12[0](0, 0) = -2.0 * h3 * x / sigma;
        };
    }
    check_model(m);
    return m;
}

OscillatorModel build_dvp(const DvpParams& p) {
    if (!(p.m > 0)) throw ConfigError("dvp needs m > 0");
    if (p.rho < 0) throw ConfigError("dvp needs rho >= 0");
    OscillatorModel m;
    m.name = "dvp";
    m.dof = 1;
    m.channels = 1;
    // stiffness enters with a positive sign, as the model is stated
    m.linear_drift = second_order_block(scalar(p.k / p.m), scalar(-p.c / p.m));
    const double mass = p.m, rho = p.rho, amp = p.A, om = p.omega, alpha = p.alpha;
    if (amp != 0.0)
        m.forcing = [mass, amp, om](double t) {
            return Vec::Constant(1, amp / mass * std::sin(2.0 * std::numbers::pi * om * t));
        };
    m.diffusion = [mass, rho](double, const PathState& s) { return scalar(rho * s.x1(0) / mass); };
    m.state_dependent_diffusion = true;
    m.vanishing_diffusion = true;
    if (alpha != 0.0) {
        m.nonlinear_drift = [mass, alpha](double, const PathState& s) {
            double x = s.x1(0);
            return Vec::Constant(1, -alpha * x * x * x / mass);
        };
        const bool quotient = p.quotient_rule;
        m.gamma_jet = [mass, rho, alpha, quotient](double t, const PathState& s, const Vec& fr, GammaJet& j) {
            double x = s.x1(0);
            j.reset(1, 1);
            double num = -alpha * x * x * x / mass - fr(0);
            if (x == 0.0) {
                if (num != 0.0) throw SingularShiftError("dvp diffusion vanishes at x1 = 0", t);
                return;
            }
            double f = rho * x / mass;
            j.gamma(0) = num / f;
            j.d1[0](0) = -3.0 * alpha * x / rho;
            if (quotient) j.d1[0](0) -= j.gamma(0) / x;
        };
        for (JetBlock b : {JetBlock::D2, JetBlock::D22, JetBlock::D12}) m.zero_terms.push_back({0, b, 0, 0});
    }
    check_model(m);
    return m;
}

OscillatorModel build_two_dof(const TwoDofParams& p) {
    if (!(p.sigma1 > 0) || !(p.sigma2 > 0)) throw ConfigError("two_dof needs sigma1, sigma2 > 0");
    OscillatorModel m;
    m.name = "two_dof";
    m.dof = 2;
    m.channels = 2;
    Mat K(2, 2), C(2, 2);
    K << -(p.k1 + p.k2), p.k2, p.k2, -p.k2;
    C << -(p.c1 + p.c2), p.c2, p.c2, -p.c2;
    m.linear_drift = second_order_block(K, C);
    const double s1 = p.sigma1, s2 = p.sigma2, al = p.alpha, be = p.beta;
    m.diffusion = [s1, s2](double, const PathState&) {
        Mat f = Mat::Zero(2, 2);
        f(0, 0) = s1;
        f(1, 1) = s2;
        return f;
    };
    if (al != 0.0 || be != 0.0) {
        // x1 = (y1, y3), x2 = (y2, y4)
        m.nonlinear_drift = [al, be](double, const PathState& s) {
            double y1 = s.x1(0), y2 = s.x2(0), y3 = s.x1(1);
            Vec g(2);
            g << -al * y1 * y1 * y2, -be * y3 * y3 * y3;
            return g;
        };
        m.gamma_jet = [al, be, s1, s2](double, const PathState& s, const Vec& fr, GammaJet& j) {
            double y1 = s.x1(0), y2 = s.x2(0), y3 = s.x1(1);
            j.reset(2, 2);
            j.gamma(0) = (-al * y1 * y1 * y2 - fr(0)) / s1;
            j.gamma(1) = (-be * y3 * y3 * y3 - fr(1)) / s2;
            j.d1[0](0) = -2.0 * al * y1 * y2 / s1;
            j.d2[0](0) = -al * y1 * y1 / s1;
            j.d12[0](0, 0) = -2.0 * al * y1 / s1;
            j.d1[1](1) = -3.0 * be * y3 * y3 / s2;
        };
        m.zero_terms.push_back({0, JetBlock::D22, 0, 0});
        m.zero_terms.push_back({1, JetBlock::D2, 1, 0});
        m.zero_terms.push_back({1, JetBlock::D22, 1, 1});
        m.zero_terms.push_back({1, JetBlock::D12, 1, 1});
    }
    check_model(m);
    return m;
}

OscillatorModel build_ou(double a, double sigma) {
    OscillatorModel m;
    m.name = "ou";
    m.linear_drift = second_order_block(scalar(0.0), scalar(-a));
    m.diffusion = [sigma](double, const PathState&) { return scalar(sigma); };
    check_model(m);
    return m;
}

OscillatorModel build_gbm(double mu, double sigma) {
    OscillatorModel m;
    m.name = "gbm";
    m.linear_drift = second_order_block(scalar(0.0), scalar(mu));
    m.diffusion = [sigma](double, const PathState& s) { return scalar(sigma * s.x2(0)); };
    m.state_dependent_diffusion = true;
    check_model(m);
    return m;
}

OscillatorModel build_linear_oscillator(double omega, double c, double sigma) {
    OscillatorModel m;
    m.name = "linear";
    m.linear_drift = second_order_block(scalar(-omega * omega), scalar(-c));
    m.diffusion = [sigma](double, const PathState&) { return scalar(sigma); };
    check_model(m);
    return m;
}

StationaryMoments rvp_stationary_moments(const RvpParams& p, double rel_tol, int max_points) {
    if (!(p.h1 > 0) || !(p.h3 > 0) || !(p.sigma > 0)) throw ConfigError("stationary density needs h1, h3, sigma > 0");
    const double c = 2.0 / (p.sigma * p.sigma);
    auto expo = [&](double H) { return c * (p.h1 * H + p.h3 * H * H); };
    // half width where the density falls below 1e-12 of its peak
    const double target = std::log(1e12);
    double H = 1.0;
    while (expo(H) < target) H *= 1.5;
    double lo = 0.0, hi = H;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (expo(mid) < target ? lo : hi) = mid;
    }
    const double L = std::sqrt(2.0 * hi);

    auto integrate = [&](int n, double& ex2, double& ev2) {
        const double h = 2.0 * L / (n - 1);
        double z = 0, sx = 0, sv = 0;
        for (int i = 0; i < n; ++i) {
            double x = -L + i * h;
            double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
            for (int j = 0; j < n; ++j) {
                double v = -L + j * h;
                double w = wi * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
                double d = w * std::exp(-expo(0.5 * (x * x + v * v)));
                z += d;
                sx += d * x * x;
                sv += d * v * v;
            }
        }
        ex2 = sx / z;
        ev2 = sv / z;
    };

    StationaryMoments out;
    out.half_width = L;
    double px = 0, pv = 0;
    integrate(33, px, pv);
    for (int n = 65; n <= max_points; n = 2 * n - 1) {
        double ex2, ev2;
        integrate(n, ex2, ev2);
        bool done = std::abs(ex2 - px) <= rel_tol * std::abs(ex2) && std::abs(ev2 - pv) <= rel_tol * std::abs(ev2);
        px = ex2;
        pv = ev2;
        out.grid_points = n;
        if (done) {
            out.ex2 = ex2;
            out.ev2 = ev2;
            return out;
        }
    }
    throw NumericError("stationary quadrature did not converge");
}

}  // namespace neem
