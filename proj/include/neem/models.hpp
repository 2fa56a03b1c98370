#pragma once

#include "neem/model.hpp"

namespace neem {

struct RvpParams {
    double h1 = 1.0;
    double h3 = 1.0;
    double sigma = 1.0;
};

struct DvpParams {
    double m = 1.0;
    double c = 1.5;
    double k = 60.0;
    double alpha = 2.0;
    double rho = 0.5;
    double A = 1.0;
    double omega = 1.0;        // Hz
    bool quotient_rule = true; // false: differentiate the cubic numerator only
};

struct TwoDofParams {
    double c1 = 7.75, c2 = 7.75;
    double k1 = 100.0, k2 = 100.0;
    double alpha = 100.0, beta = 100.0;
    double sigma1 = 1.0, sigma2 = 1.0;
};

OscillatorModel build_rvp(const RvpParams& p);
OscillatorModel build_dvp(const DvpParams& p);
OscillatorModel build_two_dof(const TwoDofParams& p);

// dv = -a v dt + sigma dB on the velocity row (displacement just integrates).
OscillatorModel build_ou(double a, double sigma);

// dv = mu v dt + sigma v dB on the velocity row.
OscillatorModel build_gbm(double mu, double sigma);

// x'' + c x' + w^2 x = noise; no nonlinear part.
OscillatorModel build_linear_oscillator(double omega, double c, double sigma);

struct StationaryMoments {
    double ex2 = 0.0;   // E[X^2]
    double ev2 = 0.0;   // E[Xdot^2]
    double half_width = 0.0;
    int grid_points = 0;
};

// Quadrature of p ~ exp{-(2/sigma^2)(h1 H + h3 H^2)}, H = (x^2 + v^2)/2.
StationaryMoments rvp_stationary_moments(const RvpParams& p, double rel_tol = 1e-6, int max_points = 4097);

}  // namespace neem
