#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neem/em.hpp"
#include "neem/model.hpp"

namespace neem {

struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    double target = 0.0;
    double z() const { return se > 0 ? (mean - target) / se : (mean == target ? 0.0 : 1e300); }
};

// E^P[Lambda_N] for Gaussian increments with constant shift.
MeanEstimate lambda_unit_mean(double gamma, int steps, double dt, int samples, std::uint64_t seed);

// E^P[Lambda 1_[a,b](X)] for X ~ N(0,1) against Phi(b - gamma) - Phi(a - gamma).
MeanEstimate change_of_measure(double gamma, double a, double b, int samples, std::uint64_t seed);

// Thinning acceptance for phi~(u) = c0 + c1 (u - 0) on [0, dt] against exp(-int phi~).
MeanEstimate thinning_acceptance(double c0, double c1, double dt, int trials, std::uint64_t seed);

StrongOrderResult gbm_strong_order(double mu, double sigma, int ensemble, std::uint64_t seed,
                                   int finest_power = 10);

struct AuditResult {
    double max_rel_error = 0.0;
    int points = 0;
    int zero_term_violations = 0;
    double phi_max_rel_error = 0.0;
    bool passed(double tol = 1e-6, double phi_tol = 1e-5) const {
        return max_rel_error <= tol && zero_term_violations == 0 && phi_max_rel_error <= phi_tol;
    }
};

// Jet closure against central differences of the generic shift at random
// states, declared-zero entries, and phi built from either jet.
AuditResult derivative_audit(const OscillatorModel& model, int points, std::uint64_t seed);

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidateOptions {
    bool reduced = false;
    bool mutate_gamma_sign = false;
    std::uint64_t seed = 1;
};

std::vector<SuiteResult> run_validation(const ValidateOptions& opt);

}  // namespace neem
