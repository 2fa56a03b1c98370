#pragma once

#include <span>
#include <vector>

#include "neem/model.hpp"

namespace neem {

// Ito: the integration-by-parts split derived with every Ito correction kept.
// Printed: the term list exactly as tabulated for the method, kept for study.
enum class PhiForm { Ito, Printed };

// delta = g^nl(frozen) - g^nl(t, x).
Vec delta(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen);

// gamma = -F^{-1} delta.
Vec gamma(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen);

// Q-measure velocity drift: linear + frozen nonlinear + forcing.
Vec q_drift(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen);

// Everything the sampler needs at one (state, B~) point.
struct PointTerms {
    double phi = 0.0;       // summed over channels
    double boundary = 0.0;  // Lambda1 bracket value, summed over channels
};

class GirsanovEvaluator {
public:
    GirsanovEvaluator(const OscillatorModel& model, PhiForm form);

    // phi per channel written into phi_out.
    PointTerms eval(double t, const PathState& s, const Vec& frozen, const Vec& b_tilde, Vec* phi_out = nullptr);

    // Bracket value gamma B~ - ... used by the boundary factor.
    double boundary(double t, const PathState& s, const Vec& frozen, const Vec& b_tilde);

    const GammaJet& last_jet() const { return jet_; }
    PhiForm form() const { return form_; }

private:
    const OscillatorModel& model_;
    PhiForm form_;
    GammaJet jet_;
};

Vec phi(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen, const Vec& b_tilde,
        PhiForm form = PhiForm::Ito);

// log Lambda1 = bracket(t_i) - bracket(t_r).
double lambda1(const OscillatorModel& model, double t_r, const PathState& s_r, const Vec& b_r, double t_i,
               const PathState& s_i, const Vec& b_i, const Vec& frozen, PhiForm form = PhiForm::Ito);

// -trapezoid(phi) on a uniform sub-grid.
double lambda2_log_integral(std::span<const double> phi_samples, double dt_sub);

// exp(sum gamma dx - 1/2 sum gamma^2 dt), accumulated in log space.
double discrete_radon_nikodym(std::span<const double> gammas, std::span<const double> dx, double dt);
double discrete_log_radon_nikodym(std::span<const double> gammas, std::span<const double> dx, double dt);

}  // namespace neem
