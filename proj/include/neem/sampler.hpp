#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "neem/brownian.hpp"
#include "neem/em.hpp"
#include "neem/girsanov.hpp"
#include "neem/stats.hpp"

namespace neem {

// Thinning: Poisson thinning with probability exp(-int phi~).
// Series: the alternating w > 1/k! reading of the pseudocode (study only).
// Trapezoid: no rejection, trapezoidal Lambda2 folded into the weight.
enum class AcceptMode { Thinning, Series, Trapezoid };

// Bridge: phi from the derivative bundle at bridge-interpolated states.
// Discrete: phi_r = sum_k B~_{k,r+1}(gamma_{k,r+1} - gamma_{k,r})/h + gamma_{k,r}^2/2,
// piecewise constant on the sub-grid, the summation-by-parts split of the
// substep likelihood ratio. Auto picks Discrete for models whose diffusion
// can vanish and Bridge otherwise.
enum class PhiEval { Auto, Bridge, Discrete };

// Shift: L = padded sub-grid minimum of phi. Zero: L = 0.
enum class BoundMode { Shift, Zero };

struct SamplerOptions {
    EnsembleOptions base;
    PhiForm form = PhiForm::Ito;
    PhiEval eval = PhiEval::Auto;
    AcceptMode accept = AcceptMode::Thinning;
    BoundMode bound = BoundMode::Shift;
    // Weight accepted paths by an independent estimate of the acceptance
    // normalizer so that repeat-until-accept does not bias the ensemble.
    bool normalize = true;
    int max_trials = 1000;
    double pad = 0.1;
};

struct Bounds {
    double lower = 0.0;
    double upper = 0.0;
    double rate = 0.0;
    bool raised = false;
};

// Padded bounds from sub-grid samples of phi and the thinning rate max(1/dt, U-L).
Bounds estimate_bounds(std::span<const double> phi_nodes, double dt, double pad, BoundMode mode);

struct Normalized {
    double phi_tilde = 0.0;
    double log_compensation = 0.0;  // -L * dt_sub
    double rate = 0.0;
    bool raised = false;
};

Normalized bound_normalize(double phi_value, double lower, double upper, double dt, double dt_sub);

struct ThinningStats {
    long long points = 0;
    long long violations = 0;   // phi~ outside [0, rate] at a test point
};

// Accepts with probability exp(-int_{t0}^{t1} phi~(u) du) for 0 <= phi~ <= rate.
// phi_tilde must be called with increasing u.
bool accept_thinning(const std::function<double(double)>& phi_tilde, double t0, double t1, double rate,
                     StreamKey key, ThinningStats* stats = nullptr);

PhiEval resolve_eval(const OscillatorModel& model, PhiEval eval);

// Sub-grid shift values gamma_r (columns, r = 0..N) and piecewise-constant phi_r (r = 0..N-1).
void discrete_phi(const OscillatorModel& model, const std::vector<PathState>& sub, const IncrementPanel& panel,
                  const Vec& frozen, double dt_sub, Eigen::MatrixXd& gammas, std::vector<double>& phi);

struct PathStep {
    PathState end;
    double log_weight = 0.0;
    int trials = 0;
    bool accepted = false;
    int bound_raises = 0;
    ThinningStats thinning;
};

// One macro step of one path: repeat frozen-drift proposals until accepted.
PathStep neem_path_step(const OscillatorModel& model, const TimeGrid& grid, int macro_index, std::uint32_t path,
                        const PathState& start, const SamplerOptions& opt);

struct WeightedEnsemble {
    std::vector<PathState> states;
    std::vector<double> log_weights;
    std::vector<unsigned char> valid;
};

double effective_sample_size(std::span<const double> log_weights);

// Ancestor indices from one uniform offset u in [0,1). Invalid entries carry
// log weight -inf. Equal weights map each path to itself.
std::vector<int> systematic_resample(std::span<const double> log_weights, double u);

// Returns the ESS before resampling; throws when no path is valid.
double resample(WeightedEnsemble& ens, double u);

struct NeemDiagnostics {
    long long bound_raises = 0;
    long long thinning_points = 0;
    long long bound_violations = 0;
    long long capped_paths = 0;
    long long path_steps = 0;
    double capped_fraction() const { return path_steps ? static_cast<double>(capped_paths) / path_steps : 0.0; }
};

MomentSeries neem_simulate(const OscillatorModel& model, const TimeGrid& grid, const PathState& x0,
                           const SamplerOptions& opt, NeemDiagnostics* diag = nullptr);

}  // namespace neem
