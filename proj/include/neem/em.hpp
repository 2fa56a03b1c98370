#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "neem/brownian.hpp"
#include "neem/model.hpp"
#include "neem/stats.hpp"

namespace neem {

enum class DriftMode { Classical, Frozen };

// One explicit step. Frozen mode uses `frozen` in place of g^nl(t, s).
PathState em_step(const OscillatorModel& model, const PathState& s, double dt, const Vec& dB, DriftMode mode,
                  const Vec& frozen = Vec());

// Steps through one panel; states has substeps+1 entries on return.
void em_substeps(const OscillatorModel& model, const PathState& start, const IncrementPanel& panel, DriftMode mode,
                 const Vec& frozen, std::vector<PathState>& states);

// Whole path, returning the states at the macro nodes (N+1 entries).
// In frozen mode g^nl is re-frozen at each macro node.
std::vector<PathState> em_path(const OscillatorModel& model, const TimeGrid& grid, std::uint64_t seed,
                               std::uint32_t path, DriftMode mode, const PathState& x0);

// Second moments of every state component at one node, valid paths only.
std::vector<Moment> node_moments(const std::vector<PathState>& states, const std::vector<unsigned char>& valid,
                                 int dof);

struct EnsembleOptions {
    int ensemble = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    int record_every = 1;   // record every k-th macro node
};

// Ensemble of EM paths; moments at the recorded macro nodes.
MomentSeries simulate_em(const OscillatorModel& model, const TimeGrid& grid, const PathState& x0,
                         const EnsembleOptions& opt, DriftMode mode = DriftMode::Classical);

// Fine-step classical EM oracle sampled at the coarse grid's macro nodes.
MomentSeries reference_oracle(const OscillatorModel& model, const TimeGrid& coarse, double dt_fine,
                              const PathState& x0, const EnsembleOptions& opt);

// Strong error E|X_T - X_exact(T)| for each step size and the fitted order.
struct StrongOrderResult {
    std::vector<double> dts;
    std::vector<double> errors;
    LineFit fit;
};

// exact(x0, T, B_T) gives the closed-form pathwise solution.
using ExactSolution = std::function<double(double x0, double T, double BT)>;

// Scalar problems embedded in the velocity row of a one-dof model.
StrongOrderResult strong_order_estimate(const OscillatorModel& model, const ExactSolution& exact, double x0,
                                        double T, const std::vector<double>& dts, int ensemble, std::uint64_t seed);

}  // namespace neem
