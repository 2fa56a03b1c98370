#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "neem/types.hpp"

namespace neem {

// Value and derivatives of the shift gamma_k for every channel, taken with
// respect to the current state while the frozen drift is held fixed.
struct GammaJet {
    Vec gamma;                      // n
    std::array<Vec, kMaxDof> d1;    // d1[k]  = d gamma_k / d x1        (m)
    std::array<Vec, kMaxDof> d2;    // d2[k]  = d gamma_k / d x2        (m)
    std::array<Mat, kMaxDof> d22;   // d22[k](i,j) = d2 gamma_k / dx2_i dx2_j
    std::array<Mat, kMaxDof> d12;   // d12[k](i,j) = d2 gamma_k / dx1_i dx2_j

    void reset(int m, int n);
};

enum class JetBlock { D1, D2, D22, D12 };

// An entry the model's derivation states is identically zero.
struct ZeroTerm {
    int channel;
    JetBlock block;
    int i;
    int j = 0;
};

using DriftFn = std::function<Vec(double, const PathState&)>;
using ForcingFn = std::function<Vec(double)>;
using DiffusionFn = std::function<Mat(double, const PathState&)>;
using JetFn = std::function<void(double, const PathState&, const Vec& frozen, GammaJet&)>;

struct OscillatorModel {
    std::string name;
    int dof = 1;
    int channels = 1;
    BigMat linear_drift;             // 2m x 2m, top rows [0 I]
    DriftFn nonlinear_drift;         // velocity rows only
    ForcingFn forcing;               // may be empty (autonomous)
    DiffusionFn diffusion;           // m x n
    bool state_dependent_diffusion = false;
    // Diffusion can reach zero on the state space, where gamma is unbounded.
    bool vanishing_diffusion = false;
    JetFn gamma_jet;                 // may be empty when nonlinear_drift is absent
    std::vector<ZeroTerm> zero_terms;

    bool has_nonlinear() const { return static_cast<bool>(nonlinear_drift); }
};

void check_model(const OscillatorModel& model);

PathState make_state(const OscillatorModel& model, const Vec& x1, const Vec& x2, double t = 0.0);

// Velocity-row linear contribution only (no nonlinear part, no forcing).
Vec linear_velocity(const OscillatorModel& model, const PathState& s);

Vec forcing_at(const OscillatorModel& model, double t);

Vec nonlinear_at(const OscillatorModel& model, double t, const PathState& s);

Mat diffusion_at(const OscillatorModel& model, double t, const PathState& s);

// Full first-order drift, 2m-vector (x2, g^l + g^nl + forcing).
BigVec drift(const OscillatorModel& model, double t, const PathState& s);

// Same as drift() without the nonlinear part.
BigVec drift_linear_part(const OscillatorModel& model, double t, const PathState& s);

// g^nl at the macro step start; held for the step.
Vec frozen_nonlinear(const OscillatorModel& model, double t_prev, const PathState& s_prev);

// Generic shift computed from the drift and diffusion closures:
// gamma = F^{-1} (g^nl(t,x) - frozen).
Vec gamma_direct(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen);

// Jet from the model closure, or all zeros for a linear model.
void gamma_jet(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen,
               GammaJet& out);

double jet_entry(const GammaJet& jet, int channel, JetBlock block, int i, int j);

// Finite-difference jet built from gamma_direct; h is the relative step.
void gamma_jet_fd(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen,
                  GammaJet& out, double h = 2e-3);

// Copy of the model with the sign of every d gamma / d x1 and d gamma / d x2
// entry flipped. Used to check that the derivative audit catches mutations.
OscillatorModel with_flipped_gamma_sign(const OscillatorModel& model);

// Copy of the model with the nonlinear drift removed.
OscillatorModel without_nonlinear(const OscillatorModel& model);

}  // namespace neem
