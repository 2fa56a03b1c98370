#include "neem/model.hpp"

#include <cmath>
#include <sstream>

namespace neem {

TimeGrid::TimeGrid(double t0_, double t_end_, int n, int n_sub)
    : t0(t0_), t_end(t_end_), macro_steps(n), substeps(n_sub) {
    if (!(t_end > t0) || n < 1 || n_sub < 1)
        throw ConfigError("time grid needs t_end > t0, N >= 1, n_sub >= 1");
}

void GammaJet::reset(int m, int n) {
    gamma = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
        d1[k] = Vec::Zero(m);
        d2[k] = Vec::Zero(m);
        d22[k] = Mat::Zero(m, m);
        d12[k] = Mat::Zero(m, m);
    }
}

namespace {

void require_finite(const Vec& v, const char* closure, double t) {
    if (!v.allFinite()) {
        std::ostringstream os;
        os << "non-finite output from " << closure << " at t=" << t;
        throw NumericError(os.str(), t);
    }
}

}  // namespace

void check_model(const OscillatorModel& model) {
    const int m = model.dof;
    if (m < 1 || m > kMaxDof) throw ConfigError("model dof out of range");
    if (model.channels < 1 || model.channels > kMaxDof) throw ConfigError("model channels out of range");
    if (model.linear_drift.rows() != 2 * m || model.linear_drift.cols() != 2 * m)
        throw ConfigError("linear drift must be 2m x 2m");
    if (!model.diffusion) throw ConfigError("model has no diffusion closure");
    if (model.has_nonlinear() && model.channels != m)
        throw ConfigError("the shift needs a square diffusion matrix (channels == dof)");
}

PathState make_state(const OscillatorModel& model, const Vec& x1, const Vec& x2, double t) {
    if (x1.size() != model.dof || x2.size() != model.dof)
        throw ConfigError("state dimension does not match model dof");
    PathState s;
    s.x1 = x1;
    s.x2 = x2;
    s.t = t;
    return s;
}

Vec linear_velocity(const OscillatorModel& model, const PathState& s) {
    const int m = model.dof;
    return model.linear_drift.block(m, 0, m, m) * s.x1 + model.linear_drift.block(m, m, m, m) * s.x2;
}

Vec forcing_at(const OscillatorModel& model, double t) {
    if (!model.forcing) return Vec::Zero(model.dof);
    Vec v = model.forcing(t);
    require_finite(v, "forcing", t);
    return v;
}

Vec nonlinear_at(const OscillatorModel& model, double t, const PathState& s) {
    if (!model.has_nonlinear()) return Vec::Zero(model.dof);
    Vec v = model.nonlinear_drift(t, s);
    require_finite(v, "nonlinear_drift", t);
    return v;
}

Mat diffusion_at(const OscillatorModel& model, double t, const PathState& s) {
    Mat f = model.diffusion(t, s);
    if (!f.allFinite()) throw NumericError("non-finite output from diffusion", t);
    return f;
}

BigVec drift_linear_part(const OscillatorModel& model, double t, const PathState& s) {
    const int m = model.dof;
    BigVec out(2 * m);
    out.head(m) = s.x2;
    out.tail(m) = linear_velocity(model, s);
    if (!out.allFinite()) throw NumericError("non-finite output from linear_drift", t);
    return out;
}

BigVec drift(const OscillatorModel& model, double t, const PathState& s) {
    BigVec out = drift_linear_part(model, t, s);
    const int m = model.dof;
    out.tail(m) += nonlinear_at(model, t, s) + forcing_at(model, t);
    return out;
}

Vec frozen_nonlinear(const OscillatorModel& model, double t_prev, const PathState& s_prev) {
    return nonlinear_at(model, t_prev, s_prev);
}

Vec gamma_direct(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen) {
    const int n = model.channels;
    if (!model.has_nonlinear()) return Vec::Zero(n);
    Vec diff = nonlinear_at(model, t, s) - frozen;
    Mat f = diffusion_at(model, t, s);
    if (f.rows() == f.cols() && f.isDiagonal()) {
        Vec g(n);
        for (int k = 0; k < n; ++k) {
            double fk = f(k, k);
            if (fk == 0.0) {
                if (diff(k) != 0.0) throw SingularShiftError("zero diffusion on a shifted channel", t);
                g(k) = 0.0;
            } else {
                g(k) = diff(k) / fk;
            }
        }
        return g;
    }
    Eigen::FullPivLU<Mat> lu(f);
    if (!lu.isInvertible()) throw SingularShiftError("diffusion matrix is singular", t);
    return lu.solve(diff);
}

void gamma_jet(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen,
               GammaJet& out) {
    if (!model.has_nonlinear() || !model.gamma_jet) {
        out.reset(model.dof, model.channels);
        if (model.has_nonlinear()) out.gamma = gamma_direct(model, t, s, frozen);
        return;
    }
    model.gamma_jet(t, s, frozen, out);
}

double jet_entry(const GammaJet& jet, int channel, JetBlock block, int i, int j) {
    switch (block) {
        case JetBlock::D1: return jet.d1[channel](i);
        case JetBlock::D2: return jet.d2[channel](i);
        case JetBlock::D22: return jet.d22[channel](i, j);
        case JetBlock::D12: return jet.d12[channel](i, j);
    }
    return 0.0;
}

void gamma_jet_fd(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen,
                  GammaJet& out, double h) {
    const int m = model.dof;
    const int n = model.channels;
    out.reset(m, n);
    out.gamma = gamma_direct(model, t, s, frozen);

    // coordinate c in [0, 2m): first m are x1, rest x2
    auto shifted = [&](int c, double d) {
        PathState p = s;
        if (c < m) p.x1(c) += d;
        else p.x2(c - m) += d;
        return p;
    };
    auto step_for = [&](int c, double base) {
        double x = c < m ? s.x1(c) : s.x2(c - m);
        return base * std::max(1.0, std::abs(x));
    };

    // Richardson-extrapolated central differences, truncation O(d^4)
    for (int i = 0; i < m; ++i) {
        for (int part = 0; part < 2; ++part) {
            int c = part * m + i;
            double d = step_for(c, h);
            auto central = [&](double e) {
                return Vec((gamma_direct(model, t, shifted(c, e), frozen) -
                            gamma_direct(model, t, shifted(c, -e), frozen)) / (2 * e));
            };
            Vec g = (4.0 * central(0.5 * d) - central(d)) / 3.0;
            for (int k = 0; k < n; ++k) (part == 0 ? out.d1[k] : out.d2[k])(i) = g(k);
        }
    }
    auto mixed = [&](int a, int b) {
        double da = step_for(a, h), db = step_for(b, h);
        auto at = [&](double ea, double eb) {
            PathState p = shifted(a, ea);
            if (b < m) p.x1(b) += eb;
            else p.x2(b - m) += eb;
            return gamma_direct(model, t, p, frozen);
        };
        auto central = [&](double ea, double eb) {
            return Vec((at(ea, eb) - at(ea, -eb) - at(-ea, eb) + at(-ea, -eb)) / (4 * ea * eb));
        };
        return Vec((4.0 * central(0.5 * da, 0.5 * db) - central(da, db)) / 3.0);
    };
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            Vec g22 = mixed(m + i, m + j);
            Vec g12 = mixed(i, m + j);
            for (int k = 0; k < n; ++k) {
                out.d22[k](i, j) = g22(k);
                out.d12[k](i, j) = g12(k);
            }
        }
    }
}

OscillatorModel with_flipped_gamma_sign(const OscillatorModel& model) {
    OscillatorModel out = model;
    if (!model.gamma_jet) return out;
    JetFn inner = model.gamma_jet;
    out.gamma_jet = [inner](double t, const PathState& s, const Vec& frozen, GammaJet& jet) {
        inner(t, s, frozen, jet);
        for (int k = 0; k < static_cast<int>(jet.gamma.size()); ++k) {
            jet.d1[k] = -jet.d1[k];
            jet.d2[k] = -jet.d2[k];
        }
    };
    out.name = model.name + "+flipped";
    return out;
}

OscillatorModel without_nonlinear(const OscillatorModel& model) {
    OscillatorModel out = model;
    out.nonlinear_drift = nullptr;
    out.gamma_jet = nullptr;
    return out;
}

}  // namespace neem
