#include "neem/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace neem {

Bounds estimate_bounds(std::span<const double> phi, double dt, double pad, BoundMode mode) {
    double lo = *std::min_element(phi.begin(), phi.end());
    double hi = *std::max_element(phi.begin(), phi.end());
    double margin = pad * (hi - lo);
    Bounds b;
    if (mode == BoundMode::Shift) {
        b.lower = lo - margin;
        b.upper = hi + margin;
    } else {
        b.lower = 0.0;
        b.upper = std::max(hi + margin, 0.0);
    }
    double span = b.upper - b.lower;
    b.rate = std::max(1.0 / dt, span);
    b.raised = span > 1.0 / dt;
    return b;
}

Normalized bound_normalize(double phi_value, double lower, double upper, double dt, double dt_sub) {
    if (!std::isfinite(phi_value)) throw NumericError("non-finite phi");
    Normalized n;
    n.phi_tilde = phi_value - lower;
    n.log_compensation = -lower * dt_sub;
    double span = std::max(upper, phi_value) - lower;
    n.rate = std::max(1.0 / dt, span);
    n.raised = span > 1.0 / dt;
    return n;
}

bool accept_thinning(const std::function<double(double)>& phi_tilde, double t0, double t1, double rate,
                     StreamKey key, ThinningStats* stats) {
    double u = t0;
    for (std::uint32_t j = 0;; ++j) {
        key.b = j;
        auto r = uniform_pair(key);
        u += -std::log(r[0]) / rate;
        if (u >= t1) return true;
        double v = r[1] * rate;
        double p = phi_tilde(u);
        if (!std::isfinite(p)) throw NumericError("non-finite phi at a thinning point", u);
        if (stats) {
            ++stats->points;
            if (p < 0.0 || p > rate) ++stats->violations;
        }
        if (v < p) return false;
    }
}

PhiEval resolve_eval(const OscillatorModel& model, PhiEval eval) {
    if (eval != PhiEval::Auto) return eval;
    return model.vanishing_diffusion ? PhiEval::Discrete : PhiEval::Bridge;
}

void discrete_phi(const OscillatorModel& model, const std::vector<PathState>& sub, const IncrementPanel& panel,
                  const Vec& frozen, double h, Eigen::MatrixXd& gammas, std::vector<double>& phi) {
    const int steps = static_cast<int>(sub.size()) - 1;
    gammas.resize(panel.channels, steps + 1);
    for (int r = 0; r <= steps; ++r) gammas.col(r) = gamma_direct(model, sub[r].t, sub[r], frozen);
    phi.resize(steps);
    for (int r = 0; r < steps; ++r) {
        double v = 0.0;
        for (int k = 0; k < panel.channels; ++k) {
            double g0 = gammas(k, r), g1 = gammas(k, r + 1);
            v += panel.cumulative(k, r + 1) * (g1 - g0) / h + 0.5 * g0 * g0;
        }
        if (!std::isfinite(v)) throw NumericError("non-finite phi on the sub-grid", sub[r].t);
        phi[r] = v;
    }
}

namespace {

struct Scratch {
    IncrementPanel panel;
    std::vector<PathState> sub;
    std::vector<double> phi;
    Eigen::MatrixXd gammas;
};

double discrete_sum(const std::vector<double>& phi, double h) {
    return -h * pairwise_sum(phi);
}

// phi on the sub-nodes of a proposal.
void node_phi(GirsanovEvaluator& ev, const IncrementPanel& panel, const std::vector<PathState>& sub,
              const Vec& frozen, std::vector<double>& out) {
    out.resize(sub.size());
    Vec b(panel.channels);
    for (std::size_t r = 0; r < sub.size(); ++r) {
        b = panel.cumulative.col(static_cast<Eigen::Index>(r));
        out[r] = ev.eval(sub[r].t, sub[r], frozen, b).phi;
        if (!std::isfinite(out[r])) throw NumericError("non-finite phi on the sub-grid", sub[r].t);
    }
}

// Euler interpolant inside sub-interval l, driven by the bridge value bu.
PathState interpolate(const OscillatorModel& model, const std::vector<PathState>& sub, const IncrementPanel& panel,
                      const Vec& frozen, int l, double u, const Vec& bu) {
    const PathState& s = sub[l];
    double tau = u - s.t;
    Vec acc = linear_velocity(model, s) + forcing_at(model, s.t) + frozen;
    Mat f = diffusion_at(model, s.t, s);
    PathState x;
    x.x1 = s.x1 + s.x2 * tau;
    x.x2 = s.x2 + acc * tau + f * (bu - panel.cumulative.col(l).head(panel.channels));
    x.t = u;
    return x;
}

double factorial_inverse(int k) {
    double v = 1.0;
    for (int i = 2; i <= k; ++i) v /= i;
    return v;
}

PathStep path_step(const OscillatorModel& model, const TimeGrid& grid, int macro, std::uint32_t path,
                   const PathState& start, const SamplerOptions& opt, Scratch& sc) {
    const int n = model.channels;
    const double dt = grid.dt();
    const double h = grid.dt_sub();
    const double t0 = grid.node(macro);
    const double t1 = grid.node(macro + 1);
    const std::uint64_t seed = opt.base.seed;
    PathStep out;
    Vec frozen = frozen_nonlinear(model, t0, start);
    GirsanovEvaluator ev(model, opt.form);
    const bool discrete = resolve_eval(model, opt.eval) == PhiEval::Discrete;
    auto evaluate = [&] {
        if (discrete) discrete_phi(model, sc.sub, sc.panel, frozen, h, sc.gammas, sc.phi);
        else node_phi(ev, sc.panel, sc.sub, frozen, sc.phi);
    };
    auto integral = [&] { return discrete ? discrete_sum(sc.phi, h) : lambda2_log_integral(sc.phi, h); };

    for (int trial = 0; trial < opt.max_trials; ++trial) {
        ++out.trials;
        fill_panel(sc.panel, grid, macro, path, seed, n, static_cast<std::uint32_t>(trial), Stream::Increment);
        em_substeps(model, start, sc.panel, DriftMode::Frozen, frozen, sc.sub);
        evaluate();
        Bounds bd = estimate_bounds(sc.phi, dt, opt.pad, opt.bound);
        if (bd.raised) ++out.bound_raises;

        bool ok = true;
        if (opt.accept == AcceptMode::Thinning) {
            BridgeCursor cursor(sc.panel);
            Vec bu(n);
            auto phi_tilde = [&](double u) {
                if (discrete) {
                    int l = std::clamp(static_cast<int>((u - t0) / h), 0, grid.substeps - 1);
                    return sc.phi[l] - bd.lower;
                }
                int l = cursor.next(u, bu);
                PathState xu = interpolate(model, sc.sub, sc.panel, frozen, l, u, bu);
                return ev.eval(u, xu, frozen, bu).phi - bd.lower;
            };
            StreamKey key;
            key.seed = seed;
            key.path = path;
            key.stream = Stream::Thinning;
            key.trial = static_cast<std::uint32_t>(trial);
            key.a = static_cast<std::uint32_t>(macro);
            ok = accept_thinning(phi_tilde, t0, t1, bd.rate, key, &out.thinning);
        } else if (opt.accept == AcceptMode::Series) {
            StreamKey key;
            key.seed = seed;
            key.path = path;
            key.stream = Stream::Series;
            key.trial = static_cast<std::uint32_t>(trial);
            key.a = static_cast<std::uint32_t>(macro);
            key.b = 0;
            double w = uniform01(key);
            for (int k = 1; k <= grid.substeps; ++k) {
                key.b = static_cast<std::uint32_t>(k);
                auto r = uniform_pair(key);
                double u = t0 + r[0] * dt;
                double v = r[1] / dt;
                int l = std::min(static_cast<int>((u - t0) / h), grid.substeps - 1);
                double p;
                if (discrete) {
                    p = sc.phi[l] - bd.lower;
                } else {
                    Vec bu = value_at(sc.panel, u);
                    PathState xu = interpolate(model, sc.sub, sc.panel, frozen, l, u, bu);
                    p = ev.eval(u, xu, frozen, bu).phi - bd.lower;
                }
                ++out.thinning.points;
                if (p < v || w > factorial_inverse(k)) {
                    ok = (k % 2 == 0);
                    break;
                }
            }
        }
        if (!ok) continue;

        Vec b_end = sc.panel.cumulative.col(grid.substeps);
        double log_l1;
        if (discrete) {
            log_l1 = sc.gammas.col(grid.substeps).dot(b_end);
        } else {
            Vec b_start = Vec::Zero(n);
            log_l1 = ev.boundary(t1, sc.sub.back(), frozen, b_end) - ev.boundary(t0, start, frozen, b_start);
        }
        out.log_weight = log_l1;
        if (opt.accept == AcceptMode::Trapezoid) out.log_weight += integral();
        else out.log_weight += -bd.lower * dt;
        out.end = sc.sub.back();
        out.end.t = t1;
        out.accepted = true;
        break;
    }
    if (!out.accepted) return out;

    if (opt.normalize && opt.accept != AcceptMode::Trapezoid) {
        fill_panel(sc.panel, grid, macro, path, seed, n, 0, Stream::Normalizer);
        em_substeps(model, start, sc.panel, DriftMode::Frozen, frozen, sc.sub);
        evaluate();
        Bounds be = estimate_bounds(sc.phi, dt, opt.pad, opt.bound);
        out.log_weight += integral() + be.lower * dt;
    }
    if (!std::isfinite(out.log_weight)) out.accepted = false;
    return out;
}

}  // namespace

PathStep neem_path_step(const OscillatorModel& model, const TimeGrid& grid, int macro_index, std::uint32_t path,
                        const PathState& start, const SamplerOptions& opt) {
    Scratch sc;
    return path_step(model, grid, macro_index, path, start, opt, sc);
}

double effective_sample_size(std::span<const double> lw) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : lw) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return 0.0;
    std::vector<double> w(lw.size()), w2(lw.size());
    for (std::size_t i = 0; i < lw.size(); ++i) {
        w[i] = std::isfinite(lw[i]) ? std::exp(lw[i] - mx) : 0.0;
        w2[i] = w[i] * w[i];
    }
    double s = pairwise_sum(w);
    return s * s / pairwise_sum(w2);
}

std::vector<int> systematic_resample(std::span<const double> lw, double u) {
    const int n = static_cast<int>(lw.size());
    std::vector<int> anc(n);
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (double v : lw) {
        mx = std::max(mx, v);
        mn = std::min(mn, v);
    }
    if (!std::isfinite(mx)) throw NumericError("no valid path left to resample");
    if (mn == mx) {
        for (int i = 0; i < n; ++i) anc[i] = i;
        return anc;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = std::isfinite(lw[i]) ? std::exp(lw[i] - mx) : 0.0;
    double total = pairwise_sum(w);
    double cum = w[0] / total;
    int j = 0;
    for (int i = 0; i < n; ++i) {
        double target = (u + i) / n;
        while (cum <= target && j < n - 1) {
            ++j;
            cum += w[j] / total;
        }
        // skip zero-weight entries reached through rounding
        while (w[j] == 0.0 && j < n - 1) {
            ++j;
            cum += w[j] / total;
        }
        anc[i] = j;
    }
    return anc;
}

double resample(WeightedEnsemble& ens, double u) {
    std::vector<double> lw = ens.log_weights;
    for (std::size_t i = 0; i < lw.size(); ++i)
        if (!ens.valid[i]) lw[i] = -std::numeric_limits<double>::infinity();
    double ess = effective_sample_size(lw);
    std::vector<int> anc = systematic_resample(lw, u);
    std::vector<PathState> next(anc.size());
    for (std::size_t i = 0; i < anc.size(); ++i) next[i] = ens.states[anc[i]];
    ens.states = std::move(next);
    std::fill(ens.log_weights.begin(), ens.log_weights.end(), 0.0);
    std::fill(ens.valid.begin(), ens.valid.end(), 1);
    return ess;
}

MomentSeries neem_simulate(const OscillatorModel& model, const TimeGrid& grid, const PathState& x0,
                           const SamplerOptions& opt, NeemDiagnostics* diag) {
    check_model(model);
    const int np = opt.base.ensemble;
    if (np < 2) throw ConfigError("ensemble needs at least two paths");
    if (opt.max_trials < 1) throw ConfigError("max_trials must be positive");
    MomentSeries out;
    out.dof = model.dof;
    out.ensemble = np;
    WeightedEnsemble ens;
    ens.states.assign(np, x0);
    for (auto& s : ens.states) s.t = grid.t0;
    ens.log_weights.assign(np, 0.0);
    ens.valid.assign(np, 1);
    out.add_node(grid.t0, node_moments(ens.states, ens.valid, model.dof), np);
    NeemDiagnostics local;
    std::vector<PathStep> res(np);

    for (int i = 0; i < grid.macro_steps; ++i) {
        auto t_start = std::chrono::steady_clock::now();
#pragma omp parallel num_threads(opt.base.threads)
        {
            Scratch sc;
#pragma omp for schedule(static)
            for (int p = 0; p < np; ++p) {
                try {
                    res[p] = path_step(model, grid, i, static_cast<std::uint32_t>(p), ens.states[p], opt, sc);
                } catch (const NumericError&) {
                    res[p] = PathStep{};
                    res[p].trials = 1;
                }
            }
        }
        AcceptanceRecord rec;
        rec.macro_index = i;
        rec.t = grid.node(i + 1);
        int capped = 0;
        for (int p = 0; p < np; ++p) {
            const PathStep& r = res[p];
            rec.trials += r.trials;
            rec.accepted += r.accepted ? 1 : 0;
            local.bound_raises += r.bound_raises;
            local.thinning_points += r.thinning.points;
            local.bound_violations += r.thinning.violations;
            if (!r.accepted) {
                ++capped;
                ens.valid[p] = 0;
                ens.log_weights[p] = -std::numeric_limits<double>::infinity();
            } else {
                ens.states[p] = r.end;
                ens.log_weights[p] = r.log_weight;
                ens.valid[p] = 1;
            }
        }
        local.capped_paths += capped;
        local.path_steps += np;
        if (capped == np) throw NumericError("every path failed in one macro step", grid.node(i + 1));
        StreamKey key;
        key.seed = opt.base.seed;
        key.path = kEnsemblePath;
        key.stream = Stream::Resample;
        key.a = static_cast<std::uint32_t>(i);
        double ess = resample(ens, uniform01(key));
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        out.acceptance.push_back(rec);
        out.ess.push_back(ess);
        out.step_seconds.push_back(secs);
        out.capped.push_back(capped);
        if ((i + 1) % opt.base.record_every == 0 || i + 1 == grid.macro_steps)
            out.add_node(grid.node(i + 1), node_moments(ens.states, ens.valid, model.dof), np);
    }
    if (diag) *diag = local;
    return out;
}

}  // namespace neem
