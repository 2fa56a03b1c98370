#include "neem/em.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace neem {

PathState em_step(const OscillatorModel& model, const PathState& s, double dt, const Vec& dB, DriftMode mode,
                  const Vec& frozen) {
    if (!(dt > 0)) throw ConfigError("em step needs dt > 0");
    PathState out;
    Vec acc = linear_velocity(model, s) + forcing_at(model, s.t);
    if (mode == DriftMode::Classical) acc += nonlinear_at(model, s.t, s);
    else if (frozen.size() == model.dof) acc += frozen;
    Mat f = diffusion_at(model, s.t, s);
    out.x1 = s.x1 + s.x2 * dt;
    out.x2 = s.x2 + acc * dt + f * dB;
    out.t = s.t + dt;
    if (!out.finite()) {
        std::ostringstream os;
        os << "em step produced a non-finite state at t=" << s.t;
        throw NumericError(os.str(), s.t);
    }
    return out;
}

void em_substeps(const OscillatorModel& model, const PathState& start, const IncrementPanel& panel, DriftMode mode,
                 const Vec& frozen, std::vector<PathState>& states) {
    states.resize(panel.substeps + 1);
    states[0] = start;
    Vec dB(panel.channels);
    for (int r = 0; r < panel.substeps; ++r) {
        dB = panel.increments.col(r);
        states[r + 1] = em_step(model, states[r], panel.dt_sub, dB, mode, frozen);
        // keep node times exact rather than accumulated
        states[r + 1].t = panel.t_start + (r + 1) * panel.dt_sub;
    }
}

std::vector<PathState> em_path(const OscillatorModel& model, const TimeGrid& grid, std::uint64_t seed,
                               std::uint32_t path, DriftMode mode, const PathState& x0) {
    std::vector<PathState> nodes;
    nodes.reserve(grid.macro_steps + 1);
    PathState s = x0;
    s.t = grid.t0;
    nodes.push_back(s);
    IncrementPanel panel;
    std::vector<PathState> sub;
    for (int i = 0; i < grid.macro_steps; ++i) {
        fill_panel(panel, grid, i, path, seed, model.channels, 0, Stream::Increment);
        Vec frozen = mode == DriftMode::Frozen ? frozen_nonlinear(model, s.t, s) : Vec();
        em_substeps(model, s, panel, mode, frozen, sub);
        s = sub.back();
        s.t = grid.node(i + 1);
        nodes.push_back(s);
    }
    return nodes;
}

std::vector<Moment> node_moments(const std::vector<PathState>& states, const std::vector<unsigned char>& valid,
                                 int dof) {
    std::vector<Moment> row;
    std::vector<double> xs(states.size());
    for (int d = 0; d < dof; ++d) {
        for (int part = 0; part < 2; ++part) {
            for (std::size_t p = 0; p < states.size(); ++p) xs[p] = part == 0 ? states[p].x1(d) : states[p].x2(d);
            row.push_back(second_moment(xs, valid));
        }
    }
    return row;
}

namespace {

int count_valid(const std::vector<unsigned char>& valid) {
    int c = 0;
    for (auto v : valid) c += v ? 1 : 0;
    return c;
}

}  // namespace

MomentSeries simulate_em(const OscillatorModel& model, const TimeGrid& grid, const PathState& x0,
                         const EnsembleOptions& opt, DriftMode mode) {
    check_model(model);
    if (opt.ensemble < 2) throw ConfigError("ensemble needs at least two paths");
    const int np = opt.ensemble;
    MomentSeries out;
    out.dof = model.dof;
    out.ensemble = np;
    std::vector<PathState> states(np, x0);
    for (auto& s : states) s.t = grid.t0;
    std::vector<unsigned char> valid(np, 1);
    out.add_node(grid.t0, node_moments(states, valid, model.dof), np);

    for (int i = 0; i < grid.macro_steps; ++i) {
        auto t_start = std::chrono::steady_clock::now();
#pragma omp parallel num_threads(opt.threads)
        {
            IncrementPanel panel;
            std::vector<PathState> sub;
#pragma omp for schedule(static)
            for (int p = 0; p < np; ++p) {
                if (!valid[p]) continue;
                try {
                    fill_panel(panel, grid, i, static_cast<std::uint32_t>(p), opt.seed, model.channels, 0,
                               Stream::Increment);
                    PathState& s = states[p];
                    Vec frozen = mode == DriftMode::Frozen ? frozen_nonlinear(model, s.t, s) : Vec();
                    em_substeps(model, s, panel, mode, frozen, sub);
                    s = sub.back();
                    s.t = grid.node(i + 1);
                } catch (const NumericError&) {
                    valid[p] = 0;
                }
            }
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        int nvalid = count_valid(valid);
        AcceptanceRecord rec;
        rec.macro_index = i;
        rec.t = grid.node(i + 1);
        rec.trials = nvalid;
        rec.accepted = nvalid;
        out.acceptance.push_back(rec);
        out.ess.push_back(static_cast<double>(nvalid));
        out.step_seconds.push_back(secs);
        out.capped.push_back(np - nvalid);
        if ((i + 1) % opt.record_every == 0 || i + 1 == grid.macro_steps) {
            if (nvalid < 2) throw NumericError("fewer than two valid paths remain", grid.node(i + 1));
            out.add_node(grid.node(i + 1), node_moments(states, valid, model.dof), nvalid);
        }
    }
    return out;
}

MomentSeries reference_oracle(const OscillatorModel& model, const TimeGrid& coarse, double dt_fine,
                              const PathState& x0, const EnsembleOptions& opt) {
    double ratio = coarse.dt() / dt_fine;
    int stride = static_cast<int>(std::lround(ratio));
    if (stride < 1 || std::abs(ratio - stride) > 1e-9 * ratio)
        throw ConfigError("oracle step must divide the coarse macro step");
    TimeGrid fine(coarse.t0, coarse.t_end, coarse.macro_steps * stride, 1);
    EnsembleOptions o = opt;
    o.record_every = stride * std::max(1, opt.record_every);
    return simulate_em(model, fine, x0, o, DriftMode::Classical);
}

StrongOrderResult strong_order_estimate(const OscillatorModel& model, const ExactSolution& exact, double x0,
                                        double T, const std::vector<double>& dts, int ensemble,
                                        std::uint64_t seed) {
    if (dts.size() < 3) throw ConfigError("strong order estimate needs at least three step sizes");
    if (model.dof != 1 || model.channels != 1) throw ConfigError("strong order estimate expects a scalar model");
    double dt_min = *std::min_element(dts.begin(), dts.end());
    int n_fine = static_cast<int>(std::lround(T / dt_min));
    TimeGrid fine(0.0, T, n_fine, 1);
    StrongOrderResult res;
    res.dts = dts;
    std::vector<std::vector<double>> errs(dts.size(), std::vector<double>(ensemble));
    for (int p = 0; p < ensemble; ++p) {
        IncrementPanel panel;
        std::vector<double> dw(n_fine);
        double bt = 0.0;
        for (int i = 0; i < n_fine; ++i) {
            fill_panel(panel, fine, i, static_cast<std::uint32_t>(p), seed, 1, 0, Stream::Increment);
            dw[i] = panel.increments(0, 0);
            bt += dw[i];
        }
        double xe = exact(x0, T, bt);
        for (std::size_t j = 0; j < dts.size(); ++j) {
            int stride = static_cast<int>(std::lround(dts[j] / dt_min));
            PathState s;
            s.x1 = Vec::Zero(1);
            s.x2 = Vec::Constant(1, x0);
            s.t = 0.0;
            Vec db(1);
            for (int i = 0; i < n_fine; i += stride) {
                double acc = 0.0;
                for (int q = 0; q < stride; ++q) acc += dw[i + q];
                db(0) = acc;
                s = em_step(model, s, dts[j], db, DriftMode::Classical);
            }
            errs[j][p] = std::abs(s.x2(0) - xe);
        }
    }
    for (std::size_t j = 0; j < dts.size(); ++j) res.errors.push_back(pairwise_sum(errs[j]) / ensemble);
    res.fit = convergence_fit(res.dts, res.errors);
    return res;
}

}  // namespace neem
