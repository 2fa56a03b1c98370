#include "neem/brownian.hpp"

#include <cmath>
#include <numbers>

namespace neem {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open01(std::uint32_t hi, std::uint32_t lo) {
    std::uint64_t x = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

PhiloxCounter random_block(const StreamKey& key) {
    PhiloxCounter ctr = {key.path, (static_cast<std::uint32_t>(key.stream) << 24) | (key.trial & 0xFFFFFFu), key.a,
                         key.b};
    PhiloxKey k = {static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
    return philox4x32(ctr, k);
}

std::array<double, 2> uniform_pair(const StreamKey& key) {
    PhiloxCounter r = random_block(key);
    return {to_open01(r[0], r[1]), to_open01(r[2], r[3])};
}

double uniform01(const StreamKey& key) { return uniform_pair(key)[0]; }

double standard_normal(const StreamKey& key) {
    auto u = uniform_pair(key);
    return std::sqrt(-2.0 * std::log(u[0])) * std::cos(2.0 * std::numbers::pi * u[1]);
}

StreamKey increment_key(std::uint64_t seed, std::uint32_t path, std::uint32_t trial, std::uint32_t global_sub,
                        int channel, Stream stream) {
    StreamKey k;
    k.seed = seed;
    k.path = path;
    k.stream = stream;
    k.trial = trial;
    k.a = global_sub;
    k.b = static_cast<std::uint32_t>(channel);
    return k;
}

void fill_panel(IncrementPanel& p, const TimeGrid& grid, int macro_index, std::uint32_t path, std::uint64_t seed,
                int channels, std::uint32_t trial, Stream stream) {
    if (macro_index < 0 || macro_index >= grid.macro_steps) throw std::out_of_range("macro index outside grid");
    const int ns = grid.substeps;
    p.t_start = grid.node(macro_index);
    p.dt_sub = grid.dt_sub();
    p.channels = channels;
    p.substeps = ns;
    p.seed = seed;
    p.path = path;
    p.macro = static_cast<std::uint32_t>(macro_index);
    p.trial = trial;
    p.stream = stream;
    p.increments.resize(channels, ns);
    p.cumulative.resize(channels, ns + 1);
    const double sd = std::sqrt(p.dt_sub);
    const auto g0 = static_cast<std::uint32_t>(macro_index) * static_cast<std::uint32_t>(ns);
    for (int k = 0; k < channels; ++k) {
        p.cumulative(k, 0) = 0.0;
        for (int r = 0; r < ns; ++r) {
            double z = standard_normal(increment_key(seed, path, trial, g0 + r, k, stream));
            p.increments(k, r) = sd * z;
            p.cumulative(k, r + 1) = p.cumulative(k, r) + p.increments(k, r);
        }
    }
}

IncrementPanel sample_panel(const TimeGrid& grid, int macro_index, std::uint32_t path, std::uint64_t seed,
                            int channels, std::uint32_t trial, Stream stream) {
    IncrementPanel p;
    fill_panel(p, grid, macro_index, path, seed, channels, trial, stream);
    return p;
}

std::uint32_t quantize_offset(const IncrementPanel& panel, double u) {
    double frac = (u - panel.t_start) / (panel.t_end() - panel.t_start);
    frac = std::min(std::max(frac, 0.0), 1.0);
    return static_cast<std::uint32_t>(std::min(frac * 4294967296.0, 4294967295.0));
}

namespace {

int locate(const IncrementPanel& panel, double u) {
    const double eps = 1e-12 * std::max(1.0, std::abs(panel.t_end()));
    if (u < panel.t_start - eps || u > panel.t_end() + eps) throw std::out_of_range("time outside panel interval");
    int l = static_cast<int>(std::floor((u - panel.t_start) / panel.dt_sub));
    return std::min(std::max(l, 0), panel.substeps - 1);
}

double bridge_draw(const IncrementPanel& panel, double u, int k) {
    StreamKey key;
    key.seed = panel.seed;
    key.path = panel.path;
    key.stream = Stream::Bridge;
    key.trial = panel.trial;
    key.a = panel.macro;
    key.b = quantize_offset(panel, u) ^ (static_cast<std::uint32_t>(k) * 0x9E3779B9u);
    return standard_normal(key);
}

}  // namespace

Vec bridge_mean(const IncrementPanel& panel, double u) {
    int l = locate(panel, u);
    double tl = panel.t_start + l * panel.dt_sub;
    double w = (u - tl) / panel.dt_sub;
    Vec out(panel.channels);
    for (int k = 0; k < panel.channels; ++k)
        out(k) = (1.0 - w) * panel.cumulative(k, l) + w * panel.cumulative(k, l + 1);
    return out;
}

Vec value_at(const IncrementPanel& panel, double u) {
    int l = locate(panel, u);
    double tl = panel.t_start + l * panel.dt_sub;
    double tr = tl + panel.dt_sub;
    Vec out(panel.channels);
    // times within rounding of a sub-node take the stored value
    double pos = (u - panel.t_start) / panel.dt_sub;
    double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= 1e-9) {
        int node = std::min(std::max(static_cast<int>(nearest), 0), panel.substeps);
        for (int k = 0; k < panel.channels; ++k) out(k) = panel.cumulative(k, node);
        return out;
    }
    double s = u - tl;
    if (s <= 0.0 || u >= tr) {
        int node = s <= 0.0 ? l : l + 1;
        for (int k = 0; k < panel.channels; ++k) out(k) = panel.cumulative(k, node);
        return out;
    }
    double var = s * (tr - u) / panel.dt_sub;
    double w = s / panel.dt_sub;
    for (int k = 0; k < panel.channels; ++k) {
        double mean = (1.0 - w) * panel.cumulative(k, l) + w * panel.cumulative(k, l + 1);
        out(k) = mean + std::sqrt(var) * bridge_draw(panel, u, k);
    }
    return out;
}

BridgeCursor::BridgeCursor(const IncrementPanel& panel) : panel_(panel) {}

int BridgeCursor::next(double u, Vec& out) {
    int l = locate(panel_, u);
    double tl = panel_.t_start + l * panel_.dt_sub;
    double tr = tl + panel_.dt_sub;
    if (l != interval_) {
        interval_ = l;
        t_left_ = tl;
        b_left_ = panel_.cumulative.col(l).head(panel_.channels);
    }
    out.resize(panel_.channels);
    double s = u - t_left_;
    if (s <= 0.0) {
        out = b_left_;
        return l;
    }
    if (u >= tr) {
        for (int k = 0; k < panel_.channels; ++k) out(k) = panel_.cumulative(k, l + 1);
    } else {
        double span = tr - t_left_;
        double w = s / span;
        double sd = std::sqrt(s * (tr - u) / span);
        for (int k = 0; k < panel_.channels; ++k) {
            double mean = (1.0 - w) * b_left_(k) + w * panel_.cumulative(k, l + 1);
            out(k) = mean + sd * bridge_draw(panel_, u, k);
        }
    }
    t_left_ = u;
    b_left_ = out;
    return l;
}

}  // namespace neem
