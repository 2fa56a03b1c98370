#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "neem/types.hpp"

namespace neem {

// Philox4x32-10 counter-based generator.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

enum class Stream : std::uint32_t {
    Increment = 1,
    Bridge = 2,
    Thinning = 3,
    Resample = 4,
    Normalizer = 5,
    Series = 6,
    Synthetic = 7,
};

// Addresses one block of randomness. Every draw in the library is a pure
// function of (seed, path, stream, trial, a, b).
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint32_t path = 0;
    Stream stream = Stream::Increment;
    std::uint32_t trial = 0;  // < 2^24
    std::uint32_t a = 0;
    std::uint32_t b = 0;
};

PhiloxCounter random_block(const StreamKey& key);

// Two uniforms on the open interval (0,1), 53 bits each.
std::array<double, 2> uniform_pair(const StreamKey& key);

double uniform01(const StreamKey& key);

// Box-Muller; one standard normal per key.
double standard_normal(const StreamKey& key);

// Reserved path id for ensemble-wide draws (resampling offsets).
inline constexpr std::uint32_t kEnsemblePath = 0xFFFFFFFFu;

// Increments for one macro step of one path: rows are channels, columns substeps.
struct IncrementPanel {
    double t_start = 0.0;
    double dt_sub = 0.0;
    int channels = 0;
    int substeps = 0;
    std::uint64_t seed = 0;
    std::uint32_t path = 0;
    std::uint32_t macro = 0;
    std::uint32_t trial = 0;
    Stream stream = Stream::Increment;
    Eigen::MatrixXd increments;   // channels x substeps
    Eigen::MatrixXd cumulative;   // channels x (substeps + 1), column 0 is zero

    double t_end() const { return t_start + dt_sub * substeps; }
};

// Key of the increment for channel k on global substep index g.
StreamKey increment_key(std::uint64_t seed, std::uint32_t path, std::uint32_t trial, std::uint32_t global_sub,
                        int channel, Stream stream = Stream::Increment);

IncrementPanel sample_panel(const TimeGrid& grid, int macro_index, std::uint32_t path, std::uint64_t seed,
                            int channels, std::uint32_t trial = 0, Stream stream = Stream::Increment);

// In-place fill of an existing panel; avoids reallocation in hot loops.
void fill_panel(IncrementPanel& panel, const TimeGrid& grid, int macro_index, std::uint32_t path,
                std::uint64_t seed, int channels, std::uint32_t trial, Stream stream);

// Quantized offset of u inside the panel's macro interval.
std::uint32_t quantize_offset(const IncrementPanel& panel, double u);

// Brownian value at u, conditioned only on the two enclosing sub-nodes.
Vec value_at(const IncrementPanel& panel, double u);

// Conditional mean at u (linear interpolation of the enclosing nodes).
Vec bridge_mean(const IncrementPanel& panel, double u);

// Sequential bridge sampling for increasing times u_1 < u_2 < ... within one
// panel. Each draw conditions on the previous draw and the right sub-node, so
// several points in one sub-interval are jointly consistent. The first draw in
// a sub-interval coincides with value_at.
class BridgeCursor {
public:
    explicit BridgeCursor(const IncrementPanel& panel);
    // Returns the sub-interval index l with u in [t_l, t_{l+1}], and writes B(u).
    int next(double u, Vec& out);

private:
    const IncrementPanel& panel_;
    int interval_ = -1;
    double t_left_ = 0.0;
    Vec b_left_;
};

}  // namespace neem
