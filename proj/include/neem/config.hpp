#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "neem/models.hpp"
#include "neem/sampler.hpp"

namespace neem {

using KeyValues = std::map<std::string, std::string>;

// "key = value" lines; '#' starts a comment. Later keys win.
KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::string& path);

enum class Scheme { Em, Frozen, Neem };

struct RunConfig {
    std::string model = "rvp";
    Scheme scheme = Scheme::Neem;
    double dt = 0.01;
    double t_end = 40.0;
    int n_sub = 10;
    int ensemble = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    int max_trials = 1000;
    PhiForm form = PhiForm::Ito;
    AcceptMode accept = AcceptMode::Thinning;
    PhiEval eval = PhiEval::Auto;
    BoundMode bound = BoundMode::Shift;
    bool normalize = true;
    double oracle_dt = 1e-3;
    int oracle_ensemble = 2000;
    std::string x1_0 = "0.01";
    std::string x2_0 = "0.01";
    RvpParams rvp;
    DvpParams dvp;
    TwoDofParams two_dof;

    KeyValues source;   // every key that was set, after overrides
};

// Seed used when none is configured: NEEM_SEED if set, else 1.
std::uint64_t default_seed();

// Applies keys over the defaults; unknown keys and bad values are ConfigError.
RunConfig make_config(const KeyValues& kv);

// Full key/value view of a config including defaults.
KeyValues config_to_map(const RunConfig& cfg);

OscillatorModel build_model(const RunConfig& cfg);
PathState initial_state(const RunConfig& cfg, const OscillatorModel& model);
TimeGrid make_grid(const RunConfig& cfg);
SamplerOptions sampler_options(const RunConfig& cfg);

std::string scheme_name(Scheme s);

}  // namespace neem
