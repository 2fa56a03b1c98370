#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "neem/config.hpp"
#include "neem/em.hpp"
#include "neem/models.hpp"
#include "neem/output.hpp"
#include "neem/sampler.hpp"
#include "neem/validate.hpp"

namespace fs = std::filesystem;
using namespace neem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct RunArgs {
    std::string config_file;
    std::string output_dir = ".";
    std::vector<std::string> sets;
    KeyValues flags;
};

// Registers the options shared by simulate and compare. Flag values land in
// args.flags under their config key names.
void add_run_options(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("--config", args.config_file, "flat key = value config file");
    cmd->add_option("--output-dir", args.output_dir, "directory for CSV and JSON artifacts");
    cmd->add_option("--set", args.sets, "extra key=value override (repeatable)");
    const std::vector<std::pair<std::string, std::string>> keys = {
        {"--model", "model"},         {"--scheme", "scheme"},       {"--dt", "dt"},
        {"--t-end", "t_end"},         {"--n-sub", "n_sub"},         {"--ensemble", "ensemble"},
        {"--seed", "seed"},           {"--threads", "threads"},     {"--max-trials", "max_trials"},
        {"--phi-form", "phi_form"},   {"--accept", "accept"},       {"--bound", "bound"},
        {"--normalizer", "normalizer"}, {"--phi-eval", "phi_eval"}, {"--oracle-dt", "oracle_dt"}, {"--oracle-ensemble", "oracle_ensemble"},
    };
    for (const auto& [flag, key] : keys) {
        std::string k = key;
        cmd->add_option_function<std::string>(flag, [&args, k](const std::string& v) { args.flags[k] = v; },
                                              "overrides config key " + k);
    }
}

RunConfig resolve(const RunArgs& args) {
    KeyValues kv;
    if (!args.config_file.empty()) kv = load_key_values(args.config_file);
    for (const auto& s : args.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + s);
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    for (const auto& [k, v] : args.flags) kv[k] = v;
    return make_config(kv);
}

std::string render(void (*fn)(std::ostream&, const MomentSeries&), const MomentSeries& ms) {
    std::ostringstream os;
    fn(os, ms);
    return os.str();
}

void warn_invalid(const MomentSeries& ms) {
    long long capped = 0;
    for (int c : ms.capped) capped += c;
    double frac = ms.capped.empty() ? 0.0 : static_cast<double>(capped) / (ms.capped.size() * double(ms.ensemble));
    if (frac > 0.01) {
        std::cerr << "************************************************************\n"
                  << " WARNING: " << frac * 100 << "% of path steps were invalid or capped\n"
                  << " and were excluded from the moments.\n"
                  << "************************************************************\n";
    }
}

MomentSeries run_scheme(const RunConfig& cfg, Scheme scheme, int n_sub, NeemDiagnostics* diag) {
    OscillatorModel model = build_model(cfg);
    PathState x0 = initial_state(cfg, model);
    RunConfig c = cfg;
    c.n_sub = n_sub;
    TimeGrid grid = make_grid(c);
    if (scheme == Scheme::Neem) return neem_simulate(model, grid, x0, sampler_options(c), diag);
    EnsembleOptions o = sampler_options(c).base;
    return simulate_em(model, grid, x0, o, scheme == Scheme::Em ? DriftMode::Classical : DriftMode::Frozen);
}

void write_failure(const std::string& dir, const RunConfig* cfg, const NumericError& e) {
    nlohmann::json j;
    j["error"] = e.what();
    j["time"] = e.time();
    j["path"] = e.path();
    if (cfg) {
        nlohmann::json conf;
        for (const auto& [k, v] : config_to_map(*cfg)) conf[k] = v;
        j["config"] = conf;
    }
    fs::create_directories(dir);
    write_text_file((fs::path(dir) / "diagnostics.json").string(), j.dump(2) + "\n");
}

int cmd_simulate(const RunArgs& args) {
    RunConfig cfg = resolve(args);
    try {
        NeemDiagnostics diag;
        MomentSeries ms = run_scheme(cfg, cfg.scheme, cfg.n_sub, &diag);
        fs::create_directories(args.output_dir);
        fs::path dir(args.output_dir);
        write_text_file((dir / "moments.csv").string(), render(write_moments_csv, ms));
        write_text_file((dir / "acceptance.csv").string(), render(write_acceptance_csv, ms));
        write_text_file((dir / "timing.csv").string(), render(write_timing_csv, ms));
        auto manifest = run_manifest(cfg, ms, cfg.scheme == Scheme::Neem ? &diag : nullptr);
        write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
        warn_invalid(ms);
        std::cout << "wrote " << (dir / "moments.csv").string() << "\n";
    } catch (const NumericError& e) {
        write_failure(args.output_dir, &cfg, e);
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}

int cmd_compare(const RunArgs& args) {
    RunConfig cfg = resolve(args);
    try {
        OscillatorModel model = build_model(cfg);
        PathState x0 = initial_state(cfg, model);
        TimeGrid grid = make_grid(cfg);
        NeemDiagnostics diag;
        MomentSeries em = run_scheme(cfg, Scheme::Em, cfg.n_sub, nullptr);
        MomentSeries ne = run_scheme(cfg, Scheme::Neem, cfg.n_sub, &diag);
        EnsembleOptions oo = sampler_options(cfg).base;
        oo.ensemble = cfg.oracle_ensemble;
        MomentSeries orc = reference_oracle(model, TimeGrid(grid.t0, grid.t_end, grid.macro_steps, 1), cfg.oracle_dt,
                                            x0, oo);
        std::vector<CompareColumn> cols;
        auto add = [&](const std::string& prefix, const MomentSeries& ms) {
            auto labels = moment_labels(ms.dof);
            for (int c = 0; c < ms.columns(); ++c) {
                CompareColumn v{prefix + "_" + labels[2 * c], {}}, s{prefix + "_" + labels[2 * c + 1], {}};
                for (std::size_t k = 0; k < ms.times.size(); ++k) {
                    v.values.push_back(ms.m2[k][c]);
                    s.values.push_back(ms.se[k][c]);
                }
                cols.push_back(std::move(v));
                cols.push_back(std::move(s));
            }
        };
        add("em", em);
        add("neem", ne);
        add("oracle", orc);
        if (cfg.model == "rvp" && cfg.rvp.h1 > 0 && cfg.rvp.h3 > 0) {
            StationaryMoments st = rvp_stationary_moments(cfg.rvp);
            cols.push_back({"stationary_m2_x1", std::vector<double>(ne.times.size(), st.ex2)});
            cols.push_back({"stationary_m2_v1", std::vector<double>(ne.times.size(), st.ev2)});
        }
        fs::create_directories(args.output_dir);
        fs::path dir(args.output_dir);
        std::ostringstream os;
        write_compare_csv(os, ne.times, cols);
        write_text_file((dir / "compare.csv").string(), os.str());
        auto manifest = run_manifest(cfg, ne, &diag);
        manifest["command"] = "compare";
        write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
        warn_invalid(ne);
        std::cout << "wrote " << (dir / "compare.csv").string() << "\n";
    } catch (const NumericError& e) {
        write_failure(args.output_dir, &cfg, e);
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}

int cmd_validate(const ValidateOptions& opt) {
    auto results = run_validation(opt);
    bool all = true;
    std::cout << "suite                          result  detail\n";
    for (const auto& r : results) {
        std::string name = r.name;
        name.resize(30, ' ');
        std::cout << name << " " << (r.passed ? "PASS  " : "FAIL  ") << "  " << r.detail << "\n";
        all = all && r.passed;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-exact Euler-Maruyama simulation of nonlinear oscillators"};
    app.require_subcommand(1);

    RunArgs sim_args, cmp_args;
    auto* sim = app.add_subcommand("simulate", "run one scheme and write moments, acceptance, timing, manifest");
    add_run_options(sim, sim_args);
    auto* cmp = app.add_subcommand("compare", "run em, neem and the fine-step oracle into one CSV");
    add_run_options(cmp, cmp_args);

    ValidateOptions vopt;
    vopt.seed = 1;
    auto* val = app.add_subcommand("validate", "run the property suites");
    val->add_flag("--reduced", vopt.reduced, "smaller samples with wider tolerances");
    val->add_flag("--mutate-gamma-sign", vopt.mutate_gamma_sign, "flip gamma derivative signs (audit must fail)");
    val->add_option("--seed", vopt.seed, "seed for the suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    try {
        if (*sim) return cmd_simulate(sim_args);
        if (*cmp) return cmd_compare(cmp_args);
        if (*val) return cmd_validate(vopt);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
