#include "neem/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <vector>

namespace neem {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + key + ": " + v);
    }
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + key + ": " + v);
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("bad flag for " + key + ": " + v);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
}

int hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

std::uint64_t default_seed() {
    if (const char* s = std::getenv("NEEM_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ConfigError(std::string("bad NEEM_SEED: ") + s);
        }
    }
    return 1;
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Em: return "em";
        case Scheme::Frozen: return "frozen";
        case Scheme::Neem: return "neem";
    }
    return "?";
}

RunConfig make_config(const KeyValues& kv) {
    RunConfig c;
    c.seed = default_seed();
    c.threads = hardware_threads();
    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"model", [&](const std::string& v) {
             if (v != "rvp" && v != "dvp" && v != "two_dof") throw ConfigError("unknown model: " + v);
             c.model = v;
         }},
        {"scheme", [&](const std::string& v) {
             if (v == "em") c.scheme = Scheme::Em;
             else if (v == "frozen") c.scheme = Scheme::Frozen;
             else if (v == "neem") c.scheme = Scheme::Neem;
             else throw ConfigError("unknown scheme: " + v);
         }},
        {"dt", [&](const std::string& v) { c.dt = to_double("dt", v); }},
        {"t_end", [&](const std::string& v) { c.t_end = to_double("t_end", v); }},
        {"n_sub", [&](const std::string& v) { c.n_sub = static_cast<int>(to_int("n_sub", v)); }},
        {"ensemble", [&](const std::string& v) { c.ensemble = static_cast<int>(to_int("ensemble", v)); }},
        {"seed", [&](const std::string& v) { c.seed = static_cast<std::uint64_t>(to_int("seed", v)); }},
        {"threads", [&](const std::string& v) { c.threads = static_cast<int>(to_int("threads", v)); }},
        {"max_trials", [&](const std::string& v) { c.max_trials = static_cast<int>(to_int("max_trials", v)); }},
        {"phi_form", [&](const std::string& v) {
             if (v == "ito") c.form = PhiForm::Ito;
             else if (v == "printed") c.form = PhiForm::Printed;
             else throw ConfigError("unknown phi_form: " + v);
         }},
        {"accept", [&](const std::string& v) {
             if (v == "thinning") c.accept = AcceptMode::Thinning;
             else if (v == "series") c.accept = AcceptMode::Series;
             else if (v == "trapezoid") c.accept = AcceptMode::Trapezoid;
             else throw ConfigError("unknown accept mode: " + v);
         }},
        {"bound", [&](const std::string& v) {
             if (v == "shift") c.bound = BoundMode::Shift;
             else if (v == "zero") c.bound = BoundMode::Zero;
             else throw ConfigError("unknown bound mode: " + v);
         }},
        {"phi_eval", [&](const std::string& v) {
             if (v == "auto") c.eval = PhiEval::Auto;
             else if (v == "bridge") c.eval = PhiEval::Bridge;
             else if (v == "discrete") c.eval = PhiEval::Discrete;
             else throw ConfigError("unknown phi_eval: " + v);
         }},
        {"normalizer", [&](const std::string& v) { c.normalize = to_bool("normalizer", v); }},
        {"oracle_dt", [&](const std::string& v) { c.oracle_dt = to_double("oracle_dt", v); }},
        {"oracle_ensemble",
         [&](const std::string& v) { c.oracle_ensemble = static_cast<int>(to_int("oracle_ensemble", v)); }},
        {"x1_0", [&](const std::string& v) { to_list("x1_0", v), c.x1_0 = v; }},
        {"x2_0", [&](const std::string& v) { to_list("x2_0", v), c.x2_0 = v; }},
        {"h1", [&](const std::string& v) { c.rvp.h1 = to_double("h1", v); }},
        {"h3", [&](const std::string& v) { c.rvp.h3 = to_double("h3", v); }},
        {"sigma", [&](const std::string& v) { c.rvp.sigma = to_double("sigma", v); }},
        {"m", [&](const std::string& v) { c.dvp.m = to_double("m", v); }},
        {"c", [&](const std::string& v) { c.dvp.c = to_double("c", v); }},
        {"k", [&](const std::string& v) { c.dvp.k = to_double("k", v); }},
        {"alpha", [&](const std::string& v) { c.dvp.alpha = c.two_dof.alpha = to_double("alpha", v); }},
        {"rho", [&](const std::string& v) { c.dvp.rho = to_double("rho", v); }},
        {"A", [&](const std::string& v) { c.dvp.A = to_double("A", v); }},
        {"omega", [&](const std::string& v) { c.dvp.omega = to_double("omega", v); }},
        {"dvp_derivative", [&](const std::string& v) {
             if (v == "quotient") c.dvp.quotient_rule = true;
             else if (v == "appendix") c.dvp.quotient_rule = false;
             else throw ConfigError("unknown dvp_derivative: " + v);
         }},
        {"c1", [&](const std::string& v) { c.two_dof.c1 = to_double("c1", v); }},
        {"c2", [&](const std::string& v) { c.two_dof.c2 = to_double("c2", v); }},
        {"k1", [&](const std::string& v) { c.two_dof.k1 = to_double("k1", v); }},
        {"k2", [&](const std::string& v) { c.two_dof.k2 = to_double("k2", v); }},
        {"beta", [&](const std::string& v) { c.two_dof.beta = to_double("beta", v); }},
        {"sigma1", [&](const std::string& v) { c.two_dof.sigma1 = to_double("sigma1", v); }},
        {"sigma2", [&](const std::string& v) { c.two_dof.sigma2 = to_double("sigma2", v); }},
    };
    for (const auto& [key, value] : kv) {
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key: " + key);
        it->second(value);
    }
    if (!(c.dt > 0) || !(c.t_end > 0)) throw ConfigError("dt and t_end must be positive");
    if (c.n_sub < 1) throw ConfigError("n_sub must be >= 1");
    if (c.ensemble < 2) throw ConfigError("ensemble must be >= 2");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    if (c.max_trials < 1) throw ConfigError("max_trials must be >= 1");
    if (!(c.oracle_dt > 0) || c.oracle_ensemble < 2) throw ConfigError("bad oracle settings");
    c.source = kv;
    return c;
}

KeyValues config_to_map(const RunConfig& c) {
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    KeyValues kv = {
        {"model", c.model},
        {"scheme", scheme_name(c.scheme)},
        {"dt", num(c.dt)},
        {"t_end", num(c.t_end)},
        {"n_sub", std::to_string(c.n_sub)},
        {"ensemble", std::to_string(c.ensemble)},
        {"seed", std::to_string(c.seed)},
        {"threads", std::to_string(c.threads)},
        {"max_trials", std::to_string(c.max_trials)},
        {"phi_form", c.form == PhiForm::Ito ? "ito" : "printed"},
        {"accept", c.accept == AcceptMode::Thinning ? "thinning"
                   : c.accept == AcceptMode::Series ? "series"
                                                     : "trapezoid"},
        {"bound", c.bound == BoundMode::Shift ? "shift" : "zero"},
        {"phi_eval", c.eval == PhiEval::Auto ? "auto" : c.eval == PhiEval::Bridge ? "bridge" : "discrete"},
        {"normalizer", c.normalize ? "on" : "off"},
        {"oracle_dt", num(c.oracle_dt)},
        {"oracle_ensemble", std::to_string(c.oracle_ensemble)},
        {"x1_0", c.x1_0},
        {"x2_0", c.x2_0},
    };
    if (c.model == "rvp") {
        kv["h1"] = num(c.rvp.h1);
        kv["h3"] = num(c.rvp.h3);
        kv["sigma"] = num(c.rvp.sigma);
    } else if (c.model == "dvp") {
        kv["m"] = num(c.dvp.m);
        kv["c"] = num(c.dvp.c);
        kv["k"] = num(c.dvp.k);
        kv["alpha"] = num(c.dvp.alpha);
        kv["rho"] = num(c.dvp.rho);
        kv["A"] = num(c.dvp.A);
        kv["omega"] = num(c.dvp.omega);
        kv["dvp_derivative"] = c.dvp.quotient_rule ? "quotient" : "appendix";
    } else {
        kv["c1"] = num(c.two_dof.c1);
        kv["c2"] = num(c.two_dof.c2);
        kv["k1"] = num(c.two_dof.k1);
        kv["k2"] = num(c.two_dof.k2);
        kv["alpha"] = num(c.two_dof.alpha);
        kv["beta"] = num(c.two_dof.beta);
        kv["sigma1"] = num(c.two_dof.sigma1);
        kv["sigma2"] = num(c.two_dof.sigma2);
    }
    return kv;
}

OscillatorModel build_model(const RunConfig& c) {
    if (c.model == "rvp") return build_rvp(c.rvp);
    if (c.model == "dvp") return build_dvp(c.dvp);
    if (c.model == "two_dof") return build_two_dof(c.two_dof);
    throw ConfigError("unknown model: " + c.model);
}

PathState initial_state(const RunConfig& c, const OscillatorModel& model) {
    auto expand = [&](const std::string& key, const std::string& text) {
        std::vector<double> v = to_list(key, text);
        if (v.size() == 1) v.assign(model.dof, v[0]);
        if (static_cast<int>(v.size()) != model.dof) throw ConfigError(key + " needs one value per dof");
        Vec out(model.dof);
        for (int i = 0; i < model.dof; ++i) out(i) = v[i];
        return out;
    };
    return make_state(model, expand("x1_0", c.x1_0), expand("x2_0", c.x2_0), 0.0);
}

TimeGrid make_grid(const RunConfig& c) {
    double steps = c.t_end / c.dt;
    long long n = std::llround(steps);
    if (n < 1 || std::abs(steps - static_cast<double>(n)) > 1e-6 * steps)
        throw ConfigError("t_end must be a whole number of dt steps");
    return TimeGrid(0.0, c.t_end, static_cast<int>(n), c.n_sub);
}

SamplerOptions sampler_options(const RunConfig& c) {
    SamplerOptions o;
    o.base.ensemble = c.ensemble;
    o.base.seed = c.seed;
    o.base.threads = c.threads;
    o.form = c.form;
    o.accept = c.accept;
    o.eval = c.eval;
    o.bound = c.bound;
    o.normalize = c.normalize;
    o.max_trials = c.max_trials;
    return o;
}

}  // namespace neem
