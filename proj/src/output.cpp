#include "neem/output.hpp"

#include <fmt/format.h>

#include <fstream>

namespace neem {

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

std::string library_version() { return "1.0.0"; }

std::vector<std::string> moment_labels(int dof) {
    std::vector<std::string> out;
    for (int d = 1; d <= dof; ++d) {
        out.push_back(fmt::format("m2_x{}", d));
        out.push_back(fmt::format("se_x{}", d));
        out.push_back(fmt::format("m2_v{}", d));
        out.push_back(fmt::format("se_v{}", d));
    }
    return out;
}

void write_moments_csv(std::ostream& os, const MomentSeries& ms) {
    os << "t";
    for (const auto& l : moment_labels(ms.dof)) os << ',' << l;
    os << '\n';
    for (std::size_t k = 0; k < ms.times.size(); ++k) {
        os << format_number(ms.times[k]);
        for (int c = 0; c < ms.columns(); ++c) os << ',' << format_number(ms.m2[k][c]) << ',' << format_number(ms.se[k][c]);
        os << '\n';
    }
}

void write_acceptance_csv(std::ostream& os, const MomentSeries& ms) {
    os << "step,t,trials,accepted,ratio,ess\n";
    for (std::size_t i = 0; i < ms.acceptance.size(); ++i) {
        const auto& r = ms.acceptance[i];
        os << r.macro_index + 1 << ',' << format_number(r.t) << ',' << r.trials << ',' << r.accepted << ','
           << format_number(r.ratio()) << ',' << format_number(ms.ess[i]) << '\n';
    }
}

void write_timing_csv(std::ostream& os, const MomentSeries& ms) {
    os << "step,t,seconds\n";
    for (std::size_t i = 0; i < ms.step_seconds.size(); ++i)
        os << ms.acceptance[i].macro_index + 1 << ',' << format_number(ms.acceptance[i].t) << ','
           << format_number(ms.step_seconds[i]) << '\n';
}

void write_compare_csv(std::ostream& os, const std::vector<double>& times, const std::vector<CompareColumn>& cols) {
    os << "t";
    for (const auto& c : cols) os << ',' << c.name;
    os << '\n';
    for (std::size_t k = 0; k < times.size(); ++k) {
        os << format_number(times[k]);
        for (const auto& c : cols) os << ',' << format_number(c.values.at(k));
        os << '\n';
    }
}

nlohmann::json run_manifest(const RunConfig& cfg, const MomentSeries& ms, const NeemDiagnostics* diag) {
    nlohmann::json j;
    nlohmann::json conf = nlohmann::json::object();
    for (const auto& [k, v] : config_to_map(cfg)) conf[k] = v;
    j["config"] = conf;
    j["seed"] = cfg.seed;
    j["versions"] = {{"neem", library_version()},
                     {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__}};
    nlohmann::json d;
    long long capped = 0, steps = 0;
    for (int c : ms.capped) capped += c;
    steps = static_cast<long long>(ms.capped.size()) * ms.ensemble;
    d["capped_paths"] = capped;
    d["capped_fraction"] = steps ? static_cast<double>(capped) / static_cast<double>(steps) : 0.0;
    d["bound_raises"] = diag ? diag->bound_raises : 0;
    d["bound_violations"] = diag ? diag->bound_violations : 0;
    d["thinning_points"] = diag ? diag->thinning_points : 0;
    d["ess"] = ms.ess;
    j["diagnostics"] = d;
    double total = 0.0;
    for (double s : ms.step_seconds) total += s;
    j["wall_seconds"] = total;
    return j;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

}  // namespace neem
