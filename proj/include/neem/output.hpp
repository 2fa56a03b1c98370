#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "neem/config.hpp"
#include "neem/stats.hpp"

namespace neem {

// 17 significant digits, enough to round-trip a double.
std::string format_number(double v);

void write_moments_csv(std::ostream& os, const MomentSeries& ms);
void write_acceptance_csv(std::ostream& os, const MomentSeries& ms);
void write_timing_csv(std::ostream& os, const MomentSeries& ms);

struct CompareColumn {
    std::string name;
    std::vector<double> values;   // aligned on the shared time column
};

void write_compare_csv(std::ostream& os, const std::vector<double>& times, const std::vector<CompareColumn>& cols);

// Column labels m2_x1, se_x1, m2_v1, se_v1, ... for a given dof.
std::vector<std::string> moment_labels(int dof);

nlohmann::json run_manifest(const RunConfig& cfg, const MomentSeries& ms, const NeemDiagnostics* diag);

void write_text_file(const std::string& path, const std::string& body);

std::string library_version();

}  // namespace neem
