#pragma once

#include <span>
#include <vector>

#include "neem/types.hpp"

namespace neem {

// Fixed-tree pairwise summation; the result depends only on the order of xs.
double pairwise_sum(std::span<const double> xs);

struct Moment {
    double value = 0.0;
    double se = 0.0;
};

// Mean of squares and its standard error over the entries flagged valid.
Moment second_moment(std::span<const double> xs, std::span<const unsigned char> valid = {});

struct AcceptanceRecord {
    int macro_index = 0;
    double t = 0.0;
    long long trials = 0;
    long long accepted = 0;
    double ratio() const { return trials > 0 ? static_cast<double>(accepted) / static_cast<double>(trials) : 1.0; }
};

// Moments per time node. Column c of m2/se is state component c in the
// order (x1_1, v1_1, x1_2, v1_2, ...), i.e. displacement then velocity per dof.
struct MomentSeries {
    int dof = 1;
    int ensemble = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> m2;
    std::vector<std::vector<double>> se;
    std::vector<int> valid_count;
    // per macro step (length N)
    std::vector<AcceptanceRecord> acceptance;
    std::vector<double> ess;
    std::vector<double> step_seconds;
    std::vector<int> capped;

    int columns() const { return 2 * dof; }
    void add_node(double t, const std::vector<Moment>& row, int valid);
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least squares of log(err) against log(dt).
LineFit convergence_fit(std::span<const double> dts, std::span<const double> errs);

// Mean with standard error of a plain sample.
Moment mean_se(std::span<const double> xs);

}  // namespace neem
