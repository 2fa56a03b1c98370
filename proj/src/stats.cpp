#include "neem/stats.hpp"

#include <cmath>

namespace neem {

double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

Moment second_moment(std::span<const double> xs, std::span<const unsigned char> valid) {
    std::vector<double> sq;
    sq.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (valid.empty() || valid[i]) sq.push_back(xs[i] * xs[i]);
    if (sq.size() < 2) throw NumericError("second moment needs at least two valid paths");
    return mean_se(sq);
}

Moment mean_se(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    if (xs.size() < 2) throw NumericError("mean needs at least two samples");
    // centred on the first sample so a constant sample has exactly zero spread
    const double x0 = xs[0];
    std::vector<double> d(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) d[i] = xs[i] - x0;
    double shift = pairwise_sum(d) / n;
    for (std::size_t i = 0; i < xs.size(); ++i) d[i] = (d[i] - shift) * (d[i] - shift);
    double var = pairwise_sum(d) / (n - 1.0);
    return {x0 + shift, std::sqrt(var / n)};
}

void MomentSeries::add_node(double t, const std::vector<Moment>& row, int valid) {
    times.push_back(t);
    std::vector<double> v(row.size()), s(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
        v[c] = row[c].value;
        s[c] = row[c].se;
    }
    m2.push_back(std::move(v));
    se.push_back(std::move(s));
    valid_count.push_back(valid);
}

LineFit convergence_fit(std::span<const double> dts, std::span<const double> errs) {
    if (dts.size() != errs.size()) throw ConfigError("convergence fit needs matching lengths");
    if (dts.size() < 3) throw ConfigError("convergence fit needs at least three step sizes");
    const std::size_t n = dts.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(dts[i] > 0) || !(errs[i] > 0)) throw NumericError("convergence fit needs positive values");
        double x = std::log(dts[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double dn = static_cast<double>(n);
    double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    return {slope, (sy - slope * sx) / dn};
}

}  // namespace neem
