#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace neem {

// Small fixed-capacity vectors so hot loops never touch the heap.
inline constexpr int kMaxDof = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDof, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDof, kMaxDof>;
using BigMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDof, 2 * kMaxDof>;
using BigVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDof, 1>;

struct PathState {
    Vec x1;  // displacements
    Vec x2;  // velocities
    double t = 0.0;

    int dof() const { return static_cast<int>(x1.size()); }
    bool finite() const { return x1.allFinite() && x2.allFinite() && std::isfinite(t); }
};

struct TimeGrid {
    double t0 = 0.0;
    double t_end = 1.0;
    int macro_steps = 1;
    int substeps = 1;

    TimeGrid() = default;
    TimeGrid(double t0_, double t_end_, int n, int n_sub);

    double dt() const { return (t_end - t0) / macro_steps; }
    double dt_sub() const { return dt() / substeps; }
    double node(int i) const { return t0 + dt() * i; }
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a model closure or an integrator produces a non-finite value.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double t = 0.0, long path = -1)
        : std::runtime_error(what), t_(t), path_(path) {}
    double time() const { return t_; }
    long path() const { return path_; }

private:
    double t_;
    long path_;
};

class SingularShiftError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace neem
