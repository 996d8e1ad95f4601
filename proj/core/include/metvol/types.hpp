#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>

namespace metvol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A bounded linear map carried as a dense matrix.
using OperatorMatrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Thrown when an operation's precondition is violated (degenerate
// restriction, empty subspace, not a splitting, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown on malformed configuration input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical tolerances shared across the library.  Defaults are the values
// used by the test and verification suites; all are overridable through the
// experiment config.
struct Tolerances {
    // Declared optimizer slack for certified one-sided values.  Inequality
    // tests include it explicitly.
    double eps_opt = 1e-3;
    // Relative rank threshold: a basis column set is degenerate when the
    // smallest singular value falls below tau_rank_rel * largest.
    double tau_rank_rel = 1e-10;
    // Subspace equality threshold on d_H, by norm family.
    double tau_sub_euclidean = 1e-8;
    double tau_sub_optimized = 1e-6;
    // sin(theta) below this signals a non-topological splitting.
    double tau_angle = 1e-12;
    // Residual threshold for projection idempotency / range / kernel checks.
    double tau_proj = 1e-8;
    // Target accuracy of convex distance minimization.
    double tau_dist = 1e-9;
    // Floor of the exponent clustering threshold.
    double tau_cluster_floor = 1e-2;
    // Budget for the ellipsoid approximation slack; achieved value is
    // recorded per JohnForm.
    double mvee_eps = 1e-3;
    // Sublevel-set convergence target.
    double tau_sublevel = 1e-2;
    // Largest subspace dimension the volume machinery accepts.
    int q_max = 6;

    double tau_sub(bool euclidean) const {
        return euclidean ? tau_sub_euclidean : tau_sub_optimized;
    }
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

}  // namespace metvol
