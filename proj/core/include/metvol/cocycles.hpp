#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metvol/met.hpp"

namespace metvol {

// Scalar law for diagonal and coupling entries, with a closed-form log
// moment where the exponent oracles need one.
struct ScalarLaw {
    enum class Kind { constant_value, two_point, log_uniform };
    Kind kind = Kind::constant_value;
    double a = 1.0, b = 1.0;

    static ScalarLaw constant(double c) { return {Kind::constant_value, c, c}; }
    static ScalarLaw two_point(double x, double y) { return {Kind::two_point, x, y}; }
    static ScalarLaw log_uniform(double lo, double hi) { return {Kind::log_uniform, lo, hi}; }

    double sample(RngStream& rng) const;
    double expected_log_abs() const;
};

// Reproducible operator-stream specification: same (spec, seed) yields
// identical streams, with O(1) access by step index.
struct CocycleSpec {
    enum class Kind {
        constant,
        iid_diagonal,
        iid_general,
        triangular,
        rotation_driven,
        rank_deficient
    };

    Kind kind = Kind::constant;
    int dim = 1;
    NormSpec norm;
    std::uint64_t seed = 0;

    Matrix constant_matrix;           // constant
    std::vector<ScalarLaw> diagonal;  // iid_diagonal / triangular
    ScalarLaw coupling;               // triangular strict-upper entries
    double iid_scale = 1.0;           // iid_general gaussian entry scale
    double alpha = 0.0;               // rotation_driven angle
    Matrix base_matrix;               // rotation_driven family: base + f(x) modulation
    Matrix modulation_matrix;
    std::shared_ptr<const CocycleSpec> base;  // rank_deficient wraps a base spec
    std::vector<int> kill_steps;
    int kill_column = 0;

    static CocycleSpec constant_op(Matrix A, NormSpec norm, std::uint64_t seed = 0);
    static CocycleSpec iid_diagonal_op(std::vector<ScalarLaw> laws, NormSpec norm,
                                       std::uint64_t seed);
    static CocycleSpec iid_general_op(int dim, double scale, NormSpec norm, std::uint64_t seed);
    static CocycleSpec triangular_op(std::vector<ScalarLaw> diag, ScalarLaw coupling,
                                     NormSpec norm, std::uint64_t seed);
    static CocycleSpec rotation_driven_op(double alpha, Matrix base, Matrix modulation,
                                          NormSpec norm, std::uint64_t seed);
    static CocycleSpec rank_deficient_op(CocycleSpec base, std::vector<int> kill_steps,
                                         int kill_column = 0);

    OperatorMatrix operator_at(int k) const;
};

const char* to_string(CocycleSpec::Kind k);
std::vector<std::string> cocycle_kind_names();

// Replayable trajectory for the spec.
Trajectory stream(const CocycleSpec& spec, int length_budget = 5000);

// Closed-form exponent oracle where one exists: constant (eigenvalue
// moduli), iid_diagonal and independent-diagonal triangular (diagonal log
// moments).  Absent for sampler-defined kinds.
std::optional<ExponentReport> analytic_exponents(const CocycleSpec& spec);

}  // namespace metvol
