#pragma once

#include <map>
#include <vector>

#include "metvol/volume.hpp"

namespace metvol {

struct GrassmannBudget {
    int restarts = 64;
    int iters = 150;
    double step0 = 0.4;
};

// Lighter budget for non-euclidean sweeps.
GrassmannBudget grassmann_sweep_budget();

struct WitnessedValue {
    double value = 0.0;      // certified one-sided (lower for sup, upper for inf)
    double rel_error = 0.0;  // of the reported determinant / norm evaluation
    Subspace witness;
};

// V_q(A) = sup over q-dimensional E of det(A|E), by multi-start tangent
// ascent over orthonormal frames.  The witness subspace attains `value`.
WitnessedValue max_volume_growth(const AmbientSpace& space, const OperatorMatrix& A, int q,
                                 const GrassmannBudget& budget = {}, std::uint64_t seed = 0,
                                 const Tolerances& tol = default_tolerances());

// c_q(A) = inf of restricted operator norms over subspaces of codimension
// q-1, by multi-start descent over annihilator frames; c_1(A) = |A|.
WitnessedValue gelfand_number(const AmbientSpace& space, const OperatorMatrix& A, int q,
                              const GrassmannBudget& budget = {}, std::uint64_t seed = 0,
                              const Tolerances& tol = default_tolerances());

struct GelfandVolumeCheck {
    double vq = 0.0, vq_prev = 0.0, cq = 0.0;
    double ratio = 0.0;  // V_q / (c_q V_{q-1})
    double lower = 0.0, upper = 0.0;
    bool finite_rank_branch = false;  // V_{q-1} = 0: no assertion applies
    bool within_bounds = false;
};

GelfandVolumeCheck gelfand_volume_check(const AmbientSpace& space, const OperatorMatrix& A,
                                        int q, const GrassmannBudget& budget = {},
                                        std::uint64_t seed = 0,
                                        const Tolerances& tol = default_tolerances());

struct VolumeGrowthTail {
    std::vector<int> q;
    std::vector<double> normalized_log_vq;  // (1/q) log V_q, -inf when V_q = 0
    int numerical_rank = 0;
    bool tail_monotone = true;  // nonincreasing past the rank index
};

VolumeGrowthTail volume_growth_tail(const AmbientSpace& space, const OperatorMatrix& A,
                                    int q_lo, int q_hi, const GrassmannBudget& budget = {},
                                    std::uint64_t seed = 0,
                                    const Tolerances& tol = default_tolerances());

struct SingularProfile {
    std::map<int, double> vq;
    std::map<int, double> cq;
    std::map<int, Subspace> argmax_subspaces;
    std::map<int, Subspace> argmin_restrictions;
    std::map<int, double> witness_audit;  // det(A | argmax_subspaces[q])
};

SingularProfile singular_profile(const AmbientSpace& space, const OperatorMatrix& A, int q_max,
                                 const GrassmannBudget& budget = {}, std::uint64_t seed = 0,
                                 const Tolerances& tol = default_tolerances());

}  // namespace metvol
