#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metvol/spectral.hpp"

namespace metvol {

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

// A reproducible operator sequence T_0, T_1, ...  `op` is replayable by
// index: the same index always yields the same operator.  Restricted
// cocycles carry per-step pullback norms through `space_at`.
struct Trajectory {
    AmbientSpace space;
    std::function<OperatorMatrix(int)> op;
    int length_budget = 0;
    std::uint64_t seed = 0;
    std::function<AmbientSpace(int)> space_at;  // null: constant `space`

    AmbientSpace space_of(int k) const { return space_at ? space_at(k) : space; }
    int dim() const { return space.dim; }
};

// ---------------------------------------------------------------------------
// Growth ledger
// ---------------------------------------------------------------------------

struct GrowthOptions {
    int n_starts = 4;
    int reopt_every = 10;  // 0 disables the periodic re-ascent
    int reopt_window = 8;
    int reopt_proposals = 6;
    bool endpoint_volumes = true;
};

struct GrowthChannel {
    std::vector<double> increments;  // per-step log det of the propagated step
    double cum = 0.0;                // sum of increments
    bool dead = false;               // a zero determinant increment occurred
    int dead_at = -1;
    double endpoint_correction = 0.0;  // log V(E_0) - log V(E_n)
    double rate = -kInf;               // (cum + correction) / n
    Matrix initial_frame;              // E_0 carrier of the winning start
    Matrix final_frame;                // E_n carrier
};

struct GrowthLedger {
    int n = 0;
    std::vector<GrowthChannel> channels;  // index q-1

    std::vector<double> rates() const {
        std::vector<double> out;
        out.reserve(channels.size());
        for (const auto& c : channels) out.push_back(c.rate);
        return out;
    }
    // Statistical scale of the rate estimates (per-step variance of the best
    // channels over the trailing half window).
    double noise_estimate() const;
};

// Propagates multi-start subspace frames through the first N operators,
// accumulating per-q log-determinant increments (exactly multiplicative),
// re-conditioning every step and re-ascending every `reopt_every` steps.
GrowthLedger growth_rates(const Trajectory& traj, int q_max, int N,
                          const GrowthOptions& opts = {}, std::uint64_t seed = 0,
                          const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Exponent spectrum
// ---------------------------------------------------------------------------

struct ExponentReport {
    std::vector<double> l;       // growth rates l_q, may hold -inf
    std::vector<double> K;       // K_1 = l_1, K_q = l_q - l_{q-1}
    std::vector<double> lambda;  // distinct exponents, decreasing
    std::vector<int> mult;       // multiplicities m_i
    std::vector<int> M;          // offsets: M_1 = 0, M_i = m_1 + ... + m_{i-1}
    double noise = 0.0;
    double tau_cluster = 0.0;
};

// Differences the growth rates into increments and clusters them into
// distinct exponents; throws when K fails monotonicity beyond twice the
// estimation noise.
ExponentReport exponent_spectrum(const std::vector<double>& l, double noise_estimate,
                                 const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Fast and slow subspaces
// ---------------------------------------------------------------------------

struct FastSubspaceResult {
    Subspace E;
    double log_det = -kInf;     // achieved log det(T^n | E)
    double best_known = -kInf;  // best log det seen across all candidates
    bool certificate = false;   // achieved >= (1/2) best known
};

// Near-maximizing m-dimensional initial subspace for det(T^n | .), from
// adjoint-propagated starts refined by tangent ascent on the ledger value.
FastSubspaceResult fast_subspace(const Trajectory& traj, int m, int n, std::uint64_t seed = 0,
                                 const std::optional<Subspace>& warm_start = std::nullopt,
                                 const Tolerances& tol = default_tolerances());

struct SlowSubspaceResult {
    Subspace F_hat;
    std::vector<int> ns;            // schedule points with a distance recorded
    std::vector<double> cauchy_dh;  // d_H(F_n, F_{n+1})
    double rate_slope = 0.0;        // least-squares slope of log d_H
    double slope_threshold = 0.0;   // lambda_lo - lambda_hi + delta
    bool cauchy_certified = false;
    double lambda_hi = 0.0, lambda_lo = 0.0;
    std::string stopped_by;  // "cauchy" or "budget"
};

// Extracts the m-codimensional slow subspace as the d_H-limit of preimage
// complements of propagated fast subspaces.  Requires a spectral gap after
// the m-th increment.
SlowSubspaceResult slow_subspace(const Trajectory& traj, int m, int N, double delta = 0.0,
                                 std::uint64_t seed = 0,
                                 const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Filtration
// ---------------------------------------------------------------------------

struct Filtration {
    std::vector<Subspace> subspaces;              // F_2 ⊃ F_3 ⊃ ... (ambient bases)
    std::vector<int> codims;                      // codim F_{i+1} = m_1 + ... + m_i
    std::vector<std::vector<double>> cauchy_log;  // per level d_H sequences
};

struct FiltrationResult {
    Filtration filtration;
    ExponentReport report;
    GrowthLedger ledger;
    // | restricted l_q - (l_{q+M} - l_M) | per extracted level.
    std::vector<double> level_residuals;
};

// Full trajectory-wise extraction: growth rates, spectrum, nested slow
// subspaces with the cocycle restricted level by level.
FiltrationResult filtration(const Trajectory& traj, int N, std::uint64_t seed = 0,
                            const GrowthOptions& opts = {},
                            const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Verification clauses
// ---------------------------------------------------------------------------

struct ConeGrowthResult {
    std::vector<int> ns;
    std::vector<double> min_rates;  // per n: minimal (1/n) log |T^n v| over the cone
};

// Uniform growth over the cone {v : d(v, F_hat) >= eta |v|}.
ConeGrowthResult cone_growth(const Trajectory& traj, const Subspace& F_hat, double eta, int N,
                             std::uint64_t seed = 0,
                             const Tolerances& tol = default_tolerances());

// (1/N) log det(T^N | E) for a complement E of a filtration level.
double complement_volume_growth(const Trajectory& traj, const Subspace& E,
                                const Subspace& F_next, int N, std::uint64_t seed = 0,
                                const Tolerances& tol = default_tolerances());

struct ProjectionDecayResult {
    std::vector<int> ns;
    std::vector<double> log_proj_norms;  // log |pi_{T^n E || T^n F}|
    double slope = 0.0;
    bool degenerate = false;
};

// Slope of the propagated projection norms; zero for a true splitting of
// slow/fast directions.
ProjectionDecayResult projection_decay(const Trajectory& traj, const Subspace& E,
                                       const Subspace& F_hat, int N, std::uint64_t seed = 0,
                                       const Tolerances& tol = default_tolerances());

struct SublevelResult {
    std::vector<int> ns;
    std::vector<double> d_h;  // distance of S_{c_n}(T^n) to B_1 ∩ F_2
    double final_value = kInf;
};

// Convergence of the sublevel sets {v in B_1 : |T^n v| <= e^{n(lambda2+delta)}}
// to the slow-subspace ball slice.
SublevelResult sublevel_convergence(const Trajectory& traj, const Subspace& F2, double lambda2,
                                    double delta, int N, std::uint64_t seed = 0,
                                    const Tolerances& tol = default_tolerances());

// Sampled Hausdorff distance between the sublevel bodies of two operators at
// the same cut c (no propagation); used by the Lipschitz property check.
double sublevel_hausdorff(const AmbientSpace& space, const OperatorMatrix& A,
                          const OperatorMatrix& B, double c, int directions = 512,
                          std::uint64_t seed = 0);

// Restriction of a trajectory to an invariant-by-construction propagated
// subspace: operators become the triangular factors on the moving frame and
// the norms become pullbacks along the frames.
Trajectory restrict_trajectory(const Trajectory& traj, const Subspace& F0);

}  // namespace metvol
