#pragma once

#include <optional>
#include <vector>

#include "metvol/ambient.hpp"

namespace metvol {

// ---------------------------------------------------------------------------
// Volume estimates
// ---------------------------------------------------------------------------

enum class VolumeMethod { exact_closed_form, hull_triangulation, monte_carlo };
const char* to_string(VolumeMethod m);

struct VolumeEstimate {
    double value = 0.0;
    // Relative error: deterministic bound for closed forms and hulls, one
    // standard deviation for Monte Carlo.
    double rel_error = 0.0;
    VolumeMethod method = VolumeMethod::exact_closed_form;
};

struct VolumeOptions {
    std::optional<VolumeMethod> force_method;
    int hull_samples_per_dim = 1000;
    long mc_target_accepts = 20000;
    long mc_max_samples = 2000000;
    double mvee_eps = 1e-3;
    int mvee_max_iter = 40000;
};

// Volume of the euclidean unit ball in R^q, via a local Gamma evaluation at
// the needed half-integers (bit-stable across modules).
double omega_q(int q);

// ---------------------------------------------------------------------------
// John forms
// ---------------------------------------------------------------------------

// Inner product on a subspace approximating the restricted norm within
// sqrt(q), rescaled so its Lebesgue volume matches the induced volume.
struct JohnForm {
    Subspace subspace;
    Matrix gram;            // ||c||_E^2 = c^T gram c in carrier coordinates
    double mvee_epsilon = 0.0;
    VolumeEstimate ball_volume;  // coordinate Lebesgue volume of B_E
};

JohnForm john_form(const AmbientSpace& space, const Subspace& E,
                   const VolumeOptions& opts = {}, std::uint64_t seed = 0,
                   const Tolerances& tol = default_tolerances());

double john_norm(const JohnForm& form, const Vector& coords);

// ---------------------------------------------------------------------------
// Volumes of sections and parallelepipeds
// ---------------------------------------------------------------------------

// Coordinate Lebesgue volume of B_E = {v in E : |v| <= 1}.  Closed form for
// recognized sections, hull triangulation for q <= 3, rejection sampling
// inside the enclosing ellipsoid otherwise.
VolumeEstimate unit_ball_volume(const AmbientSpace& space, const Subspace& E,
                                const VolumeOptions& opts = {}, std::uint64_t seed = 0,
                                const Tolerances& tol = default_tolerances());

// m_E of the parallelepiped spanned by vectors of E (ambient coordinates).
VolumeEstimate parallelepiped_volume(const AmbientSpace& space, const Subspace& E,
                                     const std::vector<Vector>& vectors,
                                     const VolumeOptions& opts = {}, std::uint64_t seed = 0,
                                     const Tolerances& tol = default_tolerances());

// m_E of the section E ∩ B(x, r) for an ambient-norm ball around x.
VolumeEstimate ball_section_volume(const AmbientSpace& space, const Subspace& E,
                                   const Vector& x, double r,
                                   const VolumeOptions& opts = {}, std::uint64_t seed = 0,
                                   const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Determinants
// ---------------------------------------------------------------------------

struct DetEstimate {
    double value = 0.0;
    double rel_error = 0.0;
    VolumeMethod method_source = VolumeMethod::exact_closed_form;
    VolumeMethod method_image = VolumeMethod::exact_closed_form;
};

// det(A|E): induced-volume ratio of image to source; 0 when A is not
// injective on E.
DetEstimate determinant(const AmbientSpace& space, const OperatorMatrix& A, const Subspace& E,
                        const VolumeOptions& opts = {}, std::uint64_t seed = 0,
                        const Tolerances& tol = default_tolerances());

// Deterministic coarse surrogate of log det(A|E) for optimization loops
// (fixed quadrature directions, ellipsoidal volume proxy beyond q = 3).
// Returns -inf when A is not injective on E.  Not for certified reporting.
double log_det_surrogate(const AmbientSpace& space, const OperatorMatrix& A, const Subspace& E);

// ---------------------------------------------------------------------------
// Almost orthonormal bases and block estimates
// ---------------------------------------------------------------------------

struct ApproxSvdBasis {
    std::vector<Vector> vectors;     // ambient-unit, (.,.)_V-orthogonal
    std::vector<double> expansions;  // |A v_i|
    double product = 0.0;            // prod |A v_i|
    DetEstimate det;
    bool invertible = false;
    std::vector<Vector> image_vectors;  // A v_i / |A v_i| when invertible
    double image_gram_residual = 0.0;   // orthogonality defect of the images
};

ApproxSvdBasis approx_svd_basis(const AmbientSpace& space, const OperatorMatrix& A,
                                const Subspace& V, const VolumeOptions& opts = {},
                                std::uint64_t seed = 0,
                                const Tolerances& tol = default_tolerances());

struct MinExpansionBound {
    double lhs = 0.0;  // (|A v|/|v|) |A|_E|^{q-1} at the minimizing v
    double rhs = 0.0;  // det(A|E) / C_q
    Vector minimizer;
};

MinExpansionBound min_expansion_bound(const AmbientSpace& space, const OperatorMatrix& A,
                                      const Subspace& E, const VolumeOptions& opts = {},
                                      const OptBudget& budget = {}, std::uint64_t seed = 0,
                                      const Tolerances& tol = default_tolerances());

struct BlockDetBounds {
    double ratio = 0.0;  // det(A|V) / (det(A|E) det(A|F))
    double lower = 0.0;
    double upper = 0.0;
    double proj_source = 0.0;  // |pi_{E||F}| within V
    double proj_image = 0.0;   // |pi_{E'||F'}| within AV
};

BlockDetBounds block_det_bounds(const AmbientSpace& space, const OperatorMatrix& A,
                                const Subspace& E, const Subspace& F,
                                const VolumeOptions& opts = {}, const OptBudget& budget = {},
                                std::uint64_t seed = 0,
                                const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Pinned dimension-dependent constants
// ---------------------------------------------------------------------------
// The ellipsoid round-trip between a norm and its John inner product costs a
// factor sqrt(q)(1+eps) per norm comparison; the constants below propagate
// those factors through the respective estimates and are recorded in
// data/john_constants.json.

double hadamard_constant(int q, double mvee_eps = 1e-3);       // q^{q/2} (1+e)^q
double svd_ratio_constant(int q, double mvee_eps = 1e-3);      // q^q (1+e)^{2q}
double block_det_constant(int q, int k, double mvee_eps = 1e-3);  // q^q k^k (1+e)^{2(q+k)}
double gelfand_ratio_constant(int q, double mvee_eps = 1e-3);

}  // namespace metvol
