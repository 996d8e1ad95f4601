#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metvol/rng.hpp"
#include "metvol/types.hpp"

namespace metvol {

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

enum class NormKind { euclidean, lp, linf, weighted_lp, custom };

// A pluggable norm oracle on R^d.  The standard kinds carry enough structure
// for exact duals and polyhedral vertex enumeration; `custom` is a plain
// callable (used e.g. for pullback norms on restricted cocycles).
class NormSpec {
public:
    NormSpec() : kind_(NormKind::euclidean) {}

    static NormSpec euclidean() { return NormSpec(); }
    static NormSpec lp(double p);
    static NormSpec l1() { return lp(1.0); }
    static NormSpec linf();
    static NormSpec weighted_lp(double p, Vector weights);
    static NormSpec custom(std::function<double(const Vector&)> oracle,
                           std::string label = "custom");

    NormKind kind() const { return kind_; }
    double p() const { return p_; }
    const Vector& weights() const { return weights_; }
    const std::string& label() const { return label_; }

    double operator()(const Vector& v) const;

    bool is_euclidean() const { return kind_ == NormKind::euclidean; }
    // l1 or linf: the unit ball is a polytope with enumerable extreme points.
    bool is_polyhedral() const {
        return kind_ == NormKind::linf || (kind_ == NormKind::lp && p_ == 1.0);
    }
    bool has_closed_dual() const;
    // Dual norm under the standard pairing; lp <-> lp'.  Requires a closed
    // dual (custom norms build their dual through AmbientSpace::dual()).
    NormSpec dual() const;

private:
    NormKind kind_;
    double p_ = 2.0;
    Vector weights_;
    std::function<double(const Vector&)> oracle_;
    std::string label_;
};

// A finite-dimensional real vector space with a norm oracle.
struct AmbientSpace {
    int dim = 1;
    NormSpec norm;

    AmbientSpace() = default;
    AmbientSpace(int d, NormSpec n) : dim(d), norm(std::move(n)) {
        if (d < 1) throw PreconditionError("ambient dimension must be >= 1");
    }

    double norm_of(const Vector& v) const { return norm(v); }

    bool euclidean() const { return norm.is_euclidean(); }

    // Dual space (same dimension, dual norm).  Custom norms get a numeric
    // dual oracle computed by sphere maximization.
    AmbientSpace dual() const;

    // Extreme points of the unit ball when the norm is polyhedral
    // (l1: +-e_i; linf: sign vectors).  Empty otherwise or when too many.
    std::vector<Vector> ball_vertices(int max_count = 4096) const;
};

// ---------------------------------------------------------------------------
// Subspaces and splittings
// ---------------------------------------------------------------------------

// A q-dimensional subspace carried by a coordinate-orthonormal basis matrix.
// Constructors re-condition the input basis (the carried subspace is
// unchanged, only its representation is conditioned).
class Subspace {
public:
    // Empty placeholder (no ambient attached); usable only after assignment.
    Subspace() : basis_(0, 0) {}
    Subspace(Matrix basis, const Tolerances& tol = default_tolerances());

    static Subspace coordinate(int ambient_dim, std::vector<int> axes);

    const Matrix& basis() const { return basis_; }
    int dim() const { return static_cast<int>(basis_.cols()); }
    int ambient_dim() const { return static_cast<int>(basis_.rows()); }
    double condition_estimate() const { return condition_estimate_; }

    Vector embed(const Vector& coords) const { return basis_ * coords; }
    Vector coords_of(const Vector& v) const { return basis_.transpose() * v; }

    // Coordinate-euclidean residual |v - proj(v)| / |v|; membership is a
    // linear-algebra fact independent of the ambient norm.
    double membership_residual(const Vector& v) const;
    bool contains(const Vector& v, double tau = 1e-8) const {
        return membership_residual(v) <= tau;
    }

    // Orthonormal columns spanning the coordinate-orthogonal complement.
    Matrix annihilator_basis() const;

private:
    Matrix basis_;
    double condition_estimate_ = 1.0;
};

// Annihilator U° as a subspace of the dual coordinates.
Subspace annihilator(const Subspace& U);

// A topological splitting E (+) F carried with its projection matrix.
struct Splitting {
    Subspace E;
    Subspace F;
    Matrix projection;      // pi_{E || F}, d x d
    double proj_norm;       // measured |pi_{E || F}| (lower bound)
    bool certified = true;  // construction-specific certificate (see docs)
};

// Builds the splitting from bases; throws PreconditionError when E and F do
// not span the ambient space.
Splitting make_splitting(const AmbientSpace& space, const Subspace& E, const Subspace& F,
                         const Tolerances& tol = default_tolerances());

// Residuals of the projection contract: idempotency, range == E, kernel == F.
double splitting_residual(const Splitting& s);

// ---------------------------------------------------------------------------
// Sphere optimization (shared by the geometry and spectral operations)
// ---------------------------------------------------------------------------

struct OptBudget {
    int starts = 32;       // random multi-starts
    int iters = 400;       // Nelder-Mead iterations per start
    double tol = 1e-9;     // local refinement tolerance
    bool use_vertices = true;
    int refine_top = 6;    // starts kept for local refinement
};

// Smaller budget for inner loops of nested searches.
OptBudget inner_budget();
// Budget for large property sweeps.
OptBudget sweep_budget();

struct SphereOptResult {
    double value = 0.0;
    Vector point;  // ambient vector with |point| = 1
};

// Maximize (resp. minimize) f over the unit sphere of `space` intersected
// with the span of the orthonormal columns of `frame` (frame = identity for
// the full space).  Values are certified one-sided: best found.  `hints`
// are ambient points seeding the search (e.g. euclidean extremizers).
SphereOptResult sphere_maximize(const AmbientSpace& space, const Matrix& frame,
                                const std::function<double(const Vector&)>& f,
                                const OptBudget& budget, RngStream rng,
                                const std::vector<Vector>& hints = {});
SphereOptResult sphere_minimize(const AmbientSpace& space, const Matrix& frame,
                                const std::function<double(const Vector&)>& f,
                                const OptBudget& budget, RngStream rng,
                                const std::vector<Vector>& hints = {});

// ---------------------------------------------------------------------------
// Geometry operations
// ---------------------------------------------------------------------------

struct OperatorNormResult {
    double value = 0.0;  // certified lower bound
    Vector argmax;
    bool exact = false;  // closed form or exhaustive vertex enumeration
};

// Induced operator norm sup_{|v|=1} |Av|.  Exact for euclidean (SVD) and
// polyhedral norms (vertex enumeration); multi-start ascent otherwise.
OperatorNormResult operator_norm(const AmbientSpace& space, const OperatorMatrix& A,
                                 const OptBudget& budget = {}, std::uint64_t seed = 0);

// Restricted operator norm |A|_R| for R carried by `R`.
OperatorNormResult restricted_operator_norm(const AmbientSpace& space, const OperatorMatrix& A,
                                            const Subspace& R, const OptBudget& budget = {},
                                            std::uint64_t seed = 0);

// inf_{f in F} |v - f|; convex minimization in F-coordinates.  Exact for
// euclidean (orthogonal projection) and for l1/linf (small LP vertex
// enumeration); Nelder-Mead refinement otherwise.
double dist_to_subspace(const AmbientSpace& space, const Vector& v, const Subspace& F);
// Same, returning the minimizing coordinates in F.
std::pair<double, Vector> dist_to_subspace_argmin(const AmbientSpace& space, const Vector& v,
                                                  const Subspace& F);

struct AngleResult {
    double sin_theta = 0.0;  // in [0, 1]
    double proj_norm = 1.0;  // 1 / sin_theta, kInf when below tau_angle
};

// Minimal angle from E to F: sin theta(E, F) = inf over unit e in E of
// d(e, F); proj_norm is the norm of the associated projection.
AngleResult min_angle(const AmbientSpace& space, const Subspace& E, const Subspace& F,
                      const OptBudget& budget = {}, std::uint64_t seed = 0,
                      const Tolerances& tol = default_tolerances());

// One-sided gap sup_{e in U, |e|=1} d(e, V); certified lower bound.
double gap(const AmbientSpace& space, const Subspace& U, const Subspace& V,
           const OptBudget& budget = {}, std::uint64_t seed = 0);

// Hausdorff distance of unit spheres.
double hausdorff(const AmbientSpace& space, const Subspace& U, const Subspace& V,
                 const OptBudget& budget = {}, std::uint64_t seed = 0);

// Topological complement with |pi_{E || F}| <= sqrt(q) + eps_opt.  Primary
// construction: maximal-volume unit basis of E with norming functionals,
// F = intersection of their kernels; an ellipsoid-based projection and a
// local refinement of the measured projection norm serve as fallbacks.
// certified reflects whether the sqrt(q) bound was met.
Splitting auerbach_complement(const AmbientSpace& space, const Subspace& E,
                              const OptBudget& budget = {}, std::uint64_t seed = 0,
                              const Tolerances& tol = default_tolerances());

// Splitting (E1, F1) with F1 = preimage of F2 under A; the projection is
// (A|_{E1})^{-1} o pi_{E2 || F2} o A.
Splitting preimage_complement(const AmbientSpace& space, const OperatorMatrix& A,
                              const Subspace& E1, const Subspace& F2,
                              const Tolerances& tol = default_tolerances());

struct PerturbedSplittingResult {
    bool is_splitting = false;
    double dist = 0.0;             // d_H(E, E')
    double sin_theta = 0.0;        // sin theta(E, F)
    double graph_norm_bound = 0.0; // 2 d / (sin theta - d)
    double measured = 0.0;         // |pi_{F || E'}|_E| (lower bound)
};

// Stability of the splitting (E, F) under perturbing E to E'; requires
// d_H(E, E') < sin theta(E, F).
PerturbedSplittingResult perturbed_splitting(const AmbientSpace& space, const Subspace& E,
                                             const Subspace& Eprime, const Subspace& F,
                                             const OptBudget& budget = {},
                                             std::uint64_t seed = 0,
                                             const Tolerances& tol = default_tolerances());

// Haar-random q-dimensional subspace (coordinate-euclidean distribution).
Subspace random_subspace(int ambient_dim, int q, RngStream& rng);

// Extreme points of U ∩ B for polyhedral ambient norms (l1 / linf), up to
// sign.  Suprema of convex objectives over the section are attained here,
// which makes gap and restricted-norm computations exact.  Empty when the
// norm is not polyhedral or the enumeration would be too large.
std::vector<Vector> section_ball_vertices(const AmbientSpace& space, const Subspace& U);

}  // namespace metvol
