#include "metvol/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace metvol {

GrassmannBudget grassmann_sweep_budget() { return GrassmannBudget{12, 60, 0.4}; }

namespace {

Matrix orthonormalize(const Matrix& M) {
    Eigen::HouseholderQR<Matrix> qr(M);
    Matrix Q = qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
    return Q;
}

// Multi-start tangent hill climb over orthonormal d x q frames.
Matrix frame_climb(const std::vector<Matrix>& starts,
                   const std::function<double(const Matrix&)>& objective,
                   const GrassmannBudget& budget, RngStream& rng) {
    double best = -kInf;
    Matrix best_frame = starts.front();
    for (const Matrix& start : starts) {
        Matrix M = start;
        double val = objective(M);
        double step = budget.step0;
        for (int it = 0; it < budget.iters && step > 1e-8; ++it) {
            Matrix Z(M.rows(), M.cols());
            for (int r = 0; r < Z.rows(); ++r)
                for (int c = 0; c < Z.cols(); ++c) Z(r, c) = rng.gaussian();
            Matrix H = Z - M * (M.transpose() * Z);  // tangent direction
            Matrix cand = orthonormalize(M + step * H);
            const double v = objective(cand);
            if (v > val) {
                M = cand;
                val = v;
                step *= 1.4;
            } else {
                step *= 0.6;
            }
        }
        if (val >= best || best == -kInf) {
            best = val;
            best_frame = M;
        }
    }
    return best_frame;
}

std::vector<Matrix> frame_starts(int d, int q, int n_random, const Matrix* principal,
                                 RngStream& rng) {
    std::vector<Matrix> starts;
    if (principal) starts.push_back(*principal);
    Matrix coord = Matrix::Zero(d, q);
    for (int i = 0; i < q; ++i) coord(i, i) = 1.0;
    starts.push_back(coord);
    for (int s = 0; s < n_random; ++s) {
        Matrix Z(d, q);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < q; ++c) Z(r, c) = rng.gaussian();
        starts.push_back(orthonormalize(Z));
    }
    return starts;
}

}  // namespace

WitnessedValue max_volume_growth(const AmbientSpace& space, const OperatorMatrix& A, int q,
                                 const GrassmannBudget& budget, std::uint64_t seed,
                                 const Tolerances& tol) {
    const int d = space.dim;
    if (q > tol.q_max) throw PreconditionError("dimension beyond volume budget");
    RngStream rng(seed, 0x5c1);

    Eigen::JacobiSVD<Matrix> asvd(A, Eigen::ComputeFullV);
    const double smax = asvd.singularValues()[0];
    if (!(smax > 0.0) || asvd.singularValues()[q - 1] <= tol.tau_rank_rel * smax) {
        // rank(A) < q: every q-dimensional determinant vanishes
        WitnessedValue out;
        out.witness = Subspace(Matrix::Identity(d, d).leftCols(q));
        return out;
    }
    Matrix principal = asvd.matrixV().leftCols(q);

    auto surrogate = [&](const Matrix& M) {
        return log_det_surrogate(space, A, Subspace(M));
    };
    auto starts = frame_starts(d, q, budget.restarts, &principal, rng);
    if (q == 1) {
        // V_1 is the operator norm; its maximizer (exact for the euclidean
        // and polyhedral norms) is the strongest start.
        OperatorNormResult on = operator_norm(space, A);
        if (on.argmax.size() == d && on.argmax.norm() > 0)
            starts.push_back(Matrix(on.argmax / on.argmax.norm()));
    }
    Matrix bestM = frame_climb(starts, surrogate, budget, rng);

    WitnessedValue out;
    out.witness = Subspace(bestM);
    DetEstimate det = determinant(space, A, out.witness, {}, rng.next_u64(), tol);
    out.value = det.value;
    out.rel_error = det.rel_error;
    return out;
}

WitnessedValue gelfand_number(const AmbientSpace& space, const OperatorMatrix& A, int q,
                              const GrassmannBudget& budget, std::uint64_t seed,
                              const Tolerances&) {
    const int d = space.dim;
    if (q > d) throw PreconditionError("gelfand index beyond the ambient dimension");
    RngStream rng(seed, 0x6e1);

    if (q == 1) {
        OperatorNormResult on = operator_norm(space, A);
        WitnessedValue out;
        out.value = on.value;
        out.witness = Subspace(Matrix::Identity(d, d));
        return out;
    }

    const int k = q - 1;  // dimension of the annihilator frame
    OptBudget inner = inner_budget();
    auto restriction_of = [&](const Matrix& W) {
        return Subspace(Subspace(W).annihilator_basis());
    };
    auto objective = [&](const Matrix& W) {
        Subspace R = restriction_of(W);
        return -restricted_operator_norm(space, A, R, inner, 0x11).value;
    };

    Eigen::JacobiSVD<Matrix> asvd(A, Eigen::ComputeFullV);
    Matrix principal = asvd.matrixV().leftCols(k);
    auto starts = frame_starts(d, k, budget.restarts, &principal, rng);
    Matrix bestW = frame_climb(starts, objective, budget, rng);

    WitnessedValue out;
    out.witness = restriction_of(bestW);
    out.value = restricted_operator_norm(space, A, out.witness, OptBudget{}, rng.next_u64()).value;
    return out;
}

GelfandVolumeCheck gelfand_volume_check(const AmbientSpace& space, const OperatorMatrix& A,
                                        int q, const GrassmannBudget& budget,
                                        std::uint64_t seed, const Tolerances& tol) {
    if (q < 2) throw PreconditionError("gelfand_volume_check needs q >= 2");
    GelfandVolumeCheck out;
    RngStream rng(seed, 0x6c3);
    out.vq = max_volume_growth(space, A, q, budget, rng.next_u64(), tol).value;
    out.vq_prev = max_volume_growth(space, A, q - 1, budget, rng.next_u64(), tol).value;
    out.cq = gelfand_number(space, A, q, budget, rng.next_u64(), tol).value;
    if (out.vq_prev <= 0.0) {
        out.finite_rank_branch = true;
        return out;
    }
    out.ratio = out.vq / (out.cq * out.vq_prev);
    const double C = gelfand_ratio_constant(q);
    out.lower = 1.0 / C;
    out.upper = C;
    out.within_bounds = out.ratio >= out.lower && out.ratio <= out.upper;
    return out;
}

VolumeGrowthTail volume_growth_tail(const AmbientSpace& space, const OperatorMatrix& A,
                                    int q_lo, int q_hi, const GrassmannBudget& budget,
                                    std::uint64_t seed, const Tolerances& tol) {
    VolumeGrowthTail out;
    RngStream rng(seed, 0x7a1);
    Eigen::JacobiSVD<Matrix> svd(A);
    const double smax = svd.singularValues()[0];
    out.numerical_rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol.tau_rank_rel * smax) ++out.numerical_rank;

    for (int q = q_lo; q <= q_hi; ++q) {
        const double v = max_volume_growth(space, A, q, budget, rng.next_u64(), tol).value;
        out.q.push_back(q);
        out.normalized_log_vq.push_back(v > 0.0 ? std::log(v) / q : -kInf);
    }
    for (std::size_t i = 1; i < out.q.size(); ++i) {
        if (out.q[i - 1] >= out.numerical_rank &&
            out.normalized_log_vq[i] > out.normalized_log_vq[i - 1] + 1e-9)
            out.tail_monotone = false;
    }
    return out;
}

SingularProfile singular_profile(const AmbientSpace& space, const OperatorMatrix& A, int q_max,
                                 const GrassmannBudget& budget, std::uint64_t seed,
                                 const Tolerances& tol) {
    SingularProfile out;
    RngStream rng(seed, 0x51f);
    for (int q = 1; q <= q_max; ++q) {
        if (q <= tol.q_max) {
            WitnessedValue v = max_volume_growth(space, A, q, budget, rng.next_u64(), tol);
            out.vq[q] = v.value;
            DetEstimate audit = determinant(space, A, v.witness, {}, rng.next_u64(), tol);
            out.witness_audit[q] = audit.value;
            out.argmax_subspaces.emplace(q, v.witness);
        }
        if (q <= space.dim) {
            WitnessedValue c = gelfand_number(space, A, q, budget, rng.next_u64(), tol);
            out.cq[q] = c.value;
            out.argmin_restrictions.emplace(q, c.witness);
        }
    }
    return out;
}

}  // namespace metvol
