#include "metvol/verify.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <mutex>
#include <thread>

#include "metvol/cocycles.hpp"

namespace metvol {

namespace {

int thread_count(const VerifyCounts& c) {
    if (c.threads > 0) return c.threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 2;
}

// Runs body(i, rng) for i in [0, count) across threads.  The body returns a
// violation margin (<= 0 means the inequality held) or NaN to skip a draw.
Certificate sweep(std::string id, std::string desc, long count, std::uint64_t seed,
                  int threads,
                  const std::function<double(long, RngStream&)>& body) {
    std::atomic<long> evaluated{0}, violations{0};
    std::mutex mtx;
    double worst = -kInf;

    auto chunk = [&](long lo, long hi) {
        double local_worst = -kInf;
        long local_eval = 0, local_viol = 0;
        for (long i = lo; i < hi; ++i) {
            RngStream rng(seed, 0x77ee70000ULL + static_cast<std::uint64_t>(i));
            const double margin = body(i, rng);
            if (std::isnan(margin)) continue;
            ++local_eval;
            if (margin > 0) ++local_viol;
            local_worst = std::max(local_worst, margin);
        }
        evaluated += local_eval;
        violations += local_viol;
        std::lock_guard<std::mutex> lock(mtx);
        worst = std::max(worst, local_worst);
    };

    const int T = std::max(1, threads);
    std::vector<std::future<void>> futs;
    const long per = (count + T - 1) / T;
    for (int t = 0; t < T; ++t) {
        const long lo = t * per, hi = std::min(count, (t + 1) * per);
        if (lo >= hi) break;
        futs.push_back(std::async(std::launch::async, chunk, lo, hi));
    }
    for (auto& f : futs) f.get();

    Certificate c;
    c.id = std::move(id);
    c.description = std::move(desc);
    c.count = evaluated.load();
    c.violations = violations.load();
    c.worst_margin = worst;
    c.pass = c.violations == 0;
    return c;
}

NormSpec norm_cycle(long i) {
    switch (i % 3) {
        case 0: return NormSpec::euclidean();
        case 1: return NormSpec::l1();
        default: return NormSpec::linf();
    }
}

Matrix random_matrix(int d, RngStream& rng, double scale = 1.0) {
    Matrix A(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) A(r, c) = scale * rng.gaussian();
    return A;
}

// Invertible matrix with singular values in [lo, hi].
Matrix conditioned_matrix(int d, double lo, double hi, RngStream& rng) {
    Matrix Z1 = random_matrix(d, rng), Z2 = random_matrix(d, rng);
    Matrix Q1 = Eigen::HouseholderQR<Matrix>(Z1).householderQ();
    Matrix Q2 = Eigen::HouseholderQR<Matrix>(Z2).householderQ();
    Vector s(d);
    for (int i = 0; i < d; ++i) s[i] = rng.uniform(lo, hi);
    return Q1 * s.asDiagonal() * Q2.transpose();
}

double exact_inverse_norm(const AmbientSpace& space, const Matrix& A) {
    Matrix Ai = A.inverse();
    return operator_norm(space, Ai).value;  // exact for euclidean/l1/linf
}

}  // namespace

// ---------------------------------------------------------------------------
// Geometry suite
// ---------------------------------------------------------------------------

SuiteResult verify_geometry(std::uint64_t seed, const VerifyCounts& counts) {
    SuiteResult out;
    out.suite = "geometry";
    const int T = thread_count(counts);
    const Tolerances tol;
    const double eps = tol.eps_opt;
    const OptBudget budget = sweep_budget();

    // Items 1-3 of the gap inequalities share each drawn pair; three
    // accumulator certificates are filled from one pass.
    {
        std::atomic<long> n1{0}, n2{0}, n3{0}, v1{0}, v2{0}, v3{0};
        std::mutex mtx;
        double w1 = -kInf, w2 = -kInf, w3 = -kInf;
        const long total = 3 * counts.gap_pairs;

        auto chunk = [&](long lo, long hi) {
            double lw1 = -kInf, lw2 = -kInf, lw3 = -kInf;
            long ln1 = 0, ln2 = 0, ln3 = 0, lv1 = 0, lv2 = 0, lv3 = 0;
            for (long i = lo; i < hi; ++i) {
                RngStream rng(seed, 0x9a90000ULL + i);
                AmbientSpace space(3 + rng.uniform_int(4), norm_cycle(i));
                const int d = space.dim;
                const int q = 1 + rng.uniform_int(std::min(3, d - 1));
                Subspace U = random_subspace(d, q, rng);
                Subspace V = (i % 2 == 0)
                                 ? random_subspace(d, q, rng)
                                 : Subspace(U.basis() +
                                            std::pow(10.0, rng.uniform(-3.0, -0.3)) *
                                                random_matrix(d, rng).leftCols(q));
                const double g1 = gap(space, U, V, budget, rng.next_u64());
                const double g2 = gap(space, V, U, budget, rng.next_u64());
                // Vertex hints make the sandwich structural; a lean budget
                // suffices for the d_H refinement.
                const OptBudget dh_budget{1, 60, 1e-9, true, 2};
                const double dh = hausdorff(space, U, V, dh_budget, rng.next_u64());
                const double gmax = std::max(g1, g2);

                ++ln1;
                const double m1 =
                    std::max(gmax - dh - 2 * eps, dh - 2 * gmax - 2 * eps);
                if (m1 > 0) ++lv1;
                lw1 = std::max(lw1, m1);

                AmbientSpace dual = space.dual();
                const double gd =
                    gap(dual, annihilator(V), annihilator(U), budget, rng.next_u64());
                ++ln2;
                const double m2 = std::abs(g1 - gd) - 2 * eps;
                if (m2 > 0) ++lv2;
                lw2 = std::max(lw2, m2);

                if (g1 < 1.0 / q - 1e-6) {
                    ++ln3;
                    const double bound = q * g1 / (1.0 - q * g1);
                    const double m3 = g2 - bound - eps;
                    if (m3 > 0) ++lv3;
                    lw3 = std::max(lw3, m3);
                }
            }
            n1 += ln1; n2 += ln2; n3 += ln3;
            v1 += lv1; v2 += lv2; v3 += lv3;
            std::lock_guard<std::mutex> lock(mtx);
            w1 = std::max(w1, lw1);
            w2 = std::max(w2, lw2);
            w3 = std::max(w3, lw3);
        };
        std::vector<std::future<void>> futs;
        const long per = (total + T - 1) / T;
        for (int t = 0; t < T; ++t) {
            const long lo = t * per, hi = std::min(total, (t + 1) * per);
            if (lo >= hi) break;
            futs.push_back(std::async(std::launch::async, chunk, lo, hi));
        }
        for (auto& f : futs) f.get();

        auto push = [&](const char* id, const char* desc, long n, long v, double w) {
            Certificate c;
            c.id = id;
            c.description = desc;
            c.count = n;
            c.violations = v;
            c.worst_margin = w;
            c.pass = v == 0;
            out.certificates.push_back(std::move(c));
        };
        push("gap_sandwich", "max one-sided gap <= d_H <= twice the max", n1, v1, w1);
        push("gap_duality", "gap(U,V) equals the dual-annihilator gap", n2, v2, w2);
        push("gap_estimate", "small gap controls the reverse gap", n3, v3, w3);
    }

    out.certificates.push_back(sweep(
        "auerbach_projection", "complement projection norm within sqrt(q) + eps",
        counts.auerbach_draws, seed ^ 0xa0e, T, [&](long i, RngStream& rng) {
            NormSpec norms[5] = {NormSpec::euclidean(), NormSpec::l1(), NormSpec::linf(),
                                 NormSpec::lp(1.5), NormSpec::lp(3.0)};
            const int d = 3 + rng.uniform_int(6);
            AmbientSpace space(d, norms[i % 5]);
            const int q = 1 + rng.uniform_int(std::min(4, d - 1));
            Subspace E = random_subspace(d, q, rng);
            Splitting s = auerbach_complement(space, E, inner_budget(), rng.next_u64());
            return s.proj_norm - (std::sqrt(double(q)) + eps);
        }));

    {
        // Asymmetry of the minimal angle is expected and demonstrated.
        AmbientSpace space(2, NormSpec::linf());
        Matrix be(2, 1), bf(2, 1);
        be << 1, 0;
        bf << 1, 1;
        const double s1 = min_angle(space, Subspace(be), Subspace(bf)).sin_theta;
        const double s2 = min_angle(space, Subspace(bf), Subspace(be)).sin_theta;
        Certificate c;
        c.id = "angle_asymmetry";
        c.description = "min_angle(E,F) and min_angle(F,E) can differ";
        c.count = 1;
        c.violations = std::abs(s1 - s2) > 0.1 ? 0 : 1;
        c.worst_margin = 0.1 - std::abs(s1 - s2);
        c.pass = c.violations == 0;
        out.certificates.push_back(std::move(c));
    }

    out.certificates.push_back(sweep(
        "projection_norm_floor", "projection norms stay above 1 - eps", counts.misc,
        seed ^ 0x1f0, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(4), norm_cycle(i));
            const int d = space.dim;
            const int q = 1 + rng.uniform_int(d - 1);
            Subspace E = random_subspace(d, q, rng);
            Subspace F = random_subspace(d, d - q, rng);
            try {
                Splitting s = make_splitting(space, E, F);
                return (1.0 - eps) - s.proj_norm;
            } catch (const PreconditionError&) {
                return std::nan("");
            }
        }));

    out.certificates.push_back(sweep(
        "perturbed_splitting", "graph-norm bound for perturbed splittings",
        counts.perturbed_triples, seed ^ 0x9e5, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(4), norm_cycle(i));
            const int d = space.dim;
            const int q = 1 + rng.uniform_int(std::min(3, d - 1));
            Subspace E = random_subspace(d, q, rng);
            Splitting comp = auerbach_complement(space, E, inner_budget(), rng.next_u64());
            const double st = min_angle(space, E, comp.F, budget, rng.next_u64()).sin_theta;
            for (int attempt = 0; attempt < 6; ++attempt) {
                const double sigma =
                    st * std::pow(10.0, rng.uniform(-3.0, -0.45));
                Subspace Ep(E.basis() + sigma * random_matrix(d, rng).leftCols(q));
                try {
                    PerturbedSplittingResult r = perturbed_splitting(
                        space, E, Ep, comp.F, budget, rng.next_u64());
                    if (!r.is_splitting) return 1.0;  // must split below the angle
                    return r.measured - r.graph_norm_bound - 2 * eps;
                } catch (const PreconditionError&) {
                    continue;  // d_H came out above the angle; draw closer
                }
            }
            return std::nan("");
        }));

    return out;
}

// ---------------------------------------------------------------------------
// Volume suite
// ---------------------------------------------------------------------------

SuiteResult verify_volume(std::uint64_t seed, const VerifyCounts& counts) {
    SuiteResult out;
    out.suite = "volume";
    const int T = thread_count(counts);
    const Tolerances tol;
    const double eps = tol.eps_opt;

    out.certificates.push_back(sweep(
        "john_bound", "gram norm within sqrt(q) of the ambient norm", counts.john_draws,
        seed ^ 0x70b, T, [&](long i, RngStream& rng) {
            const int q = 1 + rng.uniform_int(4);
            const int d = std::min(8, q + 1 + rng.uniform_int(8 - q));
            NormSpec norm;
            if (i % 3 == 0) norm = NormSpec::l1();
            else if (i % 3 == 1) norm = NormSpec::linf();
            else {
                Vector w(d);
                for (int k = 0; k < d; ++k) w[k] = rng.uniform(0.5, 2.0);
                norm = NormSpec::weighted_lp(1.5, w);
            }
            AmbientSpace space(d, norm);
            Subspace E = random_subspace(d, q, rng);
            JohnForm jf = john_form(space, E, {}, rng.next_u64());
            const double factor = 1.0 + 1e-3;
            double worst = -kInf;
            for (long v = 0; v < counts.john_vectors; ++v) {
                Vector c = rng.gaussian_vector(q);
                const double amb = space.norm_of(E.basis() * c);
                const double jn = john_norm(jf, c);
                worst = std::max(worst, amb / std::sqrt(double(q)) - jn * factor);
                worst = std::max(worst, jn - std::sqrt(double(q)) * amb * factor);
            }
            return worst;
        }));

    out.certificates.push_back(sweep(
        "john_normalization", "gram Lebesgue volume matches the induced volume",
        counts.misc, seed ^ 0x70c, T, [&](long i, RngStream& rng) {
            const int q = 2 + rng.uniform_int(3);
            const int d = q + 1 + rng.uniform_int(3);
            AmbientSpace space(d, i % 2 ? NormSpec::linf() : NormSpec::lp(1.5));
            Subspace E = random_subspace(d, q, rng);
            JohnForm jf = john_form(space, E, {}, rng.next_u64());
            const double lhs = omega_q(q) / std::sqrt(jf.gram.determinant());
            return std::abs(lhs / jf.ball_volume.value - 1.0) - 1e-9;
        }));

    out.certificates.push_back(sweep(
        "parallelepiped_scaling", "m_E P[a v1, ...] = a m_E P[...]", counts.misc,
        seed ^ 0x5ca, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            const int q = 1 + rng.uniform_int(std::min(3, d));
            Subspace E = random_subspace(d, q, rng);
            std::vector<Vector> vs;
            for (int k = 0; k < q; ++k) vs.push_back(E.basis() * rng.gaussian_vector(q));
            const double a = rng.uniform(0.2, 4.0);
            std::vector<Vector> ws = vs;
            ws[0] *= a;
            const double v1 = parallelepiped_volume(space, E, vs, {}, 7).value;
            const double v2 = parallelepiped_volume(space, E, ws, {}, 7).value;
            if (v1 == 0.0) return std::nan("");
            return std::abs(v2 / (a * v1) - 1.0) - 1e-9;
        }));

    out.certificates.push_back(sweep(
        "det_multiplicative", "det(BA|E) = det(B|AE) det(A|E)", counts.block_triples,
        seed ^ 0xd37, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            const int q = 1 + rng.uniform_int(std::min(3, d));
            Matrix A = conditioned_matrix(d, 0.4, 2.5, rng);
            Matrix B = conditioned_matrix(d, 0.4, 2.5, rng);
            Subspace E = random_subspace(d, q, rng);
            DetEstimate da = determinant(space, A, E, {}, rng.next_u64());
            Subspace AE(A * E.basis());
            DetEstimate db = determinant(space, B, AE, {}, rng.next_u64());
            DetEstimate dba = determinant(space, Matrix(B * A), E, {}, rng.next_u64());
            const double lhs =
                std::abs(std::log(dba.value) - std::log(db.value) - std::log(da.value));
            const double slack =
                3.0 * (da.rel_error + db.rel_error + dba.rel_error) + 1e-8;
            return lhs - slack;
        }));

    out.certificates.push_back(sweep(
        "sample_vol_sandwich", "parallelepiped volume vs distance product",
        counts.misc, seed ^ 0x5a0, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            const int q = 2 + rng.uniform_int(2);
            if (q > d - 1) return std::nan("");
            Subspace E = random_subspace(d, q, rng);
            std::vector<Vector> vs;
            for (int k = 0; k < q; ++k) vs.push_back(E.basis() * rng.gaussian_vector(q));
            VolumeEstimate vol = parallelepiped_volume(space, E, vs, {}, rng.next_u64());
            if (vol.value == 0.0) return std::nan("");
            double prod = space.norm_of(vs[q - 1]);
            for (int k = 0; k < q - 1; ++k) {
                Matrix tail(d, q - 1 - k);
                for (int j = k + 1; j < q; ++j) tail.col(j - k - 1) = vs[j];
                prod *= dist_to_subspace(space, vs[k], Subspace(tail));
            }
            const double C = hadamard_constant(q) * (1.0 + 3.0 * vol.rel_error + eps);
            const double ratio = vol.value / prod;
            return std::max(ratio / C - 1.0, 1.0 / (ratio * C) - 1.0);
        }));

    out.certificates.push_back(sweep(
        "det_continuity", "log-determinant modulus of continuity", counts.misc,
        seed ^ 0xdc0, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            const int q = 1 + rng.uniform_int(std::min(3, d));
            Matrix A = conditioned_matrix(d, 0.5, 2.0, rng);
            Matrix B = random_matrix(d, rng);
            Subspace E = random_subspace(d, q, rng);
            double worst = -kInf;
            for (double t : {1e-2, 1e-3, 1e-4}) {
                Matrix An = A + t * B;
                DetEstimate da = determinant(space, A, E, {}, rng.next_u64());
                DetEstimate dn = determinant(space, An, E, {}, rng.next_u64());
                if (da.value == 0.0 || dn.value == 0.0) continue;
                const double diff = operator_norm(space, Matrix(An - A)).value;
                const double invmax = std::max(exact_inverse_norm(space, A),
                                               exact_inverse_norm(space, An));
                const double rhs = q * std::log1p(invmax * diff) +
                                   3.0 * (da.rel_error + dn.rel_error) + 1e-9;
                worst = std::max(worst,
                                 std::abs(std::log(dn.value / da.value)) - rhs);
            }
            return worst;
        }));

    out.certificates.push_back(sweep(
        "ball_section_bound", "section mass under (2r)^q omega_q", counts.ball_sections,
        seed ^ 0xba1, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(4), norm_cycle(i));
            const int d = space.dim;
            const int q = 1 + rng.uniform_int(std::min(3, d - 1));
            Subspace E = random_subspace(d, q, rng);
            Vector x = rng.gaussian_vector(d) * rng.uniform(0.0, 1.0);
            const double r = rng.uniform(0.3, 1.5);
            VolumeEstimate v = ball_section_volume(space, E, x, r, {}, rng.next_u64());
            const double bound = std::pow(2.0 * r, q) * omega_q(q);
            return v.value - bound - 3.0 * v.rel_error * v.value;
        }));

    out.certificates.push_back(sweep(
        "block_det_sandwich", "block determinant ratio within pinned bounds",
        3 * counts.block_triples, seed ^ 0xb0b, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            const int q = 2 + rng.uniform_int(std::min(3, d) - 1);
            const int k = 1 + rng.uniform_int(q - 1);
            Subspace E = random_subspace(d, k, rng);
            Subspace F = random_subspace(d, q - k, rng);
            Matrix A = conditioned_matrix(d, 0.4, 2.5, rng);
            try {
                BlockDetBounds b =
                    block_det_bounds(space, A, E, F, {}, sweep_budget(), rng.next_u64());
                const double slack = 1.0 + 3.0e-2;
                return std::max(b.lower / (b.ratio * slack) - 1.0,
                                b.ratio / (b.upper * slack) - 1.0);
            } catch (const PreconditionError&) {
                return std::nan("");
            }
        }));

    out.certificates.push_back(sweep(
        "min_expansion", "minimal expansion controls the determinant", counts.misc,
        seed ^ 0x3e9, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            const int q = 1 + rng.uniform_int(std::min(3, d));
            Matrix A = conditioned_matrix(d, 0.3, 3.0, rng);
            Subspace E = random_subspace(d, q, rng);
            MinExpansionBound b =
                min_expansion_bound(space, A, E, {}, sweep_budget(), rng.next_u64());
            return b.rhs * (1.0 - 5e-2) - b.lhs * (1.0 + eps);
        }));

    out.certificates.push_back(sweep(
        "hadamard_direction", "determinant under the product of expansions",
        counts.misc, seed ^ 0xada, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            const int q = 2 + rng.uniform_int(std::min(3, d) - 1);
            Matrix A = conditioned_matrix(d, 0.4, 2.5, rng);
            Subspace V = random_subspace(d, q, rng);
            ApproxSvdBasis b = approx_svd_basis(space, A, V, {}, rng.next_u64());
            const double C = hadamard_constant(q) *
                             (1.0 + 3.0 * b.det.rel_error + eps);
            return b.det.value - C * b.product;
        }));

    out.certificates.push_back(sweep(
        "svd_product_factor", "determinant vs basis expansion product",
        counts.misc, seed ^ 0x5fd, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            const int q = 2 + rng.uniform_int(std::min(3, d) - 1);
            Matrix A = conditioned_matrix(d, 0.4, 2.5, rng);
            Subspace V = random_subspace(d, q, rng);
            ApproxSvdBasis b = approx_svd_basis(space, A, V, {}, rng.next_u64());
            if (b.det.value == 0.0) return std::nan("");
            const double C =
                svd_ratio_constant(q) * (1.0 + 3.0 * b.det.rel_error + eps);
            const double ratio = b.det.value / b.product;
            return std::max(ratio / C - 1.0, 1.0 / (ratio * C) - 1.0);
        }));

    return out;
}

// ---------------------------------------------------------------------------
// Spectral suite
// ---------------------------------------------------------------------------

SuiteResult verify_spectral(std::uint64_t seed, const VerifyCounts& counts) {
    SuiteResult out;
    out.suite = "spectral";
    const int T = thread_count(counts);
    const Tolerances tol;
    const double eps = tol.eps_opt;
    const GrassmannBudget gb = grassmann_sweep_budget();

    out.certificates.push_back(sweep(
        "vq_submultiplicative", "V_q(AB) <= V_q(A) V_q(B) with slack", counts.misc,
        seed ^ 0x50b3, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(2), norm_cycle(i));
            const int d = space.dim;
            const int q = 1 + rng.uniform_int(2);
            Matrix A = conditioned_matrix(d, 0.4, 2.5, rng);
            Matrix B = conditioned_matrix(d, 0.4, 2.5, rng);
            const double vab =
                max_volume_growth(space, Matrix(A * B), q, gb, rng.next_u64()).value;
            const double va = max_volume_growth(space, A, q, gb, rng.next_u64()).value;
            const double vb = max_volume_growth(space, B, q, gb, rng.next_u64()).value;
            return vab - va * vb * 1.15;
        }));

    out.certificates.push_back(sweep(
        "vq_continuity", "V_q responds continuously to operator perturbations",
        counts.misc / 2 + 1, seed ^ 0xc11, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3, norm_cycle(i));
            Matrix A = conditioned_matrix(3, 0.5, 2.0, rng);
            Matrix B = random_matrix(3, rng);
            const int q = 1 + rng.uniform_int(2);
            const double va = max_volume_growth(space, A, q, gb, rng.next_u64()).value;
            const double vn =
                max_volume_growth(space, Matrix(A + 1e-4 * B), q, gb, rng.next_u64()).value;
            return std::abs(vn - va) / std::max(va, 1e-12) - 5e-2;
        }));

    out.certificates.push_back(sweep(
        "gelfand_monotone", "Gelfand numbers decrease in q", counts.misc, seed ^ 0x6e0,
        T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(2), norm_cycle(i));
            Matrix A = random_matrix(space.dim, rng);
            double worst = -kInf, prev = kInf;
            for (int q = 1; q <= space.dim; ++q) {
                const double c = gelfand_number(space, A, q, gb, rng.next_u64()).value;
                worst = std::max(worst, c - prev - eps);
                prev = c;
            }
            return worst;
        }));

    out.certificates.push_back(sweep(
        "vq_witness_audit", "witness subspace reproduces the reported value",
        counts.misc, seed ^ 0xa0d, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(2), norm_cycle(i));
            const int q = 1 + rng.uniform_int(2);
            Matrix A = conditioned_matrix(space.dim, 0.4, 2.5, rng);
            WitnessedValue v = max_volume_growth(space, A, q, gb, rng.next_u64());
            DetEstimate audit = determinant(space, A, v.witness, {}, rng.next_u64());
            if (v.value == 0.0) return std::nan("");
            return std::abs(audit.value / v.value - 1.0) -
                   (3.0 * (audit.rel_error + v.rel_error) + 1e-9);
        }));

    out.certificates.push_back(sweep(
        "vq1_is_operator_norm", "V_1 equals the operator norm", counts.misc,
        seed ^ 0x0b1, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(2), norm_cycle(i));
            Matrix A = random_matrix(space.dim, rng);
            const double v1 = max_volume_growth(space, A, 1, gb, rng.next_u64()).value;
            const double on = operator_norm(space, A).value;
            return std::abs(v1 - on) / std::max(on, 1e-12) - 2 * eps - 1e-2;
        }));

    out.certificates.push_back(sweep(
        "gelfand_volume_ratio", "V_q vs c_q V_{q-1} within pinned constants",
        counts.misc, seed ^ 0x9c0, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3 + rng.uniform_int(2), norm_cycle(i));
            const int q = 2 + rng.uniform_int(std::min(2, space.dim - 1));
            Matrix A = conditioned_matrix(space.dim, 0.3, 3.0, rng);
            GelfandVolumeCheck c = gelfand_volume_check(space, A, q, gb, rng.next_u64());
            if (c.finite_rank_branch) return std::nan("");
            return std::max(c.lower / c.ratio - 1.0, c.ratio / c.upper - 1.0);
        }));

    out.certificates.push_back(sweep(
        "tail_monotone", "normalized volume growth decays past the rank",
        counts.misc / 2 + 1, seed ^ 0x7a1, T, [&](long i, RngStream& rng) {
            AmbientSpace space(4, norm_cycle(i));
            Matrix A = conditioned_matrix(4, 0.2, 2.0, rng);
            if (i % 2) A.col(3).setZero();  // drop the rank
            VolumeGrowthTail t = volume_growth_tail(space, A, 1, 4, gb, rng.next_u64());
            return t.tail_monotone ? -1.0 : 1.0;
        }));

    return out;
}

// ---------------------------------------------------------------------------
// MET suite
// ---------------------------------------------------------------------------

SuiteResult verify_met(std::uint64_t seed, const VerifyCounts& counts) {
    SuiteResult out;
    out.suite = "met";
    const int T = thread_count(counts);
    const Tolerances tol;

    out.certificates.push_back(sweep(
        "ledger_exactness", "summed increments match the direct determinant",
        counts.misc, seed ^ 0x1ed, T, [&](long i, RngStream& rng) {
            AmbientSpace space(2 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            CocycleSpec spec =
                i % 2 == 0
                    ? CocycleSpec::constant_op(conditioned_matrix(d, 0.5, 2.0, rng),
                                               space.norm, rng.next_u64())
                    : CocycleSpec::iid_general_op(d, 1.0, space.norm, rng.next_u64());
            Trajectory traj = stream(spec, 32);
            const int n = 5 + rng.uniform_int(16);
            const int q = 1 + rng.uniform_int(std::min(3, d));
            GrowthOptions opts;
            opts.n_starts = 1;
            opts.reopt_every = 0;
            GrowthLedger ledger = growth_rates(traj, q, n, opts, rng.next_u64());
            const GrowthChannel& ch = ledger.channels[q - 1];
            if (ch.dead) return std::nan("");
            Matrix Tn = Matrix::Identity(d, d);
            for (int k = 0; k < n; ++k) Tn = traj.op(k) * Tn;
            DetEstimate direct =
                determinant(space, Tn, Subspace(ch.initial_frame), {}, rng.next_u64());
            if (direct.value <= 0) return std::nan("");
            const double lhs = ch.cum + ch.endpoint_correction;
            const double ref = std::max(1.0, std::abs(std::log(direct.value)));
            const double slack = space.euclidean()
                                     ? 1e-8 * ref
                                     : 3.0 * direct.rel_error + 2e-2;
            return std::abs(lhs - std::log(direct.value)) - slack;
        }));

    out.certificates.push_back(sweep(
        "increment_monotone", "K_q nonincreasing within noise", counts.misc,
        seed ^ 0x40, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3, norm_cycle(i));
            CocycleSpec spec =
                CocycleSpec::iid_general_op(3, 1.0, space.norm, rng.next_u64());
            Trajectory traj = stream(spec, 600);
            GrowthLedger ledger = growth_rates(traj, 3, 500, {}, rng.next_u64());
            try {
                exponent_spectrum(ledger.rates(), ledger.noise_estimate());
                return -1.0;
            } catch (const std::exception&) {
                return 1.0;
            }
        }));

    out.certificates.push_back(sweep(
        "codim_law", "filtration codimensions equal the multiplicity sums",
        counts.misc / 4 + 2, seed ^ 0xc0d, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3, norm_cycle(i));
            Vector diag(3);
            diag << 4.0, 2.0, 1.0;
            CocycleSpec spec = CocycleSpec::constant_op(Matrix(diag.asDiagonal()),
                                                        space.norm, rng.next_u64());
            FiltrationResult f = filtration(stream(spec, 700), 600, rng.next_u64());
            if (f.filtration.codims.size() != 2) return 1.0;
            return (f.filtration.codims[0] == 1 && f.filtration.codims[1] == 2) ? -1.0
                                                                                : 1.0;
        }));

    out.certificates.push_back(sweep(
        "growth_dichotomy", "vectors off the slow space grow at the level rate",
        counts.misc / 4 + 2, seed ^ 0xd1c, T, [&](long i, RngStream& rng) {
            AmbientSpace space(2, norm_cycle(i));
            Matrix A(2, 2);
            A << 2, 1, 0, 0.5;
            CocycleSpec spec = CocycleSpec::constant_op(A, space.norm, rng.next_u64());
            Trajectory traj = stream(spec, 600);
            SlowSubspaceResult s = slow_subspace(traj, 1, 80, 0.0, rng.next_u64());
            Vector v = rng.direction(2);
            if (dist_to_subspace(space, v / space.norm_of(v), s.F_hat) < 0.2)
                return std::nan("");
            const int n = 400;
            Vector w = v;
            double ls = 0.0;
            for (int k = 0; k < n; ++k) {
                w = traj.op(k) * w;
                const double sc = w.norm();
                w /= sc;
                ls += std::log(sc);
            }
            const double rate = (ls + std::log(space.norm_of(w))) / n;
            return std::abs(rate - std::log(2.0)) - 2e-2;
        }));

    out.certificates.push_back(sweep(
        "cauchy_rate", "slow-subspace distances decay at the spectral-gap rate",
        counts.misc / 4 + 2, seed ^ 0xca8, T, [&](long i, RngStream& rng) {
            AmbientSpace space(2, norm_cycle(i));
            Vector diag(2);
            diag << 2.0, 0.5;
            CocycleSpec spec = CocycleSpec::constant_op(Matrix(diag.asDiagonal()),
                                                        space.norm, rng.next_u64());
            SlowSubspaceResult s =
                slow_subspace(stream(spec, 400), 1, 60, 0.0, rng.next_u64());
            return s.cauchy_certified ? -1.0 : 1.0;
        }));

    out.certificates.push_back(sweep(
        "complement_independence", "volume growth does not depend on the complement",
        counts.misc / 4 + 2, seed ^ 0xc1e, T, [&](long i, RngStream& rng) {
            AmbientSpace space(3, norm_cycle(i));
            Vector diag(3);
            diag << 4.0, 2.0, 1.0;
            CocycleSpec spec = CocycleSpec::constant_op(Matrix(diag.asDiagonal()),
                                                        space.norm, rng.next_u64());
            Trajectory traj = stream(spec, 1200);
            Matrix f3(3, 1);
            f3 << 0, 0, 1;
            Subspace F3(f3);
            Matrix e1(3, 2), e2(3, 2);
            e1 << 1, 0, 0, 1, 0, 0;
            e2 << 1, 0, 0, 1, 1, 0;  // tilted complement
            const int N = 800;
            const double g1 =
                complement_volume_growth(traj, Subspace(e1), F3, N, rng.next_u64());
            const double g2 =
                complement_volume_growth(traj, Subspace(e2), F3, N, rng.next_u64());
            return std::abs(g1 - g2) - 2e-2;
        }));

    out.certificates.push_back(sweep(
        "projection_decay", "propagated projection norms carry zero rate",
        counts.misc / 4 + 2, seed ^ 0x9d0, T, [&](long i, RngStream& rng) {
            AmbientSpace space(2, norm_cycle(i));
            Matrix A(2, 2);
            A << 2, 1, 0, 0.5;
            CocycleSpec spec = CocycleSpec::constant_op(A, space.norm, rng.next_u64());
            Trajectory traj = stream(spec, 500);
            Matrix be(2, 1), bf(2, 1);
            be << 1, 0;
            bf << 2, -3;  // slow eigendirection
            ProjectionDecayResult r =
                projection_decay(traj, Subspace(be), Subspace(bf), 400, rng.next_u64());
            if (r.degenerate) return 1.0;
            return std::abs(r.slope) - 5e-3;
        }));

    out.certificates.push_back(sweep(
        "sublevel_lipschitz", "sublevel sets move at most |A-B|/c in d_H",
        counts.misc, seed ^ 0x11b, T, [&](long i, RngStream& rng) {
            AmbientSpace space(2 + rng.uniform_int(3), norm_cycle(i));
            const int d = space.dim;
            Matrix A = conditioned_matrix(d, 0.5, 2.0, rng);
            Matrix B = A + 0.05 * random_matrix(d, rng);
            const double c = rng.uniform(0.5, 1.5);
            const double dh = sublevel_hausdorff(space, A, B, c, 384, rng.next_u64());
            const double lhs = operator_norm(space, Matrix(A - B)).value / c;
            return dh - lhs - 5e-2;
        }));

    return out;
}

std::vector<SuiteResult> verify_all(std::uint64_t seed, const VerifyCounts& counts) {
    return {verify_geometry(seed, counts), verify_volume(seed, counts),
            verify_spectral(seed, counts), verify_met(seed, counts)};
}

Json to_json(const SuiteResult& r) {
    Json certs = Json::array();
    for (const auto& c : r.certificates) {
        certs.push_back(Json{{"id", c.id},
                             {"description", c.description},
                             {"count", c.count},
                             {"violations", c.violations},
                             {"worst_margin", extended_to_json(c.worst_margin)},
                             {"pass", c.pass},
                             {"note", c.note}});
    }
    return Json{{"suite", r.suite}, {"pass", r.pass()}, {"certificates", certs}};
}

}  // namespace metvol
