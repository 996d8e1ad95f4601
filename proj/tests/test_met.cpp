#include <doctest.h>

#include <metvol/cocycles.hpp>
#include <metvol/met.hpp>

#include "oracles.hpp"

using namespace metvol;

namespace {

Trajectory constant_traj(const Matrix& A, NormSpec norm, std::uint64_t seed = 1,
                         int budget = 4000) {
    return stream(CocycleSpec::constant_op(A, std::move(norm), seed), budget);
}

Matrix diag2(double a, double b) {
    Vector d(2);
    d << a, b;
    return Matrix(d.asDiagonal());
}

Matrix shear2() {
    Matrix A(2, 2);
    A << 2, 1, 0, 0.5;
    return A;
}

}  // namespace

TEST_CASE("growth_rates on oracle cocycles") {
    SUBCASE("hyperbolic diagonal under three norms") {
        for (NormSpec n : {NormSpec::euclidean(), NormSpec::l1(), NormSpec::linf()}) {
            GrowthLedger led =
                growth_rates(constant_traj(diag2(2.0, 0.5), n), 2, 2000, {}, 3);
            const auto l = led.rates();
            CHECK(l[0] == doctest::Approx(std::log(2.0)).epsilon(1e-2));
            CHECK(std::abs(l[1]) < 1e-2);
        }
    }
    SUBCASE("identity cocycle is flat") {
        GrowthLedger led =
            growth_rates(constant_traj(Matrix::Identity(3, 3), NormSpec::linf()), 3, 300);
        for (double l : led.rates()) CHECK(std::abs(l) < 1e-6);
    }
    SUBCASE("balanced iid diagonal concentrates near zero") {
        std::vector<ScalarLaw> laws = {ScalarLaw::two_point(2.0, 0.5),
                                       ScalarLaw::two_point(2.0, 0.5)};
        CocycleSpec spec = CocycleSpec::iid_diagonal_op(laws, NormSpec::euclidean(), 11);
        GrowthLedger led = growth_rates(stream(spec), 1, 2000, {}, 5);
        // E[log d] = 0; the running-maximum bias at N = 2000 stays within the
        // Monte Carlo confidence width ~ 3 log(2)/sqrt(N).
        CHECK(std::abs(led.rates()[0]) < 0.06);
    }
    SUBCASE("ledger exactness against the direct determinant") {
        RngStream rng(23, 1);
        for (NormSpec n : {NormSpec::euclidean(), NormSpec::linf()}) {
            AmbientSpace space(3, n);
            CocycleSpec spec = CocycleSpec::iid_general_op(3, 1.0, n, rng.next_u64());
            Trajectory traj = stream(spec);
            GrowthOptions opts;
            opts.n_starts = 1;
            opts.reopt_every = 0;
            const int nn = 12;
            GrowthLedger led = growth_rates(traj, 2, nn, opts, rng.next_u64());
            const GrowthChannel& ch = led.channels[1];
            if (ch.dead) continue;
            Matrix Tn = Matrix::Identity(3, 3);
            for (int k = 0; k < nn; ++k) Tn = traj.op(k) * Tn;
            DetEstimate direct = determinant(space, Tn, Subspace(ch.initial_frame));
            const double ref = std::max(1.0, std::abs(std::log(direct.value)));
            const double tolr = n.is_euclidean() ? 1e-8 * ref : 3 * direct.rel_error + 1e-2;
            CHECK(std::abs(ch.cum + ch.endpoint_correction - std::log(direct.value)) <=
                  tolr);
        }
    }
    SUBCASE("rank-deficient steps send channels to minus infinity") {
        CocycleSpec base =
            CocycleSpec::constant_op(diag2(2.0, 0.5), NormSpec::euclidean(), 1);
        CocycleSpec spec = CocycleSpec::rank_deficient_op(base, {5}, 1);
        GrowthLedger led = growth_rates(stream(spec), 2, 200);
        CHECK(led.rates()[0] == doctest::Approx(std::log(2.0)).epsilon(5e-2));
        CHECK(led.rates()[1] == -kInf);
        CHECK(led.channels[1].dead);
        CHECK(led.channels[1].dead_at == 5);
    }
}

TEST_CASE("triangular cocycle growth matches the diagonal oracle") {
    std::vector<ScalarLaw> laws = {ScalarLaw::constant(2.0), ScalarLaw::constant(0.5)};
    CocycleSpec spec = CocycleSpec::triangular_op(laws, ScalarLaw::log_uniform(0.5, 2.0),
                                                  NormSpec::euclidean(), 13);
    auto oracle = analytic_exponents(spec);
    REQUIRE(oracle.has_value());
    GrowthLedger led = growth_rates(stream(spec), 2, 1500, {}, 3);
    ExponentReport rep = exponent_spectrum(led.rates(), led.noise_estimate());
    REQUIRE(rep.lambda.size() == 2);
    CHECK(rep.lambda[0] == doctest::Approx(oracle->lambda[0]).epsilon(2e-2));
    CHECK(rep.lambda[1] == doctest::Approx(oracle->lambda[1]).epsilon(2e-2));
}

TEST_CASE("exponent_spectrum examples") {
    SUBCASE("two-point differencing") {
        ExponentReport r = exponent_spectrum({std::log(2.0), 0.0}, 1e-4);
        CHECK(r.lambda.size() == 2);
        CHECK(r.lambda[0] == doctest::Approx(std::log(2.0)));
        CHECK(r.lambda[1] == doctest::Approx(-std::log(2.0)));
        CHECK(r.mult == std::vector<int>{1, 1});
        CHECK(r.M == std::vector<int>{0, 1});
    }
    SUBCASE("constant increments merge into one exponent") {
        ExponentReport r = exponent_spectrum({1.0, 2.0, 3.0}, 1e-4);
        CHECK(r.lambda.size() == 1);
        CHECK(r.lambda[0] == doctest::Approx(1.0));
        CHECK(r.mult[0] == 3);
    }
    SUBCASE("repeated top exponent from the ledger") {
        GrowthLedger led = growth_rates(
            constant_traj(Matrix(diag2(3.0, 3.0)), NormSpec::euclidean()), 2, 400);
        ExponentReport r = exponent_spectrum(led.rates(), led.noise_estimate());
        CHECK(r.lambda.size() == 1);
        CHECK(r.lambda[0] == doctest::Approx(std::log(3.0)).epsilon(1e-3));
        CHECK(r.mult[0] == 2);
    }
    SUBCASE("minus infinity tail forms the last cluster") {
        ExponentReport r = exponent_spectrum({std::log(2.0), -kInf, -kInf}, 1e-4);
        CHECK(r.lambda.size() == 2);
        CHECK(r.lambda[1] == -kInf);
        CHECK(r.mult == std::vector<int>{1, 2});
    }
    SUBCASE("increasing increments beyond noise are rejected") {
        CHECK_THROWS(exponent_spectrum({0.0, 1.0}, 1e-3));
    }
}

TEST_CASE("fast_subspace examples") {
    SUBCASE("hyperbolic diagonal aligns with the expanding axis") {
        Trajectory traj = constant_traj(diag2(2.0, 0.5), NormSpec::euclidean());
        FastSubspaceResult r = fast_subspace(traj, 1, 40);
        AmbientSpace space = traj.space;
        Matrix e1(2, 1);
        e1 << 1, 0;
        CHECK(hausdorff(space, r.E, Subspace(e1)) < 1e-6);
        CHECK(r.certificate);
    }
    SUBCASE("identity accepts any subspace") {
        Trajectory traj = constant_traj(Matrix::Identity(3, 3), NormSpec::l1());
        FastSubspaceResult r = fast_subspace(traj, 2, 25);
        CHECK(r.certificate);
        CHECK(std::abs(r.log_det) < 0.5);
    }
    SUBCASE("shear maximizer is the top right-singular direction") {
        Trajectory traj = constant_traj(shear2(), NormSpec::euclidean());
        const int n = 30;
        FastSubspaceResult r = fast_subspace(traj, 1, n);
        // Oracle: SVD of the explicit product.
        Matrix Tn = Matrix::Identity(2, 2);
        for (int k = 0; k < n; ++k) Tn = traj.op(k) * Tn;
        Eigen::JacobiSVD<Matrix> svd(Tn, Eigen::ComputeFullV);
        Subspace oracle(Matrix(svd.matrixV().col(0)));
        CHECK(hausdorff(traj.space, r.E, oracle) < 1e-5);
        CHECK(r.log_det >= std::log(oracles::top_singular_product(Tn, 1)) - 1e-6);
    }
    SUBCASE("rank starvation is rejected") {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 0) = 2.0;
        Trajectory traj = constant_traj(A, NormSpec::euclidean());
        CHECK_THROWS_AS(fast_subspace(traj, 2, 10), PreconditionError);
    }
}

TEST_CASE("slow_subspace examples") {
    SUBCASE("diagonal slow axis") {
        Trajectory traj = constant_traj(diag2(2.0, 0.5), NormSpec::euclidean());
        SlowSubspaceResult r = slow_subspace(traj, 1, 100);
        Matrix e2(2, 1);
        e2 << 0, 1;
        CHECK(hausdorff(traj.space, r.F_hat, Subspace(e2)) <= 1e-6);
        CHECK(r.stopped_by == "cauchy");
        CHECK(r.cauchy_certified);
    }
    SUBCASE("shear slow direction is the contracting eigenvector") {
        for (NormSpec n : {NormSpec::euclidean(), NormSpec::l1(), NormSpec::linf()}) {
            Trajectory traj = constant_traj(shear2(), n);
            SlowSubspaceResult r = slow_subspace(traj, 1, 100);
            Matrix v(2, 1);
            v << 2, -3;  // eigenvector of the eigenvalue 1/2
            AmbientSpace eu(2, NormSpec::euclidean());
            CHECK(hausdorff(eu, r.F_hat, Subspace(v)) <= 1e-6);
        }
    }
    SUBCASE("block splitting keeps the contracting coordinates") {
        Matrix A = Matrix::Identity(3, 3);
        A(2, 2) = 0.3;
        Trajectory traj = constant_traj(A, NormSpec::euclidean());
        SlowSubspaceResult r = slow_subspace(traj, 2, 80);
        Matrix e3(3, 1);
        e3 << 0, 0, 1;
        CHECK(hausdorff(traj.space, r.F_hat, Subspace(e3)) < 1e-6);
    }
    SUBCASE("no gap is rejected") {
        Trajectory traj = constant_traj(Matrix::Identity(2, 2), NormSpec::euclidean());
        CHECK_THROWS_AS(slow_subspace(traj, 1, 60), PreconditionError);
    }
    SUBCASE("cauchy log decays at the spectral gap rate") {
        // The coordinate-diagonal extraction collapses to machine precision
        // immediately (slope reported as -inf); the non-normal shear keeps a
        // genuinely geometric distance sequence, decaying at the gap rate.
        Trajectory diag_traj = constant_traj(diag2(2.0, 0.5), NormSpec::euclidean());
        SlowSubspaceResult rd = slow_subspace(diag_traj, 1, 100, 0.069);
        CHECK(rd.cauchy_certified);

        Trajectory traj = constant_traj(shear2(), NormSpec::euclidean());
        SlowSubspaceResult r = slow_subspace(traj, 1, 100, 0.069);
        REQUIRE(r.rate_slope < 0.0);
        CHECK(r.rate_slope <= -2.0 * std::log(2.0) + 0.069 + 0.05);
        CHECK(r.cauchy_certified);
    }
}

TEST_CASE("filtration examples") {
    SUBCASE("distinct diagonal gives nested slow spaces") {
        Vector d(3);
        d << 4, 2, 1;
        Trajectory traj = constant_traj(Matrix(d.asDiagonal()), NormSpec::euclidean());
        FiltrationResult f = filtration(traj, 600);
        REQUIRE(f.filtration.subspaces.size() == 2);
        CHECK(f.filtration.codims == std::vector<int>{1, 2});
        Matrix e23(3, 2);
        e23 << 0, 0, 1, 0, 0, 1;
        Matrix e3(3, 1);
        e3 << 0, 0, 1;
        CHECK(hausdorff(traj.space, f.filtration.subspaces[0], Subspace(e23)) < 1e-6);
        CHECK(hausdorff(traj.space, f.filtration.subspaces[1], Subspace(e3)) < 1e-6);
        // Nesting: the deeper level sits inside the shallower one.
        CHECK(gap(traj.space, f.filtration.subspaces[1], f.filtration.subspaces[0]) <
              1e-8);
        for (double res : f.level_residuals) CHECK(res < 0.1);
    }
    SUBCASE("repeated top exponent gives a single deep level") {
        Vector d(3);
        d << 3, 3, 1;
        Trajectory traj = constant_traj(Matrix(d.asDiagonal()), NormSpec::euclidean());
        FiltrationResult f = filtration(traj, 600);
        REQUIRE(f.filtration.subspaces.size() == 1);
        CHECK(f.filtration.codims == std::vector<int>{2});
        Matrix e3(3, 1);
        e3 << 0, 0, 1;
        CHECK(hausdorff(traj.space, f.filtration.subspaces[0], Subspace(e3)) < 1e-6);
    }
    SUBCASE("single exponent leaves the filtration trivial") {
        Trajectory traj =
            constant_traj(Matrix(2.0 * Matrix::Identity(2, 2)), NormSpec::euclidean());
        FiltrationResult f = filtration(traj, 300);
        CHECK(f.filtration.subspaces.empty());
        CHECK(f.report.lambda.size() == 1);
    }
    SUBCASE("non-injective cocycle stops at the last finite level") {
        CocycleSpec base =
            CocycleSpec::constant_op(diag2(2.0, 0.5), NormSpec::euclidean(), 1);
        CocycleSpec spec = CocycleSpec::rank_deficient_op(base, {3}, 1);
        FiltrationResult f = filtration(stream(spec), 300);
        CHECK(f.report.lambda.back() == -kInf);
        CHECK(f.report.lambda[0] == doctest::Approx(std::log(2.0)).epsilon(5e-2));
    }
}

TEST_CASE("cone_growth examples") {
    SUBCASE("hyperbolic diagonal converges to the top exponent") {
        Trajectory traj = constant_traj(diag2(2.0, 0.5), NormSpec::euclidean());
        Matrix e2(2, 1);
        e2 << 0, 1;
        ConeGrowthResult r = cone_growth(traj, Subspace(e2), 0.5, 400);
        CHECK(r.min_rates.back() == doctest::Approx(std::log(2.0)).epsilon(2e-2));
    }
    SUBCASE("identity cocycle has zero rates") {
        Trajectory traj = constant_traj(Matrix::Identity(2, 2), NormSpec::linf());
        Matrix e2(2, 1);
        e2 << 0, 1;
        ConeGrowthResult r = cone_growth(traj, Subspace(e2), 0.4, 100);
        for (double v : r.min_rates) CHECK(std::abs(v) < 1e-9);
    }
    SUBCASE("cone samples exclude the slow subspace") {
        // d(v, F) = 0 < eta for v in F, so F-directions never enter the cone;
        // the minimal rate stays far from the slow exponent.
        Trajectory traj = constant_traj(diag2(2.0, 0.5), NormSpec::euclidean());
        Matrix e2(2, 1);
        e2 << 0, 1;
        ConeGrowthResult r = cone_growth(traj, Subspace(e2), 0.5, 200);
        CHECK(r.min_rates.back() > 0.5);
    }
    SUBCASE("invalid eta is rejected") {
        Trajectory traj = constant_traj(diag2(2.0, 0.5), NormSpec::euclidean());
        Matrix e2(2, 1);
        e2 << 0, 1;
        CHECK_THROWS_AS(cone_growth(traj, Subspace(e2), 1.5, 50), PreconditionError);
    }
}

TEST_CASE("complement_volume_growth examples") {
    Vector d(3);
    d << 4, 2, 1;
    Trajectory traj = constant_traj(Matrix(d.asDiagonal()), NormSpec::euclidean());
    Matrix e3(3, 1);
    e3 << 0, 0, 1;
    Subspace F3(e3);
    SUBCASE("coordinate complement") {
        Matrix e12(3, 2);
        e12 << 1, 0, 0, 1, 0, 0;
        const double g = complement_volume_growth(traj, Subspace(e12), F3, 1500);
        CHECK(g == doctest::Approx(std::log(8.0)).epsilon(1e-2));
    }
    SUBCASE("tilted complement gives the same limit") {
        Matrix tilt(3, 2);
        tilt << 1, 0, 0, 1, 1, 0;
        const double g = complement_volume_growth(traj, Subspace(tilt), F3, 1500);
        CHECK(g == doctest::Approx(std::log(8.0)).epsilon(1e-2));
    }
    SUBCASE("full space reproduces the total rate") {
        Subspace zero{Matrix(3, 0)};
        Matrix id = Matrix::Identity(3, 3);
        const double g = complement_volume_growth(traj, Subspace(id), zero, 800);
        CHECK(g == doctest::Approx(std::log(8.0)).epsilon(1e-2));
    }
    SUBCASE("non-complements are rejected") {
        Matrix e13(3, 2);
        e13 << 1, 0, 0, 0, 0, 1;  // contains F3
        CHECK_THROWS_AS(complement_volume_growth(traj, Subspace(e13), F3, 100),
                        PreconditionError);
    }
}

TEST_CASE("projection_decay examples") {
    SUBCASE("coordinate splitting of a diagonal cocycle is constant") {
        Trajectory traj = constant_traj(diag2(2.0, 0.5), NormSpec::euclidean());
        Matrix e1(2, 1), e2(2, 1);
        e1 << 1, 0;
        e2 << 0, 1;
        ProjectionDecayResult r = projection_decay(traj, Subspace(e1), Subspace(e2), 300);
        CHECK_FALSE(r.degenerate);
        for (double lp : r.log_proj_norms) CHECK(std::abs(lp) < 1e-5);
        CHECK(std::abs(r.slope) < 1e-5);
    }
    SUBCASE("shear splitting decays to rate zero") {
        Trajectory traj = constant_traj(shear2(), NormSpec::euclidean());
        Matrix e1(2, 1), v(2, 1);
        e1 << 1, 0;
        v << 2, -3;
        ProjectionDecayResult r = projection_decay(traj, Subspace(e1), Subspace(v), 400);
        CHECK_FALSE(r.degenerate);
        CHECK(std::abs(r.slope) < 5e-3);
    }
}

TEST_CASE("sublevel_convergence examples") {
    SUBCASE("hyperbolic diagonal collapses onto the slow slice") {
        Trajectory traj = constant_traj(diag2(2.0, 0.5), NormSpec::euclidean());
        Matrix e2(2, 1);
        e2 << 0, 1;
        const double lambda2 = -std::log(2.0);
        SublevelResult r =
            sublevel_convergence(traj, Subspace(e2), lambda2, 0.069, 120);
        REQUIRE(r.ns.size() > 5);
        CHECK(r.ns.front() == 0);
        // n = 0: the sublevel body is the whole ball.
        CHECK(r.d_h.front() > 0.3);
        // Decreasing after burn-in and below the target by n = 60.
        double at60 = kInf;
        for (std::size_t i = 0; i < r.ns.size(); ++i)
            if (r.ns[i] >= 60) {
                at60 = r.d_h[i];
                break;
            }
        CHECK(at60 < 1e-2);
        for (std::size_t i = 3; i < r.d_h.size(); ++i)
            CHECK(r.d_h[i] <= r.d_h[i - 1] + 1e-9);
    }
    SUBCASE("sublevel bodies move lipschitz-continuously in the operator") {
        RngStream rng(31, 2);
        for (NormSpec n : {NormSpec::euclidean(), NormSpec::linf()}) {
            AmbientSpace space(3, n);
            for (int i = 0; i < 4; ++i) {
                Matrix A(3, 3), B(3, 3);
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) {
                        A(r, c) = rng.gaussian();
                        B(r, c) = A(r, c) + 0.03 * rng.gaussian();
                    }
                const double c = rng.uniform(0.6, 1.4);
                const double dh = sublevel_hausdorff(space, A, B, c, 256, rng.next_u64());
                const double bound = operator_norm(space, Matrix(A - B)).value / c;
                CHECK(dh <= bound + 5e-2);
            }
        }
    }
}

TEST_CASE("restricted trajectories carry the pullback geometry") {
    Vector d(3);
    d << 4, 2, 1;
    Trajectory traj = constant_traj(Matrix(d.asDiagonal()), NormSpec::linf());
    Matrix e23(3, 2);
    e23 << 0, 0, 1, 0, 0, 1;
    Trajectory sub = restrict_trajectory(traj, Subspace(e23));
    CHECK(sub.dim() == 2);
    // The restricted growth rates shift the spectrum down by one level.
    GrowthLedger led = growth_rates(sub, 2, 800);
    CHECK(led.rates()[0] == doctest::Approx(std::log(2.0)).epsilon(2e-2));
    CHECK(led.rates()[1] == doctest::Approx(std::log(2.0)).epsilon(2e-2));
    // Pullback norm evaluates through the frame.
    AmbientSpace s0 = sub.space_of(0);
    Vector c(2);
    c << 1.0, -2.0;
    CHECK(s0.norm_of(c) == doctest::Approx(2.0));  // |(0, 1, -2)|_inf
}
