#include <doctest.h>

#include <metvol/volume.hpp>

#include "oracles.hpp"

using namespace metvol;

namespace {

constexpr double kPi = 3.14159265358979323846;

Subspace coord_plane(int d, int i, int j) {
    Matrix b = Matrix::Zero(d, 2);
    b(i, 0) = 1.0;
    b(j, 1) = 1.0;
    return Subspace(b);
}

}  // namespace

TEST_CASE("omega_q at small dimensions") {
    CHECK(omega_q(0) == doctest::Approx(1.0));
    CHECK(omega_q(1) == doctest::Approx(2.0));
    CHECK(omega_q(2) == doctest::Approx(kPi));
    CHECK(omega_q(3) == doctest::Approx(4.0 * kPi / 3.0));
    CHECK(omega_q(4) == doctest::Approx(kPi * kPi / 2.0));
    CHECK(omega_q(6) == doctest::Approx(kPi * kPi * kPi / 6.0));
}

TEST_CASE("unit_ball_volume closed forms") {
    SUBCASE("euclidean disk") {
        AmbientSpace space(3, NormSpec::euclidean());
        RngStream rng(2, 0);
        VolumeEstimate v = unit_ball_volume(space, random_subspace(3, 2, rng));
        CHECK(v.value == doctest::Approx(kPi));
        CHECK(v.method == VolumeMethod::exact_closed_form);
    }
    SUBCASE("linf square") {
        AmbientSpace space(2, NormSpec::linf());
        VolumeEstimate v = unit_ball_volume(space, coord_plane(2, 0, 1));
        CHECK(v.value == doctest::Approx(4.0));
        CHECK(v.method == VolumeMethod::exact_closed_form);
    }
    SUBCASE("l1 cross-polytope") {
        AmbientSpace space(2, NormSpec::l1());
        VolumeEstimate v = unit_ball_volume(space, coord_plane(2, 0, 1));
        CHECK(v.value == doctest::Approx(2.0));
    }
}

TEST_CASE("unit_ball_volume methods agree") {
    AmbientSpace space(2, NormSpec::linf());
    Subspace E = coord_plane(2, 0, 1);

    VolumeOptions hull;
    hull.force_method = VolumeMethod::hull_triangulation;
    VolumeEstimate vh = unit_ball_volume(space, E, hull);
    CHECK(vh.method == VolumeMethod::hull_triangulation);
    CHECK(vh.value == doctest::Approx(4.0).epsilon(2e-3));

    VolumeOptions mc;
    mc.force_method = VolumeMethod::monte_carlo;
    VolumeEstimate vm = unit_ball_volume(space, E, mc, 99);
    CHECK(vm.method == VolumeMethod::monte_carlo);
    CHECK(vm.value == doctest::Approx(4.0).epsilon(0.05));
    CHECK(vm.rel_error > 0.0);
    CHECK(vm.rel_error < 0.02);

    // A tilted plane through the linf cube in d=3, hull vs Monte Carlo.
    AmbientSpace s3(3, NormSpec::linf());
    RngStream rng(5, 1);
    Subspace T = random_subspace(3, 2, rng);
    VolumeEstimate th = unit_ball_volume(s3, T, hull);
    VolumeEstimate tm = unit_ball_volume(s3, T, mc, 12);
    CHECK(tm.value == doctest::Approx(th.value).epsilon(0.05));
}

TEST_CASE("john_form examples") {
    SUBCASE("euclidean gram is the identity") {
        AmbientSpace space(4, NormSpec::euclidean());
        RngStream rng(7, 2);
        JohnForm f = john_form(space, random_subspace(4, 3, rng));
        CHECK((f.gram - Matrix::Identity(3, 3)).norm() < 1e-12);
        CHECK(f.mvee_epsilon == 0.0);
    }
    SUBCASE("square section normalizes to pi/4 times identity") {
        AmbientSpace space(2, NormSpec::linf());
        JohnForm f = john_form(space, coord_plane(2, 0, 1));
        CHECK(f.gram(0, 0) == doctest::Approx(kPi / 4.0).epsilon(5e-3));
        CHECK(f.gram(1, 1) == doctest::Approx(kPi / 4.0).epsilon(5e-3));
        CHECK(std::abs(f.gram(0, 1)) < 5e-3);
    }
    SUBCASE("lines reproduce the ambient norm exactly") {
        AmbientSpace space(3, NormSpec::lp(1.5));
        Matrix b(3, 1);
        b << 1, -2, 0.5;
        JohnForm f = john_form(space, Subspace(b));
        RngStream rng(8, 3);
        for (int i = 0; i < 10; ++i) {
            Vector c = rng.gaussian_vector(1);
            CHECK(john_norm(f, c) ==
                  doctest::Approx(space.norm_of(Subspace(b).basis() * c)).epsilon(1e-10));
        }
    }
    SUBCASE("dimension budget is enforced") {
        AmbientSpace space(8, NormSpec::linf());
        RngStream rng(9, 4);
        CHECK_THROWS_AS(john_form(space, random_subspace(8, 7, rng)), PreconditionError);
    }
}

TEST_CASE("john bound holds on weighted lp sections") {
    RngStream rng(11, 5);
    Vector w(5);
    for (int i = 0; i < 5; ++i) w[i] = rng.uniform(0.5, 2.0);
    AmbientSpace space(5, NormSpec::weighted_lp(1.5, w));
    for (int q : {2, 3, 4}) {
        Subspace E = random_subspace(5, q, rng);
        JohnForm f = john_form(space, E);
        for (int i = 0; i < 500; ++i) {
            Vector c = rng.gaussian_vector(q);
            const double amb = space.norm_of(E.basis() * c);
            const double jn = john_norm(f, c);
            CHECK(jn <= std::sqrt(double(q)) * amb * 1.001);
            CHECK(jn >= amb / std::sqrt(double(q)) / 1.001);
        }
    }
}

TEST_CASE("parallelepiped_volume examples") {
    SUBCASE("euclidean orthonormal cube") {
        AmbientSpace space(3, NormSpec::euclidean());
        RngStream rng(13, 6);
        Subspace E = random_subspace(3, 2, rng);
        std::vector<Vector> vs = {E.basis().col(0), E.basis().col(1)};
        CHECK(parallelepiped_volume(space, E, vs).value == doctest::Approx(1.0));
    }
    SUBCASE("linf coordinate square") {
        AmbientSpace space(2, NormSpec::linf());
        Subspace E = coord_plane(2, 0, 1);
        std::vector<Vector> vs = {Vector::Unit(2, 0), Vector::Unit(2, 1)};
        CHECK(parallelepiped_volume(space, E, vs).value == doctest::Approx(kPi / 4.0));
    }
    SUBCASE("scaling in the first edge") {
        AmbientSpace space(3, NormSpec::l1());
        RngStream rng(14, 7);
        Subspace E = random_subspace(3, 2, rng);
        std::vector<Vector> vs = {E.basis() * rng.gaussian_vector(2),
                                  E.basis() * rng.gaussian_vector(2)};
        std::vector<Vector> ws = vs;
        ws[0] *= 3.7;
        const double v1 = parallelepiped_volume(space, E, vs).value;
        const double v2 = parallelepiped_volume(space, E, ws).value;
        CHECK(v2 == doctest::Approx(3.7 * v1).epsilon(1e-9));
    }
    SUBCASE("dependent vectors give zero") {
        AmbientSpace space(3, NormSpec::euclidean());
        RngStream rng(15, 8);
        Subspace E = random_subspace(3, 2, rng);
        Vector v = E.basis() * rng.gaussian_vector(2);
        std::vector<Vector> vs = {v, 2.0 * v};
        CHECK(parallelepiped_volume(space, E, vs).value == 0.0);
    }
    SUBCASE("vectors outside the subspace are rejected") {
        AmbientSpace space(3, NormSpec::euclidean());
        Subspace E = coord_plane(3, 0, 1);
        std::vector<Vector> vs = {Vector::Unit(3, 0), Vector::Unit(3, 2)};
        CHECK_THROWS_AS(parallelepiped_volume(space, E, vs), PreconditionError);
    }
}

TEST_CASE("determinant examples") {
    SUBCASE("euclidean diagonal") {
        AmbientSpace space(2, NormSpec::euclidean());
        Matrix A(2, 2);
        A << 2, 0, 0, 3;
        Subspace E = coord_plane(2, 0, 1);
        DetEstimate d = determinant(space, A, E);
        CHECK(d.value == doctest::Approx(6.0));
    }
    SUBCASE("homogeneity under any norm") {
        for (NormSpec n : {NormSpec::l1(), NormSpec::linf(), NormSpec::lp(1.5)}) {
            AmbientSpace space(4, n);
            RngStream rng(17, 9);
            for (int q : {1, 2, 3}) {
                Subspace E = random_subspace(4, q, rng);
                DetEstimate d =
                    determinant(space, Matrix(2.0 * Matrix::Identity(4, 4)), E);
                CHECK(d.value ==
                      doctest::Approx(std::pow(2.0, q)).epsilon(3 * d.rel_error + 1e-9));
            }
        }
    }
    SUBCASE("rank-deficient restriction gives zero") {
        AmbientSpace space(3, NormSpec::euclidean());
        Matrix A = Matrix::Zero(3, 3);
        A(0, 0) = 1.0;
        RngStream rng(18, 10);
        CHECK(determinant(space, A, random_subspace(3, 2, rng)).value == 0.0);
    }
    SUBCASE("euclidean matches the Gram-determinant oracle") {
        AmbientSpace space(4, NormSpec::euclidean());
        RngStream rng(19, 11);
        for (int i = 0; i < 20; ++i) {
            Matrix A(4, 4);
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) A(r, c) = rng.gaussian();
            Subspace E = random_subspace(4, 1 + rng.uniform_int(3), rng);
            const double oracle = oracles::gram_determinant(A, E.basis());
            const double got = determinant(space, A, E).value;
            CHECK(got == doctest::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("approx_svd_basis examples") {
    AmbientSpace space(2, NormSpec::euclidean());
    SUBCASE("identity map") {
        RngStream rng(23, 12);
        Subspace V = random_subspace(2, 2, rng);
        ApproxSvdBasis b = approx_svd_basis(space, Matrix::Identity(2, 2), V);
        CHECK(b.invertible);
        CHECK(b.product == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(b.expansions[0] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("euclidean diagonal recovers the exact factors") {
        Matrix A(2, 2);
        A << 3, 0, 0, 2;
        Subspace V = coord_plane(2, 0, 1);
        ApproxSvdBasis b = approx_svd_basis(space, A, V);
        CHECK(b.det.value == doctest::Approx(6.0));
        CHECK(b.product == doctest::Approx(6.0).epsilon(1e-9));
        CHECK(b.image_gram_residual < 1e-9);
        // The right factors align with the coordinate axes.
        for (const auto& v : b.vectors)
            CHECK(std::min(std::abs(std::abs(v[0]) - 1.0), std::abs(std::abs(v[1]) - 1.0)) <
                  1e-9);
    }
    SUBCASE("singular restriction still yields a basis") {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 0) = 1.0;
        Subspace V = coord_plane(2, 0, 1);
        ApproxSvdBasis b = approx_svd_basis(space, A, V);
        CHECK_FALSE(b.invertible);
        CHECK(b.vectors.size() == 2);
        CHECK(b.det.value == 0.0);
    }
    SUBCASE("hadamard direction under linf") {
        AmbientSpace si(3, NormSpec::linf());
        RngStream rng(29, 13);
        for (int i = 0; i < 10; ++i) {
            Matrix A(3, 3);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) A(r, c) = rng.gaussian();
            Subspace V = random_subspace(3, 2, rng);
            ApproxSvdBasis b = approx_svd_basis(si, A, V, {}, rng.next_u64());
            const double C = hadamard_constant(2) * (1 + 3 * b.det.rel_error + 1e-3);
            CHECK(b.det.value <= C * b.product);
        }
    }
}

TEST_CASE("min_expansion_bound examples") {
    AmbientSpace space(2, NormSpec::euclidean());
    Subspace E = coord_plane(2, 0, 1);
    SUBCASE("identity") {
        MinExpansionBound b = min_expansion_bound(space, Matrix::Identity(2, 2), E);
        CHECK(b.lhs == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(b.rhs == doctest::Approx(1.0 / hadamard_constant(2)).epsilon(1e-6));
        CHECK(b.lhs >= b.rhs);
    }
    SUBCASE("diagonal with a slow direction") {
        Matrix A(2, 2);
        A << 3, 0, 0, 1;
        MinExpansionBound b = min_expansion_bound(space, A, E);
        CHECK(b.lhs == doctest::Approx(3.0).epsilon(1e-6));  // min |Av| = 1, |A| = 3
        CHECK(b.lhs >= b.rhs);
    }
    SUBCASE("singular operator gives a trivial bound") {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 0) = 2.0;
        MinExpansionBound b = min_expansion_bound(space, A, E);
        CHECK(b.rhs == 0.0);
        CHECK(b.lhs >= 0.0);
    }
}

TEST_CASE("block_det_bounds examples") {
    AmbientSpace space(2, NormSpec::euclidean());
    Subspace E = Subspace(Matrix(Vector::Unit(2, 0)));
    Subspace F = Subspace(Matrix(Vector::Unit(2, 1)));
    SUBCASE("orthogonal identity blocks") {
        BlockDetBounds b = block_det_bounds(space, Matrix::Identity(2, 2), E, F);
        CHECK(b.ratio == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(b.lower <= 1.0);
        CHECK(b.upper >= 1.0);
    }
    SUBCASE("diagonal product structure is exact") {
        Matrix A(2, 2);
        A << 1.7, 0, 0, 0.4;
        BlockDetBounds b = block_det_bounds(space, A, E, F);
        CHECK(b.ratio == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("singular block sum is rejected") {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 0) = 1.0;
        CHECK_THROWS_AS(block_det_bounds(space, A, E, F), PreconditionError);
    }
}

TEST_CASE("ball_section_volume examples") {
    SUBCASE("centered euclidean section") {
        AmbientSpace space(3, NormSpec::euclidean());
        RngStream rng(31, 14);
        Subspace E = random_subspace(3, 2, rng);
        Vector x = E.basis() * rng.gaussian_vector(2) * 0.2;  // inside E
        const double r = 0.8;
        VolumeEstimate v = ball_section_volume(space, E, x, r);
        CHECK(v.value == doctest::Approx(r * r * kPi).epsilon(2e-3));
    }
    SUBCASE("distant center gives the empty section") {
        AmbientSpace space(3, NormSpec::euclidean());
        Subspace E = coord_plane(3, 0, 1);
        Vector x = 5.0 * Vector::Unit(3, 2);
        CHECK(ball_section_volume(space, E, x, 1.0).value == 0.0);
    }
    SUBCASE("linf plane sections satisfy the doubling bound") {
        AmbientSpace space(3, NormSpec::linf());
        RngStream rng(37, 15);
        for (int i = 0; i < 10; ++i) {
            Subspace E = random_subspace(3, 2, rng);
            Vector x = rng.gaussian_vector(3) * 0.5;
            VolumeEstimate v = ball_section_volume(space, E, x, 1.0, {}, rng.next_u64());
            CHECK(v.value <= 4.0 * omega_q(2) + 3.0 * v.rel_error * std::max(v.value, 1.0));
        }
    }
    SUBCASE("monte carlo agrees with the hull on a slice") {
        AmbientSpace space(3, NormSpec::linf());
        RngStream rng(41, 16);
        Subspace E = random_subspace(3, 2, rng);
        Vector x = rng.gaussian_vector(3) * 0.3;
        VolumeEstimate vh = ball_section_volume(space, E, x, 1.1);
        VolumeOptions mc;
        mc.force_method = VolumeMethod::monte_carlo;
        VolumeEstimate vm = ball_section_volume(space, E, x, 1.1, mc, 5);
        CHECK(vm.value == doctest::Approx(vh.value).epsilon(0.06));
    }
}

TEST_CASE("pinned constants match their formulas") {
    CHECK(hadamard_constant(2, 0.0) == doctest::Approx(2.0));
    CHECK(hadamard_constant(3, 0.0) == doctest::Approx(std::pow(3.0, 1.5)));
    CHECK(svd_ratio_constant(2, 0.0) == doctest::Approx(4.0));
    CHECK(block_det_constant(2, 1, 0.0) == doctest::Approx(4.0));
    CHECK(block_det_constant(3, 2, 0.0) == doctest::Approx(27.0 * 4.0));
    CHECK(gelfand_ratio_constant(2, 0.0) == doctest::Approx(16.0));
}
