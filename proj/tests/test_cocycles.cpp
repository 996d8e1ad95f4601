#include <doctest.h>

#include <metvol/cocycles.hpp>

#include "oracles.hpp"

using namespace metvol;

TEST_CASE("streams replay deterministically") {
    std::vector<ScalarLaw> laws = {ScalarLaw::log_uniform(0.5, 2.0),
                                   ScalarLaw::log_uniform(0.5, 2.0)};
    CocycleSpec spec = CocycleSpec::iid_diagonal_op(laws, NormSpec::euclidean(), 7);
    Trajectory a = stream(spec), b = stream(spec);
    for (int k : {0, 1, 5, 100, 3}) CHECK((a.op(k) - b.op(k)).norm() == 0.0);
    // Access order does not matter.
    Matrix t5 = a.op(5);
    a.op(0);
    CHECK((a.op(5) - t5).norm() == 0.0);

    CocycleSpec other = spec;
    other.seed = 8;
    Trajectory c = stream(other);
    CHECK((a.op(0) - c.op(0)).norm() > 0.0);
}

TEST_CASE("constant stream repeats its matrix") {
    Matrix A(2, 2);
    A << 2, 0, 0, 0.5;
    Trajectory t = stream(CocycleSpec::constant_op(A, NormSpec::l1(), 1));
    CHECK((t.op(0) - A).norm() == 0.0);
    CHECK((t.op(999) - A).norm() == 0.0);
    CHECK(t.space.dim == 2);
}

TEST_CASE("rank_deficient kills the scheduled column") {
    Matrix A(2, 2);
    A << 2, 0, 0, 0.5;
    CocycleSpec base = CocycleSpec::constant_op(A, NormSpec::euclidean(), 3);
    CocycleSpec spec = CocycleSpec::rank_deficient_op(base, {5}, 1);
    Trajectory t = stream(spec);
    CHECK(t.op(4).col(1).norm() > 0.0);
    CHECK(t.op(5).col(1).norm() == 0.0);
    CHECK(t.op(6).col(1).norm() > 0.0);
}

TEST_CASE("rotation_driven follows the circle rotation") {
    Matrix base = Matrix::Identity(2, 2);
    Matrix mod = Matrix::Zero(2, 2);
    mod(0, 0) = 1.0;
    const double alpha = 0.3819660112501051;  // irrational rotation number
    CocycleSpec spec =
        CocycleSpec::rotation_driven_op(alpha, base, mod, NormSpec::euclidean(), 11);
    Trajectory t = stream(spec);
    // Replays bit-identically and the driver visits distinct angles.
    CHECK((t.op(3) - t.op(3)).norm() == 0.0);
    CHECK((t.op(0) - t.op(1)).norm() > 1e-6);
}

TEST_CASE("scalar law moments") {
    CHECK(ScalarLaw::constant(3.0).expected_log_abs() == doctest::Approx(std::log(3.0)));
    CHECK(ScalarLaw::two_point(2.0, 0.5).expected_log_abs() == doctest::Approx(0.0));
    CHECK(ScalarLaw::log_uniform(0.5, 2.0).expected_log_abs() == doctest::Approx(0.0));
    RngStream rng(17, 0);
    double sum = 0.0;
    const ScalarLaw law = ScalarLaw::log_uniform(0.5, 2.0);
    for (int i = 0; i < 100000; ++i) sum += std::log(std::abs(law.sample(rng)));
    CHECK(sum / 100000 == doctest::Approx(0.0).epsilon(0.02));
}

TEST_CASE("analytic_exponents oracles") {
    SUBCASE("constant diagonal") {
        Vector d(3);
        d << 4, 2, 1;
        CocycleSpec spec =
            CocycleSpec::constant_op(Matrix(d.asDiagonal()), NormSpec::euclidean(), 1);
        auto rep = analytic_exponents(spec);
        REQUIRE(rep.has_value());
        CHECK(rep->lambda.size() == 3);
        CHECK(rep->lambda[0] == doctest::Approx(std::log(4.0)));
        CHECK(rep->lambda[1] == doctest::Approx(std::log(2.0)));
        CHECK(rep->lambda[2] == doctest::Approx(0.0));
        CHECK(rep->mult == std::vector<int>{1, 1, 1});
        CHECK(rep->M == std::vector<int>{0, 1, 2});
    }
    SUBCASE("shear has the eigenvalue exponents") {
        Matrix A(2, 2);
        A << 2, 1, 0, 0.5;
        auto rep = analytic_exponents(CocycleSpec::constant_op(A, NormSpec::l1(), 1));
        REQUIRE(rep.has_value());
        CHECK(rep->lambda[0] == doctest::Approx(std::log(2.0)));
        CHECK(rep->lambda[1] == doctest::Approx(-std::log(2.0)));
        // Independent eigen-oracle cross check.
        auto eig = oracles::log_eigenvalue_moduli(A);
        CHECK(rep->lambda[0] == doctest::Approx(eig[0]));
        CHECK(rep->lambda[1] == doctest::Approx(eig[1]));
    }
    SUBCASE("repeated eigenvalues merge with multiplicity") {
        Vector d(3);
        d << 3, 3, 1;
        auto rep = analytic_exponents(
            CocycleSpec::constant_op(Matrix(d.asDiagonal()), NormSpec::euclidean(), 1));
        REQUIRE(rep.has_value());
        CHECK(rep->lambda.size() == 2);
        CHECK(rep->mult == std::vector<int>{2, 1});
    }
    SUBCASE("balanced two-point diagonal law has zero exponents") {
        std::vector<ScalarLaw> laws = {ScalarLaw::two_point(2.0, 0.5),
                                       ScalarLaw::two_point(2.0, 0.5)};
        auto rep = analytic_exponents(
            CocycleSpec::iid_diagonal_op(laws, NormSpec::euclidean(), 1));
        REQUIRE(rep.has_value());
        CHECK(rep->lambda.size() == 1);
        CHECK(rep->lambda[0] == doctest::Approx(0.0));
        CHECK(rep->mult[0] == 2);
    }
    SUBCASE("general sampler has no closed form") {
        CHECK_FALSE(
            analytic_exponents(CocycleSpec::iid_general_op(3, 1.0, NormSpec::l1(), 1))
                .has_value());
    }
    SUBCASE("triangular exponents come from the diagonal") {
        std::vector<ScalarLaw> laws = {ScalarLaw::constant(2.0), ScalarLaw::constant(0.5)};
        auto rep = analytic_exponents(CocycleSpec::triangular_op(
            laws, ScalarLaw::log_uniform(0.5, 2.0), NormSpec::euclidean(), 1));
        REQUIRE(rep.has_value());
        CHECK(rep->lambda[0] == doctest::Approx(std::log(2.0)));
        CHECK(rep->lambda[1] == doctest::Approx(-std::log(2.0)));
    }
}

TEST_CASE("kind names enumerate the schema") {
    auto names = cocycle_kind_names();
    CHECK(names.size() == 6);
    CHECK(names[0] == "constant");
    CHECK(names[5] == "rank_deficient");
}
