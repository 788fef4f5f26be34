#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gesp/hermite.hpp"
#include "oracles.hpp"

using namespace gesp;

TEST_CASE("pointwise values at the origin") {
    const double quarter_root_pi = std::pow(std::numbers::pi, -0.25);
    CHECK(hermite_function(0, 0.0) == doctest::Approx(quarter_root_pi).epsilon(1e-12));
    CHECK(hermite_function(0, 0.0) == doctest::Approx(0.7511255444649425).epsilon(1e-12));
    CHECK(hermite_function(1, 0.0) == 0.0);
    CHECK(hermite_function(2, 0.0) ==
          doctest::Approx(-quarter_root_pi / std::numbers::sqrt2).epsilon(1e-12));
}

TEST_CASE("unit L2 norm by quadrature oracle") {
    for (int n : {0, 2, 5}) {
        const double norm2 = oracles::integrate(
            [n](double x) {
                const double h = hermite_function(n, x);
                return h * h;
            },
            -14.0, 14.0, 1e-13);
        CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("parity under reflection") {
    for (int n = 0; n <= 12; ++n)
        for (double x : {0.17, 0.9, 2.4, 5.5}) {
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            CHECK(std::abs(hermite_function(n, -x) - sign * hermite_function(n, x)) <= 1e-12);
        }
}

TEST_CASE("far tail underflows to zero without error") {
    CHECK(hermite_function(3, 60.0) == 0.0);
}

TEST_CASE("multi-index enumeration") {
    SUBCASE("d=1 is the natural order") {
        const auto idx = enumerate_multi_indices(1, 5);
        for (int k = 0; k < 5; ++k) CHECK(idx[k] == std::vector<int>{k});
    }
    SUBCASE("d=2 first four members") {
        const auto idx = enumerate_multi_indices(2, 4);
        CHECK(idx[0] == std::vector<int>{0, 0});
        CHECK(idx[1] == std::vector<int>{1, 0});
        CHECK(idx[2] == std::vector<int>{0, 1});
        CHECK(idx[3] == std::vector<int>{1, 1});
    }
    SUBCASE("enumeration is injective") {
        const auto idx = enumerate_multi_indices(3, 64);
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a + 1; b < idx.size(); ++b) CHECK(idx[a] != idx[b]);
    }
}

TEST_CASE("single-member bank") {
    const Grid grid = build_grid(1, 12.0, 128, QuadratureRule::GaussLegendre);
    const TestFunctionBank bank = build_bank(1, grid);
    CHECK(bank.count == 1);
    CHECK(std::abs(bank.gram_l2(0, 0) - 1.0) <= 1e-10);
}

TEST_CASE("bank orthonormality at reference resolution") {
    const Grid grid = build_grid(1, 12.0, 256, QuadratureRule::GaussLegendre);
    const TestFunctionBank bank = build_bank(8, grid);
    CHECK(bank.gram_deviation() <= 1e-8);

    // Cross-check two Gram entries against the quadrature oracle.
    const double diag = oracles::integrate(
        [](double x) { return hermite_function(3, x) * hermite_function(3, x); }, -12.0, 12.0,
        1e-13);
    const double off = oracles::integrate(
        [](double x) { return hermite_function(3, x) * hermite_function(5, x); }, -12.0, 12.0,
        1e-13);
    CHECK(std::abs(bank.gram_l2(3, 3) - diag) <= 1e-9);
    CHECK(std::abs(bank.gram_l2(3, 5) - off) <= 1e-9);
}

TEST_CASE("bank orthonormality at the large reference size") {
    const Grid grid = build_grid(1, 12.0, 256, QuadratureRule::GaussLegendre);
    const TestFunctionBank bank = build_bank(32, grid);
    CHECK(bank.gram_deviation() <= 1e-8);
}

TEST_CASE("tensor bank in two dimensions") {
    const Grid grid = build_grid(2, 10.0, 64, QuadratureRule::GaussLegendre);
    const TestFunctionBank bank = build_bank(4, grid);
    CHECK(bank.labels[3] == std::vector<int>{1, 1});
    CHECK(bank.gram_deviation() <= 1e-8);

    // Member 3 is the tensor product of two first-order factors.
    Eigen::VectorXd manual(grid.node_count());
    for (Eigen::Index i = 0; i < grid.node_count(); ++i)
        manual[i] =
            hermite_function(1, grid.nodes(i, 0)) * hermite_function(1, grid.nodes(i, 1));
    CHECK((bank.members.col(3) - manual).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("under-resolved banks are rejected") {
    // Precondition gate: P < 8 sqrt(K).
    const Grid coarse = build_grid(1, 12.0, 32, QuadratureRule::GaussLegendre);
    CHECK_THROWS_AS(build_bank(64, coarse), Error);

    // Numeric gate: domain too small for the requested members.
    const Grid narrow = build_grid(1, 3.0, 256, QuadratureRule::GaussLegendre);
    try {
        build_bank(32, narrow);
        FAIL("expected UnderResolved");
    } catch (const Error& e) {
        CHECK(e.code() == "UnderResolved");
    }
}

TEST_CASE("projection error onto the bank decreases with K") {
    const Grid grid = build_grid(1, 12.0, 256, QuadratureRule::GaussLegendre);
    Eigen::VectorXd bump(grid.node_count());
    for (Eigen::Index i = 0; i < grid.node_count(); ++i)
        bump[i] = std::exp(-std::pow(grid.nodes(i, 0) - 0.3, 2));

    const TestFunctionBank bank = build_bank(16, grid);
    double previous = std::numeric_limits<double>::infinity();
    for (int K = 1; K <= 16; ++K) {
        Eigen::VectorXd residual = bump;
        for (int j = 0; j < K; ++j) {
            const double coef = lebesgue_inner(bump, bank.members.col(j), grid);
            residual -= coef * bank.members.col(j);
        }
        const double err = std::sqrt(lebesgue_inner(residual, residual, grid));
        CHECK(err <= previous + 1e-12);
        previous = err;
    }
}

TEST_CASE("bank CSV uses multi-index column labels") {
    const Grid grid = build_grid(1, 12.0, 128, QuadratureRule::GaussLegendre);
    const TestFunctionBank bank = build_bank(2, grid);
    const std::string csv = bank_to_csv(bank);
    CHECK(csv.substr(0, csv.find('\n')) == "phi_0,phi_1");
}
