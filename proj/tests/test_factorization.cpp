#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gesp/factorization.hpp"

using namespace gesp;

namespace {

Eigen::MatrixXd coloring_routes_gap(const ColorFactorization& color,
                                    const Eigen::MatrixXd& bank, const Grid& grid) {
    Eigen::MatrixXd colored(grid.node_count(), bank.cols());
    for (Eigen::Index j = 0; j < bank.cols(); ++j)
        colored.col(j) = apply_to_test_function(color.coloring_operator, bank.col(j), grid);
    const Eigen::MatrixXd via_operator = color.white_noise.analytic_covariance(colored, grid);
    const Eigen::MatrixXd via_mercer = covariance_matrix(color.process, bank);
    return via_operator - via_mercer;
}

}  // namespace

TEST_CASE("white-noise model covariance is the restricted Gram") {
    const Grid grid = build_grid(1, 12.0, 256, QuadratureRule::GaussLegendre);
    const Eigen::MatrixXd basis = sample_hermite_functions(grid, 8);
    std::vector<ModeSource> sources(8);
    for (int k = 0; k < 8; ++k) sources[k] = ModeSource{false, static_cast<std::uint64_t>(k)};
    const WhiteNoiseModel w = build_white_noise(basis, grid, sources, 17, CoefficientLaw::Gaussian);

    SUBCASE("variance one along basis members, zero across") {
        const Eigen::MatrixXd cov = w.analytic_covariance(basis.leftCols(2), grid);
        CHECK(std::abs(cov(0, 0) - 1.0) <= 1e-10);
        CHECK(std::abs(cov(1, 1) - 1.0) <= 1e-10);
        CHECK(std::abs(cov(0, 1)) <= 1e-10);
    }

    SUBCASE("unit variance of a normalized combination") {
        Eigen::MatrixXd mix(grid.node_count(), 1);
        mix.col(0) = (basis.col(0) + basis.col(1)) / std::numbers::sqrt2;
        const Eigen::MatrixXd cov = w.analytic_covariance(mix, grid);
        CHECK(std::abs(cov(0, 0) - 1.0) <= 1e-10);
    }

    SUBCASE("full-span covariance matches the plain Gram on the bank") {
        const Eigen::MatrixXd bank = sample_hermite_functions(grid, 4);
        const Eigen::MatrixXd gram =
            bank.transpose() * grid.lebesgue_weights.asDiagonal() * bank;
        // The first 8 Hermites span the first 4 exactly.
        const Eigen::MatrixXd cov = w.analytic_covariance(bank, grid);
        CHECK((cov - gram).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("non-orthonormal bases are rejected") {
    const Grid grid = build_grid(1, 12.0, 256, QuadratureRule::GaussLegendre);
    const Eigen::MatrixXd basis = 1.5 * sample_hermite_functions(grid, 4);
    std::vector<ModeSource> sources(4);
    try {
        build_white_noise(basis, grid, sources, 0, CoefficientLaw::Gaussian);
        FAIL("expected BasisNotOrthonormal");
    } catch (const Error& e) {
        CHECK(e.code() == "BasisNotOrthonormal");
    }
}

TEST_CASE("coloring factorization of the gaussian kernel") {
    const Grid grid = build_grid(1, 20.0, 256, QuadratureRule::GaussLegendre);
    const ColorFactorization color =
        color_factorize(CovarianceKernel::gaussian(), 0, 0, grid, 64, 99);
    const TestFunctionBank bank = build_bank(8, grid);

    SUBCASE("operator route equals the Mercer route") {
        CHECK(coloring_routes_gap(color, bank.members, grid).cwiseAbs().maxCoeff() <= 1e-8);
    }

    SUBCASE("Mercer route equals the direct kernel quadrature oracle") {
        const Eigen::MatrixXd K =
            assemble_covariance_matrix(CovarianceKernel::gaussian(), grid);
        const Eigen::MatrixXd fm = color.decomposition.f;
        const Eigen::MatrixXd truncated =
            fm * color.decomposition.eigenvalues.asDiagonal() * fm.transpose();
        const Eigen::MatrixXd weighted_bank = grid.lebesgue_weights.asDiagonal() * bank.members;
        const Eigen::MatrixXd direct =
            weighted_bank.transpose() * truncated * weighted_bank;
        const Eigen::MatrixXd mercer = covariance_matrix(color.process, bank.members);
        CHECK((direct - mercer).cwiseAbs().maxCoeff() <= 1e-8);

        // The truncation itself is faithful to the kernel at this mode count.
        const Eigen::MatrixXd full =
            weighted_bank.transpose() * K * weighted_bank;
        CHECK((direct - full).cwiseAbs().maxCoeff() <= 1e-8);
    }

    SUBCASE("pipeline shape follows the factorization recipe") {
        REQUIRE(color.coloring_operator.stages.size() == 2);  // N=0 drops the Bessel stage
        CHECK(std::holds_alternative<WeightMultiplyStage>(color.coloring_operator.stages[0]));
        CHECK(std::holds_alternative<SpectralDiagonalStage>(color.coloring_operator.stages[1]));
        const auto& weight = std::get<WeightMultiplyStage>(color.coloring_operator.stages[0]);
        CHECK(weight.exponent == doctest::Approx(0.5));  // M/2 + (d+1)/4 at M=0, d=1
    }
}

TEST_CASE("rank-one coloring splits data and fill modes") {
    const Grid grid = build_grid(1, 12.0, 128, QuadratureRule::GaussLegendre);
    const ColorFactorization color =
        color_factorize(CovarianceKernel::rank1(), 0, 0, grid, 16, 5);

    const auto& spectral =
        std::get<SpectralDiagonalStage>(color.coloring_operator.stages.back());
    CHECK(spectral.values[0] > 0.0);
    CHECK(spectral.values.tail(15).cwiseAbs().maxCoeff() == 0.0);  // exact zeros on null modes

    int data_modes = 0, fill_modes = 0;
    for (const auto& source : color.white_noise.sources)
        (source.from_data ? data_modes : fill_modes) += 1;
    CHECK(data_modes == 1);
    CHECK(fill_modes == 15);

    const TestFunctionBank bank = build_bank(8, grid);
    CHECK(coloring_routes_gap(color, bank.members, grid).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("fill coefficients do not influence the process or its covariance") {
    const Grid grid = build_grid(1, 12.0, 128, QuadratureRule::GaussLegendre);
    const TestFunctionBank bank = build_bank(6, grid);

    // Two factorizations differing only in the fill sub-stream seed.
    const ColorFactorization a =
        color_factorize(CovarianceKernel::rank1(), 0, 0, grid, 16, 5);
    ColorFactorization b = a;
    b.white_noise.seed = 900001;  // different fill draws (and data draws)

    Eigen::MatrixXd colored(grid.node_count(), bank.count);
    for (int j = 0; j < bank.count; ++j)
        colored.col(j) = apply_to_test_function(a.coloring_operator, bank.members.col(j), grid);

    // Analytic covariance of LW never touches the coefficients: bit-identical.
    CHECK(a.white_noise.analytic_covariance(colored, grid) ==
          b.white_noise.analytic_covariance(colored, grid));

    // The white-noise realizations themselves do feel the fill draws.
    const RealizationBatch ra = a.white_noise.realize(bank.members, grid, 8);
    const RealizationBatch rb = b.white_noise.realize(bank.members, grid, 8);
    CHECK(ra.evaluations != rb.evaluations);
}

TEST_CASE("sample-level coloring identity LW = Z under a shared seed") {
    const Grid grid = build_grid(1, 20.0, 256, QuadratureRule::GaussLegendre);
    const std::uint64_t seed = 314;
    const ColorFactorization color =
        color_factorize(CovarianceKernel::gaussian(), 0, 0, grid, 64, seed);
    const TestFunctionBank bank = build_bank(6, grid);

    Eigen::MatrixXd colored(grid.node_count(), bank.count);
    for (int j = 0; j < bank.count; ++j)
        colored.col(j) =
            apply_to_test_function(color.coloring_operator, bank.members.col(j), grid);

    const RealizationBatch lw = color.white_noise.realize(colored, grid, 16);
    const RealizationBatch z = realize(color.process, seed, bank.members, 16);
    CHECK((lw.evaluations - z.evaluations).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("second-order coloring agrees with the flat factorization") {
    const Grid grid = build_grid(1, 20.0, 256, QuadratureRule::Trapezoid);
    const ColorFactorization curved =
        color_factorize(CovarianceKernel::gaussian(), 2, 0, grid, 48, 7);
    const ColorFactorization flat =
        color_factorize(CovarianceKernel::gaussian(), 0, 0, grid, 48, 7);
    const TestFunctionBank bank = build_bank(6, grid);

    CHECK(coloring_routes_gap(curved, bank.members, grid).cwiseAbs().maxCoeff() <= 1e-8);

    // Covariance of the N=2 process on phi equals the N=0 covariance on
    // (1 - Lap) phi.
    FactoredOperator lap;
    lap.stages.push_back(BesselPotentialStage{1.0, 2});
    for (int a = 0; a < bank.count; ++a)
        for (int b = 0; b < bank.count; ++b) {
            const Eigen::VectorXd fa = apply_to_test_function(lap, bank.members.col(a), grid);
            const Eigen::VectorXd fb = apply_to_test_function(lap, bank.members.col(b), grid);
            CHECK(std::abs(covariance(curved.process, bank.members.col(a), bank.members.col(b)) -
                           covariance(flat.process, fa, fb)) <= 1e-6);
        }
}

TEST_CASE("growth-order mismatches are rejected") {
    const Grid grid = build_grid(1, 12.0, 64, QuadratureRule::GaussLegendre);
    try {
        color_factorize(CovarianceKernel::polynomial_growth_demo(), 0, 0, grid, 16, 1);
        FAIL("expected GrowthBoundViolated");
    } catch (const Error& e) {
        CHECK(e.code() == "GrowthBoundViolated");
    }
    CHECK_NOTHROW(
        color_factorize(CovarianceKernel::polynomial_growth_demo(), 0, 2, grid, 16, 1));
}

TEST_CASE("coloring of the growth kernel is stable under grid refinement") {
    const CovarianceKernel kernel = CovarianceKernel::polynomial_growth_demo();
    const Grid coarse = build_grid(1, 20.0, 256, QuadratureRule::GaussLegendre);
    const Grid fine = build_grid(1, 20.0, 512, QuadratureRule::GaussLegendre);

    const ColorFactorization cc = color_factorize(kernel, 0, 2, coarse, 64, 3);
    const ColorFactorization cf = color_factorize(kernel, 0, 2, fine, 64, 3);
    const TestFunctionBank bc = build_bank(6, coarse);
    const TestFunctionBank bf = build_bank(6, fine);

    CHECK(coloring_routes_gap(cc, bc.members, coarse).cwiseAbs().maxCoeff() <= 1e-6);
    const Eigen::MatrixXd cov_coarse = covariance_matrix(cc.process, bc.members);
    const Eigen::MatrixXd cov_fine = covariance_matrix(cf.process, bf.members);
    CHECK((cov_coarse - cov_fine).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("whitening the gaussian process") {
    const Grid grid = build_grid(1, 20.0, 256, QuadratureRule::GaussLegendre);
    const ColorFactorization color =
        color_factorize(CovarianceKernel::gaussian(), 0, 0, grid, 32, 21);
    const WhitenFactorization whiten = whiten_factorize(color, 8);

    SUBCASE("gamma is the identity enumeration for a strictly positive kernel") {
        CHECK(whiten.rkhs.gamma.size() == static_cast<std::size_t>(color.decomposition.positive_count()));
        for (std::size_t k = 0; k < whiten.rkhs.gamma.size(); ++k)
            CHECK(whiten.rkhs.gamma[k] == static_cast<int>(k));
        for (std::size_t k = 0; k < whiten.rkhs.mode_index.size(); ++k)
            CHECK(whiten.rkhs.mode_index[k] == static_cast<int>(k));
    }

    SUBCASE("h system is orthonormal in the reproducing-kernel inner product") {
        // (h_n, h_m)_H reduces to the plain Gram of the g system.
        const Eigen::MatrixXd gram = whiten.rkhs.h.transpose() *
                                     grid.lebesgue_weights.asDiagonal() * whiten.rkhs.h;
        for (Eigen::Index n = 0; n < gram.rows(); ++n)
            for (Eigen::Index m = 0; m < gram.cols(); ++m) {
                const double h_inner =
                    gram(n, m) / std::sqrt(whiten.rkhs.lambdas[n] * whiten.rkhs.lambdas[m]);
                CHECK(std::abs(h_inner - (n == m ? 1.0 : 0.0)) <= 1e-10);
            }
    }

    SUBCASE("whitened Gram on the Hermite targets is the identity") {
        const Eigen::MatrixXd targets = whiten.whitened.components.leftCols(8);
        const Eigen::MatrixXd gram = covariance_matrix(whiten.whitened, targets);
        CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-8);
    }

    SUBCASE("whitened process via the full operator route") {
        // Pair Z against the forward image of the whitening pipeline.
        const GespExpansion routed = apply_adjoint(color.process, whiten.whitening_operator);
        const Eigen::MatrixXd targets = whiten.whitened.components.leftCols(8);
        const Eigen::MatrixXd gram = covariance_matrix(routed, targets);
        CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-8);
    }

    SUBCASE("sample-level whitening identity under a shared seed") {
        const Eigen::MatrixXd targets = whiten.whitened.components.leftCols(8);
        Eigen::MatrixXd moved(grid.node_count(), targets.cols());
        for (Eigen::Index j = 0; j < targets.cols(); ++j)
            moved.col(j) =
                apply_to_test_function(whiten.whitening_operator, targets.col(j), grid);
        const RealizationBatch via_z = realize(color.process, 21, moved, 12);
        const RealizationBatch via_w = realize(whiten.whitened, 21, targets, 12);
        CHECK((via_z.evaluations - via_w.evaluations).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("whitening requires enough positive modes") {
    const Grid grid = build_grid(1, 12.0, 128, QuadratureRule::GaussLegendre);
    const ColorFactorization rank1 =
        color_factorize(CovarianceKernel::rank1(), 0, 0, grid, 16, 5);
    try {
        whiten_factorize(rank1, 2);
        FAIL("expected FiniteRank");
    } catch (const Error& e) {
        CHECK(e.code() == "FiniteRank");
        CHECK(std::string(e.what()).find("1") != std::string::npos);  // reports the rank found
    }
    CHECK_NOTHROW(whiten_factorize(rank1, 1));
}

TEST_CASE("roundtrip report on the gaussian kernel") {
    const Grid grid = build_grid(1, 20.0, 256, QuadratureRule::GaussLegendre);
    const RoundtripReport report =
        roundtrip_check(CovarianceKernel::gaussian(), 0, 0, grid, 32, 8, 2026, 10000);

    CHECK(report.coloring_error <= 1e-8);
    CHECK(report.whitening_gram_error <= 1e-8);
    CHECK(report.mc_color_max_z <= 4.0);
    CHECK(report.mc_whiten_max_z <= 4.0);
    CHECK(report.mc_law_agreement_max_z <= 4.0);
    CHECK(report.rank == 32);
    CHECK(report.n0_size == 0);
    CHECK(report.pass);

    SUBCASE("reports are seed-reproducible") {
        const RoundtripReport again =
            roundtrip_check(CovarianceKernel::gaussian(), 0, 0, grid, 32, 8, 2026, 10000);
        CHECK(again.coloring_error == report.coloring_error);
        CHECK(again.whitening_gram_error == report.whitening_gram_error);
        CHECK(again.mc_color_max_z == report.mc_color_max_z);
        CHECK(again.mc_whiten_max_z == report.mc_whiten_max_z);
        CHECK(again.mc_law_agreement_max_z == report.mc_law_agreement_max_z);
    }
}

TEST_CASE("roundtrip surfaces a FiniteRank failure on degenerate kernels") {
    const Grid grid = build_grid(1, 12.0, 128, QuadratureRule::GaussLegendre);
    const ColorFactorization zero =
        color_factorize(CovarianceKernel::zero(), 0, 0, grid, 8, 1);
    CHECK(covariance_matrix(zero.process, sample_hermite_functions(grid, 2))
              .cwiseAbs()
              .maxCoeff() == 0.0);  // coloring of the zero kernel is the zero process
    try {
        roundtrip_check(CovarianceKernel::zero(), 0, 0, grid, 8, 2, 1, 100);
        FAIL("expected FiniteRank");
    } catch (const Error& e) {
        CHECK(e.code() == "FiniteRank");
    }
}

TEST_CASE("two-dimensional coloring and whitening") {
    const Grid grid = build_grid(2, 8.0, 32, QuadratureRule::Trapezoid);
    const ColorFactorization color =
        color_factorize(CovarianceKernel::gaussian(), 0, 0, grid, 16, 404);
    const TestFunctionBank bank = build_bank(4, grid);
    CHECK(coloring_routes_gap(color, bank.members, grid).cwiseAbs().maxCoeff() <= 1e-8);

    const WhitenFactorization whiten = whiten_factorize(color, 4);
    const Eigen::MatrixXd targets = whiten.whitened.components.leftCols(4);
    const Eigen::MatrixXd gram = covariance_matrix(whiten.whitened, targets);
    CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("realization batches export realization-major CSV") {
    const Grid grid = build_grid(1, 12.0, 128, QuadratureRule::GaussLegendre);
    const ColorFactorization color =
        color_factorize(CovarianceKernel::gaussian(), 0, 0, grid, 8, 31);
    const Eigen::MatrixXd bank = sample_hermite_functions(grid, 3);
    const RealizationBatch batch = realize(color.process, 31, bank, 5);
    const std::string csv = batch_to_csv(batch);
    CHECK(csv.substr(0, csv.find('\n')) == "phi0,phi1,phi2");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 realizations
}

TEST_CASE("field projection recovers mu coordinates") {
    const Grid grid = build_grid(1, 20.0, 128, QuadratureRule::GaussLegendre);
    const ColorFactorization color =
        color_factorize(CovarianceKernel::gaussian(), 0, 0, grid, 16, 2);
    const Eigen::VectorXd field = 2.5 * color.decomposition.f.col(1);
    const Eigen::VectorXd coords = project_field(color.decomposition, grid, field);
    CHECK(std::abs(coords[1] - 2.5) <= 1e-10);
    for (int n = 0; n < 16; ++n)
        if (n != 1) CHECK(std::abs(coords[n]) <= 1e-10);
}
