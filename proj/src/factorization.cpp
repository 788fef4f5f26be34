#include "gesp/factorization.hpp"

#include <cmath>
#include <limits>

namespace gesp {

namespace {

constexpr const char* kFillTag = "fill";

Eigen::MatrixXd bank_projection(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& bank,
                                const Grid& grid) {
    // P(n, j) = <phi_j, g_n> with Lebesgue weights.
    return basis.transpose() * grid.lebesgue_weights.asDiagonal() * bank;
}

}  // namespace

Eigen::MatrixXd WhiteNoiseModel::analytic_covariance(const Eigen::MatrixXd& bank,
                                                     const Grid& grid) const {
    const Eigen::MatrixXd P = bank_projection(basis, bank, grid);
    return P.transpose() * P;
}

RealizationBatch WhiteNoiseModel::realize(const Eigen::MatrixXd& bank, const Grid& grid,
                                          int realization_count) const {
    if (realization_count < 1)
        throw ValidationError("ValidationError", "need at least one realization");
    const int n = static_cast<int>(basis.cols());
    const std::uint64_t fill_seed = derive_stream_seed(seed, kFillTag);

    RealizationBatch batch;
    batch.seed = seed;
    batch.law = law;
    batch.coefficients.resize(realization_count, n);
    for (int r = 0; r < realization_count; ++r)
        for (int k = 0; k < n; ++k) {
            const ModeSource& source = sources[static_cast<std::size_t>(k)];
            batch.coefficients(r, k) =
                coefficient_stream(source.from_data ? seed : fill_seed, law,
                                   static_cast<std::uint64_t>(r), source.stream_index);
        }
    batch.evaluations = batch.coefficients * bank_projection(basis, bank, grid);
    return batch;
}

WhiteNoiseModel build_white_noise(const Eigen::MatrixXd& basis, const Grid& grid,
                                  const std::vector<ModeSource>& sources, std::uint64_t seed,
                                  CoefficientLaw law) {
    if (basis.rows() != grid.node_count())
        throw ValidationError("ShapeMismatch", "basis does not conform to the grid");
    if (static_cast<Eigen::Index>(sources.size()) != basis.cols())
        throw ValidationError("ShapeMismatch", "one coefficient source per basis member required");

    const Eigen::MatrixXd gram =
        basis.transpose() * grid.lebesgue_weights.asDiagonal() * basis;
    const double deviation =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (deviation > 1e-8)
        throw NumericError("BasisNotOrthonormal",
                           "white-noise basis deviates from discrete orthonormality by " +
                               std::to_string(deviation) + " (> 1e-8)");

    WhiteNoiseModel model;
    model.basis = basis;
    model.sources = sources;
    model.seed = seed;
    model.law = law;
    return model;
}

ColorFactorization color_factorize(const CovarianceKernel& kernel, int regularity_order,
                                   int growth_order, const Grid& grid, int n_modes,
                                   std::uint64_t seed, CoefficientLaw law, double eps_zero_rel,
                                   bool lebesgue_override) {
    if (regularity_order < 0 || growth_order < 0)
        throw ValidationError("ValidationError", "orders N and M must be non-negative");
    if (!lebesgue_override && kernel.growth_order > growth_order)
        throw NumericError("GrowthBoundViolated",
                           "kernel declares growth order " +
                               std::to_string(kernel.growth_order) +
                               " but the measure was requested with M = " +
                               std::to_string(growth_order));
    if (regularity_order > 0 && grid.rule != QuadratureRule::Trapezoid)
        throw ValidationError("NonUniformGrid",
                              "N > 0 requires a uniform (trapezoid) grid for the Bessel stage");

    const Eigen::MatrixXd K = assemble_covariance_matrix(kernel, grid);
    const WeightedMeasure measure =
        lebesgue_override ? make_lebesgue_measure(grid) : make_measure(grid, growth_order);

    ColorFactorization result;
    result.decomposition = nystrom_eigendecompose(K, grid, measure, n_modes, eps_zero_rel);
    const KLDecomposition& decomp = result.decomposition;

    std::vector<ModeSource> sources(decomp.n_modes());
    Eigen::VectorXd sigma(decomp.n_modes());
    for (int k = 0; k < decomp.n_modes(); ++k) {
        const bool null_mode = decomp.is_null(k);
        sources[k] = ModeSource{!null_mode, static_cast<std::uint64_t>(k)};
        // Exact zero on null modes: the spectral stage annihilates the fill
        // coefficients rather than scaling them by a rounding-level sqrt.
        sigma[k] = null_mode ? 0.0 : std::sqrt(decomp.eigenvalues[k]);
    }
    result.white_noise = build_white_noise(decomp.g, grid, sources, seed, law);

    const double weight_exponent =
        lebesgue_override ? 0.0 : 0.5 * growth_order + 0.25 * (grid.dimension + 1);
    FactoredOperator coloring;
    if (regularity_order > 0)
        coloring.stages.push_back(BesselPotentialStage{0.5 * regularity_order, 2});
    if (weight_exponent != 0.0)
        coloring.stages.push_back(WeightMultiplyStage{weight_exponent});
    coloring.stages.push_back(SpectralDiagonalStage{sigma, decomp.g});
    result.coloring_operator = coloring;

    GespExpansion process;
    process.lambdas = decomp.eigenvalues;
    process.components = decomp.f;
    if (regularity_order > 0)
        process.component_op.stages.push_back(BesselPotentialStage{0.5 * regularity_order, 2});
    process.regularity_order = regularity_order;
    process.growth_order = growth_order;
    process.law = law;
    process.stream_indices.resize(decomp.n_modes());
    for (int k = 0; k < decomp.n_modes(); ++k) process.stream_indices[k] = k;
    process.grid = grid;
    result.process = process;
    return result;
}

WhitenFactorization whiten_factorize(const ColorFactorization& factorization, int k_target) {
    if (k_target < 1)
        throw ValidationError("ValidationError", "k_target must be >= 1");
    const KLDecomposition& decomp = factorization.decomposition;
    const Grid& grid = factorization.process.grid;

    std::vector<int> positives;
    for (int k = 0; k < decomp.n_modes(); ++k)
        if (!decomp.is_null(k)) positives.push_back(k);
    if (static_cast<int>(positives.size()) < k_target)
        throw NumericError(
            "FiniteRank",
            "whitening needs at least " + std::to_string(k_target) +
                " modes with positive variance (an unbounded family in the idealized "
                "setting), but only " +
                std::to_string(positives.size()) + " were found above the zero threshold");

    const int rank = static_cast<int>(positives.size());
    RkhsBasis rkhs;
    rkhs.h.resize(grid.node_count(), rank);
    rkhs.lambdas.resize(rank);
    rkhs.mode_index = positives;
    rkhs.gamma.resize(rank);

    // Dual coordinates: pairing a test function against g_k / sqrt(lambda_k)
    // extracts the k-th coefficient in the h-basis of the positive-mode space.
    Eigen::MatrixXd dual(grid.node_count(), rank);
    for (int k = 0; k < rank; ++k) {
        const int mode = positives[k];
        const double lambda = decomp.eigenvalues[mode];
        rkhs.lambdas[k] = lambda;
        rkhs.h.col(k) = std::sqrt(lambda) * decomp.g.col(mode);
        dual.col(k) = decomp.g.col(mode) / std::sqrt(lambda);
        rkhs.gamma[k] = k;  // descending-lambda enumeration onto Hermite indices
    }

    const Eigen::MatrixXd hermite_targets = sample_hermite_functions(grid, rank);

    const GespExpansion& z = factorization.process;
    const double weight_exponent =
        decomp.measure.lebesgue_override
            ? 0.0
            : 0.5 * z.growth_order + 0.25 * (grid.dimension + 1);

    FactoredOperator whitening;
    whitening.stages.push_back(CoefficientRelabelStage{rkhs.gamma, dual, hermite_targets});
    if (weight_exponent != 0.0)
        whitening.stages.push_back(WeightMultiplyStage{-weight_exponent});
    if (z.regularity_order > 0)
        whitening.stages.push_back(BesselPotentialStage{-0.5 * z.regularity_order, 2});

    GespExpansion whitened;
    whitened.lambdas = Eigen::VectorXd::Ones(rank);
    whitened.components.resize(grid.node_count(), rank);
    for (int k = 0; k < rank; ++k)
        whitened.components.col(k) = hermite_targets.col(rkhs.gamma[k]);
    whitened.regularity_order = 0;
    whitened.growth_order = 0;
    whitened.law = z.law;
    whitened.stream_indices.resize(rank);
    for (int k = 0; k < rank; ++k)
        whitened.stream_indices[k] = static_cast<std::uint64_t>(positives[k]);
    whitened.grid = grid;

    WhitenFactorization result;
    result.whitening_operator = whitening;
    result.whitened = whitened;
    result.rkhs = rkhs;
    return result;
}

RoundtripReport roundtrip_check(const CovarianceKernel& kernel, int regularity_order,
                                int growth_order, const Grid& grid, int n_modes, int k_target,
                                std::uint64_t seed, int realization_count, int bank_size,
                                CoefficientLaw law, double z_threshold, double eps_zero_rel,
                                bool lebesgue_override) {
    const ColorFactorization color =
        color_factorize(kernel, regularity_order, growth_order, grid, n_modes, seed, law,
                        eps_zero_rel, lebesgue_override);

    const TestFunctionBank bank = build_bank(bank_size, grid);

    // Deterministic coloring check: covariance of LW through the operator
    // pipeline vs. the Mercer form of the expansion.
    Eigen::MatrixXd colored_bank(grid.node_count(), bank.count);
    for (int j = 0; j < bank.count; ++j)
        colored_bank.col(j) =
            apply_to_test_function(color.coloring_operator, bank.members.col(j), grid);
    const Eigen::MatrixXd operator_route =
        color.white_noise.analytic_covariance(colored_bank, grid);
    const Eigen::MatrixXd mercer_route = covariance_matrix(color.process, bank.members);

    RoundtripReport report;
    report.seed = seed;
    report.z_threshold = z_threshold;
    report.bank_size = bank.count;
    report.realizations = realization_count;
    report.modes = color.decomposition.n_modes();
    report.n0_size = static_cast<int>(color.decomposition.null_modes.size());
    report.rank = color.decomposition.positive_count();
    report.coloring_error = (operator_route - mercer_route).cwiseAbs().maxCoeff();

    const WhitenFactorization whiten = whiten_factorize(color, k_target);
    const Eigen::MatrixXd hermite_targets =
        whiten.whitened.components.leftCols(std::min(k_target, whiten.whitened.n_modes()));
    const Eigen::MatrixXd whitened_gram =
        covariance_matrix(whiten.whitened, hermite_targets);
    report.whitening_gram_error =
        (whitened_gram -
         Eigen::MatrixXd::Identity(hermite_targets.cols(), hermite_targets.cols()))
            .cwiseAbs()
            .maxCoeff();

    // Monte-Carlo consistency of both paths at the requested realization count.
    const RealizationBatch z_batch = realize(color.process, seed, bank.members, realization_count);
    const CovarianceReport color_mc =
        compare(empirical_covariance(z_batch.evaluations), mercer_route, z_threshold);
    report.mc_color_max_z = color_mc.max_abs_z;

    const RealizationBatch w_batch =
        realize(whiten.whitened, seed, hermite_targets, realization_count);
    const CovarianceReport whiten_mc = compare(
        empirical_covariance(w_batch.evaluations),
        Eigen::MatrixXd::Identity(hermite_targets.cols(), hermite_targets.cols()), z_threshold);
    report.mc_whiten_max_z = whiten_mc.max_abs_z;

    // Law independence of the second-order structure: gaussian and
    // rademacher batches must agree within joint standard-error bands.
    GespExpansion other_law = color.process;
    other_law.law = law == CoefficientLaw::Gaussian ? CoefficientLaw::Rademacher
                                                    : CoefficientLaw::Gaussian;
    const RealizationBatch other_batch =
        realize(other_law, seed, bank.members, realization_count);
    const EmpiricalCovariance main_cov = empirical_covariance(z_batch.evaluations);
    const EmpiricalCovariance other_cov = empirical_covariance(other_batch.evaluations);
    double max_joint = 0.0;
    for (Eigen::Index j = 0; j < main_cov.covariance.rows(); ++j)
        for (Eigen::Index k = 0; k < main_cov.covariance.cols(); ++k) {
            const double joint_se =
                std::sqrt(main_cov.standard_error(j, k) * main_cov.standard_error(j, k) +
                          other_cov.standard_error(j, k) * other_cov.standard_error(j, k));
            const double diff =
                std::abs(main_cov.covariance(j, k) - other_cov.covariance(j, k));
            if (joint_se > 0.0)
                max_joint = std::max(max_joint, diff / joint_se);
            else if (diff > 0.0)
                max_joint = std::numeric_limits<double>::infinity();
        }
    report.mc_law_agreement_max_z = max_joint;

    report.pass = report.coloring_error <= 1e-8 && report.whitening_gram_error <= 1e-8 &&
                  color_mc.pass && whiten_mc.pass && max_joint <= z_threshold;
    return report;
}

Eigen::VectorXd project_field(const KLDecomposition& decomposition, const Grid& grid,
                              const Eigen::VectorXd& field_samples) {
    if (field_samples.size() != grid.node_count())
        throw ValidationError("ShapeMismatch", "field does not conform to the grid");
    return decomposition.f.transpose() *
           decomposition.measure.effective_weights.cwiseProduct(field_samples);
}

}  // namespace gesp
