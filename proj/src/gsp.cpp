#include "gesp/gsp.hpp"

#include <cmath>

#include "gesp/io.hpp"

namespace gesp {

namespace {

void check_bank(const Eigen::MatrixXd& bank, const Grid& grid) {
    if (bank.rows() != grid.node_count())
        throw ValidationError("ShapeMismatch", "bank samples do not conform to the grid");
}

}  // namespace

double evaluate_pairing(const GespExpansion& expansion, int mode,
                        const Eigen::VectorXd& test_function) {
    if (mode < 0 || mode >= expansion.n_modes())
        throw ValidationError("ValidationError", "mode index out of range");
    const Eigen::VectorXd moved =
        apply_to_test_function(expansion.component_op, test_function, expansion.grid);
    return lebesgue_inner(expansion.components.col(mode), moved, expansion.grid);
}

Eigen::MatrixXd pairing_matrix(const GespExpansion& expansion, const Eigen::MatrixXd& bank) {
    check_bank(bank, expansion.grid);
    Eigen::MatrixXd pairings(expansion.n_modes(), bank.cols());
    for (Eigen::Index j = 0; j < bank.cols(); ++j) {
        const Eigen::VectorXd moved =
            apply_to_test_function(expansion.component_op, bank.col(j), expansion.grid);
        pairings.col(j) = expansion.components.transpose() *
                          expansion.grid.lebesgue_weights.cwiseProduct(moved);
    }
    return pairings;
}

double covariance(const GespExpansion& expansion, const Eigen::VectorXd& phi,
                  const Eigen::VectorXd& psi) {
    Eigen::MatrixXd bank(phi.size(), 2);
    bank.col(0) = phi;
    bank.col(1) = psi;
    const Eigen::MatrixXd pairings = pairing_matrix(expansion, bank);
    return pairings.col(0).cwiseProduct(pairings.col(1)).dot(expansion.lambdas);
}

Eigen::MatrixXd covariance_matrix(const GespExpansion& expansion, const Eigen::MatrixXd& bank) {
    const Eigen::MatrixXd pairings = pairing_matrix(expansion, bank);
    return pairings.transpose() * expansion.lambdas.asDiagonal() * pairings;
}

GespExpansion apply_adjoint(const GespExpansion& expansion, const FactoredOperator& op) {
    GespExpansion out = expansion;
    // T'_n = op(T_n): op becomes the outermost part of the component pipeline,
    // so the forward action on test functions applies op first.
    out.component_op = expansion.component_op.then(op);
    return out;
}

RealizationBatch realize(const GespExpansion& expansion, std::uint64_t seed,
                         const Eigen::MatrixXd& bank, int realization_count) {
    if (realization_count < 1)
        throw ValidationError("ValidationError", "need at least one realization");
    check_bank(bank, expansion.grid);

    const int n = expansion.n_modes();
    RealizationBatch batch;
    batch.seed = seed;
    batch.law = expansion.law;
    batch.coefficients.resize(realization_count, n);
    for (int r = 0; r < realization_count; ++r)
        for (int k = 0; k < n; ++k) {
            const std::uint64_t stream =
                expansion.stream_indices.empty() ? static_cast<std::uint64_t>(k)
                                                 : expansion.stream_indices[k];
            batch.coefficients(r, k) = coefficient_stream(
                seed, expansion.law, static_cast<std::uint64_t>(r), stream);
        }

    const Eigen::MatrixXd pairings = pairing_matrix(expansion, bank);  // n x K
    const Eigen::VectorXd scale = expansion.lambdas.cwiseSqrt();
    batch.evaluations = batch.coefficients * scale.asDiagonal() * pairings;
    return batch;
}

std::string batch_to_csv(const RealizationBatch& batch) {
    std::vector<std::string> columns;
    columns.reserve(batch.evaluations.cols());
    for (Eigen::Index j = 0; j < batch.evaluations.cols(); ++j)
        columns.push_back("phi" + std::to_string(j));
    return matrix_to_csv(columns, batch.evaluations);
}

}  // namespace gesp
