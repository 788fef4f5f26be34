#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gesp/grid.hpp"
#include "gesp/hermite.hpp"
#include "gesp/mc.hpp"
#include "gesp/operators.hpp"

namespace gesp {

/**
 * A generalized stochastic process as a finite series expansion
 * Z = sum_n Z_n T_n with uncorrelated coefficients Z_n of variance
 * lambda_n. Each component distribution T_n is kept in factored form: base
 * samples (column n of `components`) plus one shared operator pipeline,
 * by default (1 - Laplacian)^(N/2). The process is observable only
 * through pairings with test functions.
 */
struct GespExpansion {
    Eigen::VectorXd lambdas;          // descending variances, >= 0
    Eigen::MatrixXd components;       // node_count x n_modes base samples
    FactoredOperator component_op;    // applied to every component
    int regularity_order = 0;         // N
    int growth_order = 0;             // M
    CoefficientLaw law = CoefficientLaw::Gaussian;
    std::vector<std::uint64_t> stream_indices;  // coefficient stream per mode
    Grid grid;

    int n_modes() const { return static_cast<int>(lambdas.size()); }
    double lambda_tail() const { return lambdas.size() ? lambdas[lambdas.size() - 1] : 0.0; }
};

/// Monte-Carlo realizations of the expansion observed through a bank.
struct RealizationBatch {
    Eigen::MatrixXd coefficients;  // R x n_modes, unscaled unit-variance draws
    Eigen::MatrixXd evaluations;   // R x K values Z_r(phi_j)
    std::uint64_t seed = 0;
    CoefficientLaw law = CoefficientLaw::Gaussian;
};

/// Pairing <T_n, phi> of one component against a test function: the
/// component operator is moved onto phi, then integrated with plain
/// Lebesgue weights.
double evaluate_pairing(const GespExpansion& expansion, int mode,
                        const Eigen::VectorXd& test_function);

/// All pairings at once: A(n, j) = <T_n, phi_j>.
Eigen::MatrixXd pairing_matrix(const GespExpansion& expansion, const Eigen::MatrixXd& bank);

/// Cov(Z(phi), Z(psi)) = sum_n lambda_n <T_n, phi> <T_n, psi>.
double covariance(const GespExpansion& expansion, const Eigen::VectorXd& phi,
                  const Eigen::VectorXd& psi);

/// Analytic covariance matrix of the expansion on a bank.
Eigen::MatrixXd covariance_matrix(const GespExpansion& expansion, const Eigen::MatrixXd& bank);

/// The expansion of op applied to Z (adjoint action): pairings satisfy
/// <T'_n, phi> = <T_n, op_forward(phi)>.
GespExpansion apply_adjoint(const GespExpansion& expansion, const FactoredOperator& op);

/// Draw R realizations against a bank. Coefficients come from the counter
/// stream keyed by (seed, realization, stream_index); evaluations are
/// Z_r(phi_j) = sum_n sqrt(lambda_n) c_rn <T_n, phi_j>.
RealizationBatch realize(const GespExpansion& expansion, std::uint64_t seed,
                         const Eigen::MatrixXd& bank, int realization_count);

/// Realization-major CSV of the evaluations (one row per realization).
std::string batch_to_csv(const RealizationBatch& batch);

}  // namespace gesp
