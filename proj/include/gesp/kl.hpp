#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "gesp/grid.hpp"

namespace gesp {

/**
 * Symmetric covariance kernel C(x, y) together with its declared growth
 * envelope |C(x,y)| <= bound * (1+|x|^2)^(M/2) * (1+|y|^2)^(M/2). The
 * envelope is checked at grid nodes during assembly, not proven.
 */
struct CovarianceKernel {
    using Evaluator = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

    std::string kind;
    Evaluator evaluate;
    double bound = 1.0;     // Cbound
    int growth_order = 0;   // M in the envelope

    // Set for grid-file kernels: values already tabulated on the grid nodes.
    Eigen::MatrixXd tabulated;

    static CovarianceKernel gaussian(double length_scale = 1.0);
    static CovarianceKernel exponential(double length_scale = 1.0);
    /// Brownian-motion kernel min(s,t) restricted to [0,1]^2 (tensorized
    /// over axes for d > 1); zero off the support.
    static CovarianceKernel brownian();
    /// Rank-one kernel h_0 (x) h_0 (y) built from the ground Hermite function.
    static CovarianceKernel rank1();
    /// Unbounded demonstration kernel (1+|x|^2)(1+|y|^2) exp(-|x-y|^2 / 2)
    /// with growth order M = 2.
    static CovarianceKernel polynomial_growth_demo();
    static CovarianceKernel zero();
    /// Kernel tabulated on the grid nodes, loaded from node-major CSV.
    static CovarianceKernel from_grid_file(const std::string& path, const Grid& grid,
                                           double bound, int growth_order);

    static const std::vector<std::string>& builtin_names();
    static CovarianceKernel builtin(const std::string& name, double length_scale = 1.0);
};

/**
 * Discrete Karhunen-Loeve decomposition of the covariance operator on
 * L^2(mu): eigenvalues in descending order, mu-orthonormal eigenfunction
 * samples f_n, and the derived L^2-orthonormal system g_n = sqrt(m) f_n.
 */
struct KLDecomposition {
    Eigen::VectorXd eigenvalues;          // descending, clipped at 0
    Eigen::MatrixXd f;                    // node_count x n_modes, mu-orthonormal
    Eigen::MatrixXd g;                    // node_count x n_modes, L^2-orthonormal
    std::vector<int> null_modes;          // N0 = { n : lambda_n <= eps_zero }
    double eps_zero = 0.0;                // resolved absolute threshold
    double trace_estimate = 0.0;          // sum_i C(x_i, x_i) v_i
    int clipped_negatives = 0;            // quadrature-noise eigenvalues set to 0
    WeightedMeasure measure;

    int n_modes() const { return static_cast<int>(eigenvalues.size()); }
    bool is_null(int n) const;
    int positive_count() const { return n_modes() - static_cast<int>(null_modes.size()); }
};

/// K_ij = C(x_i, x_j), symmetrized; throws GrowthBoundViolated when a node
/// pair exceeds the declared envelope by more than 1%.
Eigen::MatrixXd assemble_covariance_matrix(const CovarianceKernel& kernel, const Grid& grid);

/**
 * Nystrom eigendecomposition: form B = S K S with S = diag(sqrt(v_i)),
 * solve the symmetric eigenproblem, keep the top n_modes pairs, and map
 * back to f_n = u_n / sqrt(v). Small negative eigenvalues (>= -1e-8 *
 * lambda_max) are clipped to zero; anything lower raises
 * NotPositiveSemiDefinite. eps_zero_rel <= 0 selects the default 1e-10.
 */
KLDecomposition nystrom_eigendecompose(const Eigen::MatrixXd& kernel_matrix, const Grid& grid,
                                       const WeightedMeasure& measure, int n_modes,
                                       double eps_zero_rel = -1.0);

/// Relative v-weighted Frobenius error of the rank-m Mercer reconstruction.
double mercer_reconstruct_error(const KLDecomposition& decomposition,
                                const Eigen::MatrixXd& kernel_matrix, const Grid& grid,
                                const WeightedMeasure& measure, int m);

}  // namespace gesp
