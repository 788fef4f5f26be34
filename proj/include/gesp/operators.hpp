#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "gesp/grid.hpp"

namespace gesp {

/// Fourier-multiplier stage (1 - Laplacian)^alpha. The field is zero-padded
/// by `pad_factor` and treated as periodic before filtering; pad_factor 1
/// keeps the grid's own periodization (exact on commensurate plane waves).
struct BesselPotentialStage {
    double alpha = 0.0;
    int pad_factor = 2;
};

/// Pointwise multiplication by (1 + |x|^2)^exponent.
struct WeightMultiplyStage {
    double exponent = 0.0;
};

/// phi -> sum_n sigma_n <phi, g_n> g_n against an attached L^2-orthonormal
/// basis (columns of `basis`).
struct SpectralDiagonalStage {
    Eigen::VectorXd values;  // sigma_n >= 0
    Eigen::MatrixXd basis;   // node_count x modes
};

/// phi -> sum_n <phi, target_{gamma(n)}> source_n. The injective map gamma
/// relabels source members onto target members.
struct CoefficientRelabelStage {
    std::vector<int> gamma;   // source index n -> target column gamma[n]
    Eigen::MatrixXd source;   // node_count x count
    Eigen::MatrixXd target;   // node_count x target_count
};

using OperatorStage = std::variant<BesselPotentialStage, WeightMultiplyStage,
                                   SpectralDiagonalStage, CoefficientRelabelStage>;

/**
 * Composition pipeline of grid-level linear operators.
 *
 * Stages are stored in the order the composed operator acts on a process
 * (outermost first). Because every stage is self-adjoint -- or, for the
 * relabel stage, carries its own source/target pair -- the action on a test
 * function applies the stage list left to right.
 */
struct FactoredOperator {
    std::vector<OperatorStage> stages;

    bool empty() const { return stages.empty(); }

    /// op composed after this one (this applied first on test functions).
    FactoredOperator then(const FactoredOperator& outer) const;
};

/// Diagnostics of one Bessel-potential application.
struct BesselDiagnostics {
    double imag_residue = 0.0;      // max |Im| relative to max |Re| of the output
    double leakage_fraction = 0.0;  // input energy fraction in the top frequency band
};

/**
 * Apply (1 - Laplacian)^alpha on a uniform grid via the padded DFT:
 * zero-pad each axis by pad_factor, multiply by (1 + |xi|^2)^alpha with the
 * physical angular frequencies xi_k = 2 pi k / (L h), transform back, and
 * truncate. alpha == 0 returns the field unchanged on any grid.
 *
 * Throws NonUniformGrid off trapezoid grids, and SpectralLeakage when
 * alpha > 0 while more than 1e-3 of the input energy sits within 10% of
 * the Nyquist frequency (the filtered result would be aliasing-dominated).
 */
Eigen::VectorXd bessel_potential(const Eigen::VectorXd& field_samples, double alpha,
                                 const Grid& grid, int pad_factor = 2,
                                 BesselDiagnostics* diagnostics = nullptr);

/// Pointwise product with (1 + |x_i|^2)^p.
Eigen::VectorXd weight_multiply(const Eigen::VectorXd& field_samples, double exponent,
                                const Grid& grid);

/// Forward action of the pipeline on a test function (stages left to right).
Eigen::VectorXd apply_to_test_function(const FactoredOperator& op,
                                       const Eigen::VectorXd& test_function, const Grid& grid);

}  // namespace gesp
