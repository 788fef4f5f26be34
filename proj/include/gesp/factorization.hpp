#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gesp/gsp.hpp"
#include "gesp/kl.hpp"

namespace gesp {

/// Where a white-noise coefficient stream comes from: reuse of a data mode
/// of the decomposed process, or an independent fill draw for a null mode.
struct ModeSource {
    bool from_data = false;
    std::uint64_t stream_index = 0;
};

/**
 * White noise spanned by an L^2-orthonormal basis: W(phi) = sum_n c_n
 * <phi, g_n>. Data-driven modes reuse the decomposed process's unit-variance
 * coefficients; null modes are filled with independent unit-variance draws
 * from a domain-separated stream.
 */
struct WhiteNoiseModel {
    Eigen::MatrixXd basis;  // node_count x modes, discretely L^2-orthonormal
    std::vector<ModeSource> sources;
    std::uint64_t seed = 0;
    CoefficientLaw law = CoefficientLaw::Gaussian;

    /// Analytic covariance on a bank: the L^2 Gram restricted to span(g_n).
    Eigen::MatrixXd analytic_covariance(const Eigen::MatrixXd& bank, const Grid& grid) const;

    /// Draw R realizations observed through the bank.
    RealizationBatch realize(const Eigen::MatrixXd& bank, const Grid& grid,
                             int realization_count) const;
};

/// Validates discrete orthonormality of the basis (<= 1e-8, else
/// BasisNotOrthonormal) and wires the coefficient sources.
WhiteNoiseModel build_white_noise(const Eigen::MatrixXd& basis, const Grid& grid,
                                  const std::vector<ModeSource>& sources, std::uint64_t seed,
                                  CoefficientLaw law);

/// Orthonormal basis h_n = sqrt(lambda_n) g_n of the reproducing-kernel
/// space carried by the positive modes, with the relabeling bijection onto
/// Hermite indices.
struct RkhsBasis {
    Eigen::MatrixXd h;                // node_count x positive_count
    Eigen::VectorXd lambdas;          // positive eigenvalues, descending
    std::vector<int> mode_index;      // original decomposition mode per column
    std::vector<int> gamma;           // column k -> Hermite index gamma[k]
};

/// Result of the coloring factorization Z = L W.
struct ColorFactorization {
    FactoredOperator coloring_operator;  // L
    WhiteNoiseModel white_noise;         // W
    GespExpansion process;               // Z, components T_n = (1-Lap)^(N/2) f_n
    KLDecomposition decomposition;
};

/**
 * Coloring: decompose the kernel over the weight measure of order M, build
 * the white noise from the decomposition's unit-variance coefficients (null
 * modes filled independently), and assemble the operator
 * L = (1-Lap)^(N/2) o (1+|x|^2)^p o SpectralDiagonal(sqrt(lambda_n), g_n)
 * with p = M/2 + (d+1)/4, so that Z = L W. The regularity order N and the
 * growth order M are caller inputs; the kernel's declared growth must not
 * exceed M. With `lebesgue_override` the decomposition runs against plain
 * quadrature weights and the weight stage drops out.
 */
ColorFactorization color_factorize(const CovarianceKernel& kernel, int regularity_order,
                                   int growth_order, const Grid& grid, int n_modes,
                                   std::uint64_t seed,
                                   CoefficientLaw law = CoefficientLaw::Gaussian,
                                   double eps_zero_rel = -1.0, bool lebesgue_override = false);

/// Result of the whitening factorization Lw Z = W'.
struct WhitenFactorization {
    FactoredOperator whitening_operator;  // Lw
    GespExpansion whitened;               // W' = sum_k (Y_k / sqrt(lambda_k)) herm_{gamma(k)}
    RkhsBasis rkhs;
};

/**
 * Whitening: requires at least k_target modes of positive variance (the
 * finite-resolution stand-in for an infinite family; otherwise FiniteRank).
 * Relabels the k-th positive mode onto Hermite index k and inverts the
 * weight and Bessel stages:
 * Lw = Relabel(gamma) o (1+|x|^2)^-p o (1-Lap)^(-N/2).
 */
WhitenFactorization whiten_factorize(const ColorFactorization& factorization, int k_target);

/// Joint exercise of both factorizations plus Monte-Carlo verification.
struct RoundtripReport {
    double coloring_error = 0.0;         // max |operator route - Mercer route| on the bank
    double whitening_gram_error = 0.0;   // max |Gram(W') - I| on the Hermite targets
    double mc_color_max_z = 0.0;
    double mc_whiten_max_z = 0.0;
    double mc_law_agreement_max_z = 0.0;
    int modes = 0;
    int rank = 0;      // positive modes
    int n0_size = 0;
    int bank_size = 0;
    int realizations = 0;
    std::uint64_t seed = 0;
    double z_threshold = 4.0;
    bool pass = false;
};

RoundtripReport roundtrip_check(const CovarianceKernel& kernel, int regularity_order,
                                int growth_order, const Grid& grid, int n_modes, int k_target,
                                std::uint64_t seed, int realization_count, int bank_size = 8,
                                CoefficientLaw law = CoefficientLaw::Gaussian,
                                double z_threshold = 4.0, double eps_zero_rel = -1.0,
                                bool lebesgue_override = false);

/// Quadrature projection of observed field samples onto the decomposition:
/// Y_n = sum_i field(x_i) f_n(x_i) v_i.
Eigen::VectorXd project_field(const KLDecomposition& decomposition, const Grid& grid,
                              const Eigen::VectorXd& field_samples);

}  // namespace gesp
