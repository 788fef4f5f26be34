#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace gesp {

enum class CoefficientLaw { Gaussian, Rademacher };

const char* law_name(CoefficientLaw law);
CoefficientLaw law_from_name(const std::string& name);

/**
 * Deterministic counter-based draw for (realization r, mode n): zero mean,
 * unit variance, bit-reproducible, and parallelizable because no generator
 * state is shared. Gaussian draws use Box-Muller on two hashed uniforms.
 */
double coefficient_stream(std::uint64_t seed, CoefficientLaw law, std::uint64_t realization,
                          std::uint64_t mode);

/// Domain-separated sub-seed, e.g. derive_stream_seed(seed, "fill") for the
/// independent null-mode coefficients of a white-noise model.
std::uint64_t derive_stream_seed(std::uint64_t seed, const std::string& tag);

/// Unbiased sample covariance plus elementwise standard errors estimated
/// from sample fourth moments.
struct EmpiricalCovariance {
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd standard_error;
    Eigen::Index sample_count = 0;
};

EmpiricalCovariance empirical_covariance(const Eigen::MatrixXd& evaluations);

/// Elementwise z-score comparison of an empirical covariance against an
/// analytic one; passes when max |z| stays below the threshold.
struct CovarianceReport {
    Eigen::MatrixXd empirical;
    Eigen::MatrixXd analytic;
    Eigen::MatrixXd standard_error;
    Eigen::MatrixXd z_scores;
    double max_abs_z = 0.0;
    double z_threshold = 4.0;
    bool pass = false;
    Eigen::Index sample_count = 0;
};

CovarianceReport compare(const EmpiricalCovariance& empirical, const Eigen::MatrixXd& analytic,
                         double z_threshold = 4.0);

}  // namespace gesp
