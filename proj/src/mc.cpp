#include "gesp/mc.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "gesp/errors.hpp"

namespace gesp {

namespace {

// splitmix64 finalizer; full-avalanche mixing of the counter words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t realization,
                                  std::uint64_t mode, std::uint64_t lane) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (realization * 0xd1342543de82ef95ULL));
    h = mix64(h ^ (mode * 0xaf251af3b0f025b5ULL));
    h = mix64(h ^ lane);
    return h;
}

// Uniform in (0, 1) from the top 53 bits.
inline double to_uniform(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

const char* law_name(CoefficientLaw law) {
    return law == CoefficientLaw::Gaussian ? "gaussian" : "rademacher";
}

CoefficientLaw law_from_name(const std::string& name) {
    if (name == "gaussian") return CoefficientLaw::Gaussian;
    if (name == "rademacher") return CoefficientLaw::Rademacher;
    throw ValidationError("ValidationError",
                          "unknown coefficient law '" + name +
                              "' (expected gaussian or rademacher)");
}

double coefficient_stream(std::uint64_t seed, CoefficientLaw law, std::uint64_t realization,
                          std::uint64_t mode) {
    if (law == CoefficientLaw::Rademacher)
        return (counter_hash(seed, realization, mode, 0) & 1ULL) ? 1.0 : -1.0;
    const double u1 = to_uniform(counter_hash(seed, realization, mode, 1));
    const double u2 = to_uniform(counter_hash(seed, realization, mode, 2));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_stream_seed(std::uint64_t seed, const std::string& tag) {
    std::uint64_t h = mix64(seed ^ 0x5eedba5eba11f00dULL);
    for (unsigned char c : tag) h = mix64(h ^ c);
    return h;
}

EmpiricalCovariance empirical_covariance(const Eigen::MatrixXd& evaluations) {
    const Eigen::Index R = evaluations.rows();
    const Eigen::Index K = evaluations.cols();
    if (R < 2)
        throw ValidationError("InsufficientSamples",
                              "need at least 2 realizations, got " + std::to_string(R));

    const Eigen::RowVectorXd mean = evaluations.colwise().mean();
    const Eigen::MatrixXd centered = evaluations.rowwise() - mean;

    EmpiricalCovariance out;
    out.sample_count = R;
    out.covariance = (centered.transpose() * centered) / static_cast<double>(R - 1);
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());

    // Var(s_jk) ~ (E[(X_j - m_j)^2 (X_k - m_k)^2] - s_jk^2) / R.
    out.standard_error.resize(K, K);
    for (Eigen::Index j = 0; j < K; ++j)
        for (Eigen::Index k = j; k < K; ++k) {
            const double fourth =
                centered.col(j).cwiseAbs2().cwiseProduct(centered.col(k).cwiseAbs2()).mean();
            const double var =
                (fourth - out.covariance(j, k) * out.covariance(j, k)) / static_cast<double>(R);
            const double se = std::sqrt(std::max(var, 0.0));
            out.standard_error(j, k) = se;
            out.standard_error(k, j) = se;
        }
    return out;
}

CovarianceReport compare(const EmpiricalCovariance& empirical, const Eigen::MatrixXd& analytic,
                         double z_threshold) {
    if (empirical.covariance.rows() != analytic.rows() ||
        empirical.covariance.cols() != analytic.cols())
        throw ValidationError("ShapeMismatch",
                              "empirical and analytic covariance shapes differ");

    CovarianceReport report;
    report.empirical = empirical.covariance;
    report.analytic = analytic;
    report.standard_error = empirical.standard_error;
    report.z_threshold = z_threshold;
    report.sample_count = empirical.sample_count;
    report.z_scores.resize(analytic.rows(), analytic.cols());
    for (Eigen::Index j = 0; j < analytic.rows(); ++j)
        for (Eigen::Index k = 0; k < analytic.cols(); ++k) {
            const double diff = empirical.covariance(j, k) - analytic(j, k);
            const double se = empirical.standard_error(j, k);
            if (se > 0.0)
                report.z_scores(j, k) = diff / se;
            else
                report.z_scores(j, k) =
                    diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
    report.max_abs_z = report.z_scores.cwiseAbs().maxCoeff();
    report.pass = report.max_abs_z <= z_threshold;
    return report;
}

}  // namespace gesp
