#include "gesp/kl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gesp/hermite.hpp"

namespace gesp {

CovarianceKernel CovarianceKernel::gaussian(double length_scale) {
    if (length_scale <= 0.0)
        throw ValidationError("ValidationError", "gaussian kernel needs length_scale > 0");
    CovarianceKernel k;
    k.kind = "gaussian";
    k.bound = 1.0;
    k.growth_order = 0;
    k.evaluate = [length_scale](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return std::exp(-0.5 * (x - y).squaredNorm() / (length_scale * length_scale));
    };
    return k;
}

CovarianceKernel CovarianceKernel::exponential(double length_scale) {
    if (length_scale <= 0.0)
        throw ValidationError("ValidationError", "exponential kernel needs length_scale > 0");
    CovarianceKernel k;
    k.kind = "exponential";
    k.bound = 1.0;
    k.growth_order = 0;
    k.evaluate = [length_scale](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return std::exp(-(x - y).norm() / length_scale);
    };
    return k;
}

CovarianceKernel CovarianceKernel::brownian() {
    CovarianceKernel k;
    k.kind = "brownian";
    k.bound = 1.0;
    k.growth_order = 0;
    k.evaluate = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        double value = 1.0;
        for (Eigen::Index a = 0; a < x.size(); ++a) {
            if (x[a] < 0.0 || x[a] > 1.0 || y[a] < 0.0 || y[a] > 1.0) return 0.0;
            value *= std::min(x[a], y[a]);
        }
        return value;
    };
    return k;
}

CovarianceKernel CovarianceKernel::rank1() {
    CovarianceKernel k;
    k.kind = "rank1";
    k.bound = 1.0;
    k.growth_order = 0;
    k.evaluate = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        double value = 1.0;
        for (Eigen::Index a = 0; a < x.size(); ++a)
            value *= hermite_function(0, x[a]) * hermite_function(0, y[a]);
        return value;
    };
    return k;
}

CovarianceKernel CovarianceKernel::polynomial_growth_demo() {
    CovarianceKernel k;
    k.kind = "polynomial-growth-demo";
    k.bound = 1.0;
    k.growth_order = 2;
    k.evaluate = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return (1.0 + x.squaredNorm()) * (1.0 + y.squaredNorm()) *
               std::exp(-0.5 * (x - y).squaredNorm());
    };
    return k;
}

CovarianceKernel CovarianceKernel::zero() {
    CovarianceKernel k;
    k.kind = "zero";
    k.bound = 1.0;
    k.growth_order = 0;
    k.evaluate = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
    return k;
}

CovarianceKernel CovarianceKernel::from_grid_file(const std::string& path, const Grid& grid,
                                                  double bound, int growth_order) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("ValidationError", "cannot open kernel grid file: " + path);
    const Eigen::Index n = grid.node_count();
    Eigen::MatrixXd values(n, n);
    std::string line;
    Eigen::Index row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= n)
            throw ValidationError("ShapeMismatch", "kernel grid file has more rows than nodes");
        std::istringstream fields(line);
        std::string cell;
        Eigen::Index col = 0;
        while (std::getline(fields, cell, ',')) {
            if (col >= n)
                throw ValidationError("ShapeMismatch",
                                      "kernel grid file has more columns than nodes");
            values(row, col++) = std::stod(cell);
        }
        if (col != n)
            throw ValidationError("ShapeMismatch", "kernel grid file row " +
                                                       std::to_string(row) + " has " +
                                                       std::to_string(col) + " columns, expected " +
                                                       std::to_string(n));
        ++row;
    }
    if (row != n)
        throw ValidationError("ShapeMismatch", "kernel grid file has " + std::to_string(row) +
                                                   " rows, expected " + std::to_string(n));
    CovarianceKernel k;
    k.kind = "grid-file";
    k.bound = bound;
    k.growth_order = growth_order;
    k.tabulated = 0.5 * (values + values.transpose());
    return k;
}

const std::vector<std::string>& CovarianceKernel::builtin_names() {
    static const std::vector<std::string> names = {
        "gaussian", "exponential", "brownian", "rank1", "polynomial-growth-demo", "zero"};
    return names;
}

CovarianceKernel CovarianceKernel::builtin(const std::string& name, double length_scale) {
    if (name == "gaussian") return gaussian(length_scale);
    if (name == "exponential") return exponential(length_scale);
    if (name == "brownian") return brownian();
    if (name == "rank1") return rank1();
    if (name == "polynomial-growth-demo") return polynomial_growth_demo();
    if (name == "zero") return zero();
    std::string known;
    for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("ValidationError",
                          "unknown kernel '" + name + "'; builtins: " + known);
}

Eigen::MatrixXd assemble_covariance_matrix(const CovarianceKernel& kernel, const Grid& grid) {
    const Eigen::Index n = grid.node_count();
    Eigen::MatrixXd K;
    if (kernel.tabulated.size() > 0) {
        if (kernel.tabulated.rows() != n || kernel.tabulated.cols() != n)
            throw ValidationError("ShapeMismatch", "tabulated kernel does not match the grid");
        K = kernel.tabulated;
    } else {
        K.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd xi = grid.nodes.row(i);
            for (Eigen::Index j = i; j < n; ++j) {
                const Eigen::VectorXd xj = grid.nodes.row(j);
                // Symmetric by construction: average the two evaluation orders.
                const double value =
                    0.5 * (kernel.evaluate(xi, xj) + kernel.evaluate(xj, xi));
                K(i, j) = value;
                K(j, i) = value;
            }
        }
    }

    // Growth envelope check at all node pairs; 1% slack over the declared bound.
    Eigen::VectorXd envelope(n);
    const double half_m = 0.5 * kernel.growth_order;
    for (Eigen::Index i = 0; i < n; ++i)
        envelope[i] = std::pow(1.0 + grid.nodes.row(i).squaredNorm(), half_m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double limit = 1.01 * kernel.bound * envelope[i] * envelope[j];
            if (std::abs(K(i, j)) > limit)
                throw NumericError(
                    "GrowthBoundViolated",
                    "kernel value " + std::to_string(K(i, j)) + " at node pair (" +
                        std::to_string(i) + "," + std::to_string(j) +
                        ") exceeds the declared growth envelope; declared M=" +
                        std::to_string(kernel.growth_order) + " is too small");
        }
    return K;
}

bool KLDecomposition::is_null(int n) const {
    return std::binary_search(null_modes.begin(), null_modes.end(), n);
}

KLDecomposition nystrom_eigendecompose(const Eigen::MatrixXd& kernel_matrix, const Grid& grid,
                                       const WeightedMeasure& measure, int n_modes,
                                       double eps_zero_rel) {
    const Eigen::Index n = grid.node_count();
    if (kernel_matrix.rows() != n || kernel_matrix.cols() != n)
        throw ValidationError("ShapeMismatch", "kernel matrix does not match the grid");
    if (n_modes < 1 || n_modes > n)
        throw ValidationError("TooManyModes",
                              "n_modes must be in [1, " + std::to_string(n) + "], got " +
                                  std::to_string(n_modes));
    if ((kernel_matrix - kernel_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("ValidationError", "kernel matrix is not symmetric");
    if (eps_zero_rel <= 0.0) eps_zero_rel = 1e-10;

    const Eigen::VectorXd sqrt_v = measure.effective_weights.cwiseSqrt();
    Eigen::MatrixXd B = sqrt_v.asDiagonal() * kernel_matrix * sqrt_v.asDiagonal();
    B = 0.5 * (B + B.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
    if (solver.info() != Eigen::Success)
        throw NumericError("ValidationError", "symmetric eigendecomposition failed");

    // Eigen returns ascending order; we keep the top n_modes, descending.
    const Eigen::VectorXd all_values = solver.eigenvalues();
    const double lambda_max = std::max(all_values[n - 1], 0.0);
    const double negative_floor = -1e-8 * std::max(lambda_max, 1e-300);
    if (all_values[0] < negative_floor)
        throw NumericError("NotPositiveSemiDefinite",
                           "most negative eigenvalue " + std::to_string(all_values[0]) +
                               " is below -1e-8 * lambda_max = " +
                               std::to_string(negative_floor) +
                               "; the kernel is not a covariance at this resolution");

    KLDecomposition out;
    out.measure = measure;
    out.eps_zero = eps_zero_rel * lambda_max;
    out.eigenvalues.resize(n_modes);
    out.f.resize(n, n_modes);
    out.trace_estimate =
        kernel_matrix.diagonal().cwiseProduct(measure.effective_weights).sum();

    const Eigen::VectorXd inv_sqrt_v = sqrt_v.cwiseInverse();
    for (int k = 0; k < n_modes; ++k) {
        const Eigen::Index src = n - 1 - k;
        double lambda = all_values[src];
        if (lambda < 0.0) {
            lambda = 0.0;
            ++out.clipped_negatives;
        }
        out.eigenvalues[k] = lambda;
        Eigen::VectorXd u = solver.eigenvectors().col(src);
        // Deterministic sign: first non-negligible component made positive.
        const double scale = u.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(u[i]) > 1e-12 * scale) {
                if (u[i] < 0.0) u = -u;
                break;
            }
        }
        out.f.col(k) = u.cwiseProduct(inv_sqrt_v);
    }

    out.g = measure.density.cwiseSqrt().asDiagonal() * out.f;
    for (int k = 0; k < n_modes; ++k)
        if (out.eigenvalues[k] <= out.eps_zero) out.null_modes.push_back(k);
    return out;
}

double mercer_reconstruct_error(const KLDecomposition& decomposition,
                                const Eigen::MatrixXd& kernel_matrix, const Grid& grid,
                                const WeightedMeasure& measure, int m) {
    if (m < 1 || m > decomposition.n_modes())
        throw ValidationError("TooManyModes",
                              "m must be in [1, n_modes] for the Mercer reconstruction");
    if (kernel_matrix.rows() != grid.node_count())
        throw ValidationError("ShapeMismatch", "kernel matrix does not match the grid");

    const Eigen::MatrixXd fm = decomposition.f.leftCols(m);
    const Eigen::MatrixXd reconstruction =
        fm * decomposition.eigenvalues.head(m).asDiagonal() * fm.transpose();
    const Eigen::VectorXd& v = measure.effective_weights;

    const Eigen::MatrixXd diff = kernel_matrix - reconstruction;
    const double err2 = (v.asDiagonal() * diff.cwiseAbs2() * v.asDiagonal()).sum();
    const double ref2 = (v.asDiagonal() * kernel_matrix.cwiseAbs2() * v.asDiagonal()).sum();
    if (ref2 == 0.0) return std::sqrt(err2);
    return std::sqrt(err2 / ref2);
}

}  // namespace gesp
