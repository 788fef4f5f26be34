#include "gesp/operators.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace gesp {

namespace {

// FFTW plan creation is not thread-safe; execution on private buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    fftw_complex* data = nullptr;
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

struct FftwPlan {
    fftw_plan plan = nullptr;
    FftwPlan(int rank, const int* dims, fftw_complex* in, fftw_complex* out, int sign) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft(rank, dims, in, out, sign, FFTW_ESTIMATE);
        if (!plan) throw std::runtime_error("FFTW plan creation failed");
    }
    ~FftwPlan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    void execute() const { fftw_execute(plan); }
};

// Signed integer frequency of DFT bin j on a length-L axis.
inline int signed_bin(Eigen::Index j, Eigen::Index L) {
    return static_cast<int>(j <= L / 2 ? j : j - L);
}

void check_basis(const Eigen::MatrixXd& basis, const Grid& grid, const char* stage) {
    if (basis.size() == 0)
        throw ValidationError("BasisMissing",
                              std::string(stage) + " stage has no attached basis");
    if (basis.rows() != grid.node_count())
        throw ValidationError("ShapeMismatch",
                              std::string(stage) + " basis rows do not match the grid");
}

}  // namespace

FactoredOperator FactoredOperator::then(const FactoredOperator& outer) const {
    FactoredOperator composed;
    composed.stages = outer.stages;
    composed.stages.insert(composed.stages.end(), stages.begin(), stages.end());
    return composed;
}

Eigen::VectorXd bessel_potential(const Eigen::VectorXd& field_samples, double alpha,
                                 const Grid& grid, int pad_factor,
                                 BesselDiagnostics* diagnostics) {
    if (field_samples.size() != grid.node_count())
        throw ValidationError("ShapeMismatch", "field does not conform to the grid");
    if (alpha == 0.0) {
        if (diagnostics) *diagnostics = BesselDiagnostics{};
        return field_samples;
    }
    if (pad_factor < 1) throw ValidationError("ValidationError", "pad_factor must be >= 1");

    const double h = grid.spacing();  // throws NonUniformGrid on gauss-legendre grids
    const int d = grid.dimension;
    const int P = grid.points_per_axis;
    const Eigen::Index L = static_cast<Eigen::Index>(pad_factor) * P;

    Eigen::Index total = 1;
    for (int a = 0; a < d; ++a) total *= L;

    FftwBuffer buf(static_cast<std::size_t>(total));
    FftwBuffer spec(static_cast<std::size_t>(total));
    for (Eigen::Index j = 0; j < total; ++j) buf.data[j][0] = buf.data[j][1] = 0.0;
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
        Eigen::Index rest = i, j = 0, stride = 1;
        for (int a = 0; a < d; ++a) {
            j += (rest % P) * stride;
            rest /= P;
            stride *= L;
        }
        buf.data[j][0] = field_samples[i];
    }

    int dims[3] = {static_cast<int>(L), static_cast<int>(L), static_cast<int>(L)};
    FftwPlan forward(d, dims, buf.data, spec.data, FFTW_FORWARD);
    forward.execute();

    // Angular frequency per bin: xi_k = 2 pi k / (L h); Nyquist pi / h.
    const double fundamental = 2.0 * std::numbers::pi / (static_cast<double>(L) * h);
    const double nyquist = std::numbers::pi / h;

    double energy_total = 0.0, energy_top = 0.0;
    for (Eigen::Index j = 0; j < total; ++j) {
        Eigen::Index rest = j;
        double xi2 = 0.0, xi_max = 0.0;
        for (int a = 0; a < d; ++a) {
            const double xi = fundamental * signed_bin(rest % L, L);
            rest /= L;
            xi2 += xi * xi;
            xi_max = std::max(xi_max, std::abs(xi));
        }
        const double e = spec.data[j][0] * spec.data[j][0] + spec.data[j][1] * spec.data[j][1];
        energy_total += e;
        if (xi_max >= 0.9 * nyquist) energy_top += e;

        const double multiplier = std::pow(1.0 + xi2, alpha);
        spec.data[j][0] *= multiplier;
        spec.data[j][1] *= multiplier;
    }

    const double leakage = energy_total > 0.0 ? energy_top / energy_total : 0.0;
    if (alpha > 0.0 && leakage > 1e-3)
        throw NumericError("SpectralLeakage",
                           "field has " + std::to_string(leakage) +
                               " of its spectral energy near the Nyquist frequency; "
                               "(1-Laplacian)^alpha with alpha > 0 would amplify aliasing");

    FftwPlan backward(d, dims, spec.data, buf.data, FFTW_BACKWARD);
    backward.execute();

    Eigen::VectorXd out(grid.node_count());
    double max_re = 0.0, max_im = 0.0;
    const double norm = 1.0 / static_cast<double>(total);
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
        Eigen::Index rest = i, j = 0, stride = 1;
        for (int a = 0; a < d; ++a) {
            j += (rest % P) * stride;
            rest /= P;
            stride *= L;
        }
        out[i] = buf.data[j][0] * norm;
        max_re = std::max(max_re, std::abs(buf.data[j][0]) * norm);
        max_im = std::max(max_im, std::abs(buf.data[j][1]) * norm);
    }

    if (diagnostics) {
        diagnostics->imag_residue = max_re > 0.0 ? max_im / max_re : max_im;
        diagnostics->leakage_fraction = leakage;
    }
    return out;
}

Eigen::VectorXd weight_multiply(const Eigen::VectorXd& field_samples, double exponent,
                                const Grid& grid) {
    if (field_samples.size() != grid.node_count())
        throw ValidationError("ShapeMismatch", "field does not conform to the grid");
    Eigen::VectorXd out(field_samples.size());
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] = field_samples[i] * std::pow(1.0 + grid.nodes.row(i).squaredNorm(), exponent);
    return out;
}

Eigen::VectorXd apply_to_test_function(const FactoredOperator& op,
                                       const Eigen::VectorXd& test_function, const Grid& grid) {
    Eigen::VectorXd current = test_function;
    for (const auto& stage : op.stages) {
        if (const auto* bessel = std::get_if<BesselPotentialStage>(&stage)) {
            current = bessel_potential(current, bessel->alpha, grid, bessel->pad_factor);
        } else if (const auto* weight = std::get_if<WeightMultiplyStage>(&stage)) {
            current = weight_multiply(current, weight->exponent, grid);
        } else if (const auto* spectral = std::get_if<SpectralDiagonalStage>(&stage)) {
            check_basis(spectral->basis, grid, "SpectralDiagonal");
            if (spectral->values.size() != spectral->basis.cols())
                throw ValidationError("ShapeMismatch",
                                      "SpectralDiagonal values do not match its basis");
            Eigen::VectorXd coef = spectral->basis.transpose() *
                                   grid.lebesgue_weights.cwiseProduct(current);
            current = spectral->basis * spectral->values.cwiseProduct(coef);
        } else {
            const auto& relabel = std::get<CoefficientRelabelStage>(stage);
            check_basis(relabel.source, grid, "CoefficientRelabel");
            check_basis(relabel.target, grid, "CoefficientRelabel");
            if (static_cast<Eigen::Index>(relabel.gamma.size()) != relabel.source.cols())
                throw ValidationError("ShapeMismatch",
                                      "CoefficientRelabel gamma does not match its source basis");
            const Eigen::VectorXd weighted = grid.lebesgue_weights.cwiseProduct(current);
            Eigen::VectorXd next = Eigen::VectorXd::Zero(current.size());
            for (std::size_t n = 0; n < relabel.gamma.size(); ++n) {
                const int t = relabel.gamma[n];
                if (t < 0 || t >= relabel.target.cols())
                    throw ValidationError("ValidationError",
                                          "CoefficientRelabel gamma maps outside the target basis");
                next += relabel.target.col(t).dot(weighted) *
                        relabel.source.col(static_cast<Eigen::Index>(n));
            }
            current = next;
        }
    }
    return current;
}

}  // namespace gesp
