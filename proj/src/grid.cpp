#include "gesp/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gesp/io.hpp"

namespace gesp {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
// Initial guesses from the Chebyshev-like asymptotic; converges in a
// handful of steps for the orders used here (up to a few thousand).
void gauss_legendre_unit(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    nodes.resize(n);
    weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // One clean-up evaluation at the converged abscissa.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

}  // namespace

const char* rule_name(QuadratureRule rule) {
    return rule == QuadratureRule::GaussLegendre ? "gauss-legendre" : "trapezoid";
}

QuadratureRule rule_from_name(const std::string& name) {
    if (name == "gauss-legendre") return QuadratureRule::GaussLegendre;
    if (name == "trapezoid") return QuadratureRule::Trapezoid;
    throw ValidationError("ValidationError",
                          "unknown quadrature rule '" + name +
                              "' (expected gauss-legendre or trapezoid)");
}

double Grid::spacing() const {
    if (rule != QuadratureRule::Trapezoid)
        throw ValidationError("NonUniformGrid",
                              "operation requires a uniform (trapezoid) grid, got gauss-legendre");
    return 2.0 * halfwidth / (points_per_axis - 1);
}

Grid build_grid(int dimension, double halfwidth, int points_per_axis, QuadratureRule rule) {
    if (dimension < 1 || dimension > 3)
        throw ValidationError("DimensionUnsupported",
                              "dimension must be 1, 2 or 3, got " + std::to_string(dimension));
    if (points_per_axis < 2 || halfwidth <= 0.0)
        throw ValidationError("DegenerateGrid",
                              "need points_per_axis >= 2 and halfwidth > 0, got P=" +
                                  std::to_string(points_per_axis) +
                                  " R=" + std::to_string(halfwidth));
    // P in {2,3} is only meaningful for toy trapezoid grids.
    if (points_per_axis < 4 && rule == QuadratureRule::GaussLegendre)
        throw ValidationError("DegenerateGrid", "gauss-legendre grids require P >= 4");

    Grid grid;
    grid.dimension = dimension;
    grid.halfwidth = halfwidth;
    grid.points_per_axis = points_per_axis;
    grid.rule = rule;

    const int P = points_per_axis;
    if (rule == QuadratureRule::GaussLegendre) {
        gauss_legendre_unit(P, grid.axis_nodes, grid.axis_weights);
        grid.axis_nodes *= halfwidth;
        grid.axis_weights *= halfwidth;
    } else {
        const double h = 2.0 * halfwidth / (P - 1);
        grid.axis_nodes = Eigen::VectorXd::LinSpaced(P, -halfwidth, halfwidth);
        grid.axis_weights = Eigen::VectorXd::Constant(P, h);
        grid.axis_weights[0] = h / 2.0;
        grid.axis_weights[P - 1] = h / 2.0;
    }

    Eigen::Index count = 1;
    for (int a = 0; a < dimension; ++a) count *= P;
    grid.nodes.resize(count, dimension);
    grid.lebesgue_weights.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        Eigen::Index rest = i;
        double w = 1.0;
        for (int a = 0; a < dimension; ++a) {
            const Eigen::Index ia = rest % P;
            rest /= P;
            grid.nodes(i, a) = grid.axis_nodes[ia];
            w *= grid.axis_weights[ia];
        }
        grid.lebesgue_weights[i] = w;
    }
    return grid;
}

double mu_density(const Eigen::VectorXd& x, int growth_order, int dimension) {
    const double exponent = growth_order + 0.5 * (dimension + 1);
    return std::pow(1.0 + x.squaredNorm(), -exponent);
}

WeightedMeasure make_measure(const Grid& grid, int growth_order) {
    if (growth_order < 0)
        throw ValidationError("ValidationError", "growth order M must be non-negative");
    WeightedMeasure mu;
    mu.growth_order = growth_order;
    mu.dimension = grid.dimension;
    mu.lebesgue_override = false;
    const Eigen::Index n = grid.node_count();
    mu.density.resize(n);
    const double exponent = growth_order + 0.5 * (grid.dimension + 1);
    for (Eigen::Index i = 0; i < n; ++i)
        mu.density[i] = std::pow(1.0 + grid.nodes.row(i).squaredNorm(), -exponent);
    mu.effective_weights = grid.lebesgue_weights.cwiseProduct(mu.density);
    return mu;
}

WeightedMeasure make_lebesgue_measure(const Grid& grid) {
    WeightedMeasure mu;
    mu.growth_order = 0;
    mu.dimension = grid.dimension;
    mu.lebesgue_override = true;
    mu.density = Eigen::VectorXd::Ones(grid.node_count());
    mu.effective_weights = grid.lebesgue_weights;
    return mu;
}

namespace {

void check_conforms(const Eigen::VectorXd& samples, const Grid& grid, const char* what) {
    if (samples.size() != grid.node_count())
        throw ValidationError("ShapeMismatch",
                              std::string(what) + " has " + std::to_string(samples.size()) +
                                  " samples, grid has " + std::to_string(grid.node_count()) +
                                  " nodes");
}

}  // namespace

double weighted_inner(const Eigen::VectorXd& f_samples, const Eigen::VectorXd& g_samples,
                      const Grid& grid, const WeightedMeasure& measure) {
    check_conforms(f_samples, grid, "f");
    check_conforms(g_samples, grid, "g");
    return (f_samples.cwiseProduct(g_samples).cwiseProduct(measure.effective_weights)).sum();
}

double lebesgue_inner(const Eigen::VectorXd& f_samples, const Eigen::VectorXd& g_samples,
                      const Grid& grid) {
    check_conforms(f_samples, grid, "f");
    check_conforms(g_samples, grid, "g");
    return (f_samples.cwiseProduct(g_samples).cwiseProduct(grid.lebesgue_weights)).sum();
}

std::string grid_to_csv(const Grid& grid, const WeightedMeasure& measure) {
    std::vector<std::string> columns = {"index"};
    for (int a = 0; a < grid.dimension; ++a) columns.push_back("x" + std::to_string(a));
    columns.push_back("lebesgue_weight");
    columns.push_back("mu_density");

    Eigen::MatrixXd table(grid.node_count(), grid.dimension + 3);
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
        table(i, 0) = static_cast<double>(i);
        for (int a = 0; a < grid.dimension; ++a) table(i, 1 + a) = grid.nodes(i, a);
        table(i, grid.dimension + 1) = grid.lebesgue_weights[i];
        table(i, grid.dimension + 2) = measure.density[i];
    }
    return matrix_to_csv(columns, table);
}

}  // namespace gesp
