#pragma once

#include <Eigen/Dense>
#include <string>

#include "gesp/errors.hpp"

namespace gesp {

enum class QuadratureRule { GaussLegendre, Trapezoid };

const char* rule_name(QuadratureRule rule);
QuadratureRule rule_from_name(const std::string& name);

/**
 * Truncated tensor-product quadrature grid on [-R, R]^d.
 *
 * Nodes are stored node-major (row i = coordinates of node i) with axis 0
 * fastest in the flattened ordering, so node i decomposes as
 * i = i0 + P*(i1 + P*i2). Immutable after construction.
 */
struct Grid {
    int dimension = 1;
    double halfwidth = 0.0;
    int points_per_axis = 0;
    QuadratureRule rule = QuadratureRule::GaussLegendre;

    Eigen::VectorXd axis_nodes;     // per-axis nodes, size P
    Eigen::VectorXd axis_weights;   // per-axis weights, size P
    Eigen::MatrixXd nodes;          // node_count() x d
    Eigen::VectorXd lebesgue_weights;  // node_count()

    Eigen::Index node_count() const { return nodes.rows(); }

    /// Uniform spacing of a trapezoid grid; throws NonUniformGrid otherwise.
    double spacing() const;

    bool is_uniform() const { return rule == QuadratureRule::Trapezoid; }
};

/// Build a tensor grid. Gauss-Legendre weights come from per-axis rules on
/// [-R, R]; trapezoid weights are uniform with halved endpoints.
Grid build_grid(int dimension, double halfwidth, int points_per_axis, QuadratureRule rule);

/**
 * The finite weight measure used to tame polynomially bounded kernels:
 * density m(x) = (1 + |x|^2)^-(M + (d+1)/2) against Lebesgue measure.
 * `lebesgue_override` replaces the density by 1 (compactly supported
 * kernels decompose against plain quadrature that way).
 */
struct WeightedMeasure {
    int growth_order = 0;  // M
    int dimension = 1;
    bool lebesgue_override = false;

    Eigen::VectorXd density;            // m_i at grid nodes
    Eigen::VectorXd effective_weights;  // v_i = w_i * m_i

    double total_mass() const { return effective_weights.sum(); }
};

/// Density of the weight measure at a point, (1+|x|^2)^-(M+(d+1)/2).
double mu_density(const Eigen::VectorXd& x, int growth_order, int dimension);

WeightedMeasure make_measure(const Grid& grid, int growth_order);
WeightedMeasure make_lebesgue_measure(const Grid& grid);

/// Discrete inner product sum_i f(x_i) g(x_i) v_i approximating (f,g) in
/// L^2(mu). Sample vectors must conform to the grid.
double weighted_inner(const Eigen::VectorXd& f_samples, const Eigen::VectorXd& g_samples,
                      const Grid& grid, const WeightedMeasure& measure);

/// Plain discrete L^2 inner product with Lebesgue weights.
double lebesgue_inner(const Eigen::VectorXd& f_samples, const Eigen::VectorXd& g_samples,
                      const Grid& grid);

/// CSV with columns: index, coordinates, lebesgue_weight, mu_density.
std::string grid_to_csv(const Grid& grid, const WeightedMeasure& measure);

}  // namespace gesp
