#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gesp/grid.hpp"

namespace gesp {

/// L^2(R)-orthonormal Hermite function h_n(x), evaluated by the normalized
/// three-term recurrence h_n = x*sqrt(2/n)*h_{n-1} - sqrt((n-1)/n)*h_{n-2}
/// seeded with h_0 = pi^(-1/4) exp(-x^2/2). Underflows to 0 far in the tail.
double hermite_function(int n, double x);

/// Tensor Hermite function indexed by a multi-index, one factor per axis.
double hermite_function(const std::vector<int>& multi_index, const Eigen::VectorXd& x);

/**
 * Deterministic bijection between natural numbers and d-dimensional
 * multi-indices: indices are enumerated by growing max-norm shells,
 * axis 0 fastest inside each shell. For d=1 this is the identity; for
 * d=2 the first entries are (0,0), (1,0), (0,1), (1,1), (2,0), ...
 */
std::vector<std::vector<int>> enumerate_multi_indices(int dimension, int count);

/// Samples of the first `count` tensor Hermite functions on a grid,
/// one column per member (node-major).
Eigen::MatrixXd sample_hermite_functions(const Grid& grid, int count);

/**
 * Orthonormal Hermite test-function bank on a grid. Doubles as the default
 * Schwartz-class test set and as the whitening target basis. The attached
 * Gram matrix holds the discrete L^2 inner products of the members.
 */
struct TestFunctionBank {
    int count = 0;
    Eigen::MatrixXd members;                   // node_count x count
    std::vector<std::vector<int>> labels;      // multi-index per member
    Eigen::MatrixXd gram_l2;                   // count x count

    const Eigen::VectorXd member(int j) const { return members.col(j); }
    double gram_deviation() const;
};

/// Build the bank and verify discrete orthonormality; throws UnderResolved
/// when the Gram matrix deviates from identity by more than 1e-6.
TestFunctionBank build_bank(int count, const Grid& grid);

/// Node-major CSV of the bank members.
std::string bank_to_csv(const TestFunctionBank& bank);

}  // namespace gesp
