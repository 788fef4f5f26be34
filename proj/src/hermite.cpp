#include "gesp/hermite.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gesp/io.hpp"

namespace gesp {

double hermite_function(int n, double x) {
    const double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (n <= 0) return h0;
    double prev = h0;
    double cur = std::numbers::sqrt2 * x * h0;
    for (int k = 2; k <= n; ++k) {
        const double next = x * std::sqrt(2.0 / k) * cur - std::sqrt((k - 1.0) / k) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_function(const std::vector<int>& multi_index, const Eigen::VectorXd& x) {
    double value = 1.0;
    for (std::size_t a = 0; a < multi_index.size(); ++a)
        value *= hermite_function(multi_index[a], x[static_cast<Eigen::Index>(a)]);
    return value;
}

std::vector<std::vector<int>> enumerate_multi_indices(int dimension, int count) {
    std::vector<std::vector<int>> out;
    out.reserve(count);
    std::vector<int> idx(dimension, 0);
    for (int shell = 0; static_cast<int>(out.size()) < count; ++shell) {
        // Walk the box [0, shell]^d with axis 0 fastest, keeping the
        // members whose max-norm equals the current shell.
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            int mx = 0;
            for (int v : idx) mx = std::max(mx, v);
            if (mx == shell) {
                out.push_back(idx);
                if (static_cast<int>(out.size()) == count) return out;
            }
            int a = 0;
            while (a < dimension) {
                if (++idx[a] <= shell) break;
                idx[a] = 0;
                ++a;
            }
            if (a == dimension) break;
        }
    }
    return out;
}

Eigen::MatrixXd sample_hermite_functions(const Grid& grid, int count) {
    const Eigen::Index n = grid.node_count();
    const int P = grid.points_per_axis;
    const auto labels = enumerate_multi_indices(grid.dimension, count);

    int max_order = 0;
    for (const auto& label : labels)
        for (int v : label) max_order = std::max(max_order, v);

    // Tabulate all needed 1-d Hermite values per axis node once; the
    // recurrence is run column-by-column over orders.
    Eigen::MatrixXd axis_values(P, max_order + 1);
    for (int i = 0; i < P; ++i) {
        const double x = grid.axis_nodes[i];
        const double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
        axis_values(i, 0) = h0;
        if (max_order >= 1) axis_values(i, 1) = std::numbers::sqrt2 * x * h0;
        for (int k = 2; k <= max_order; ++k)
            axis_values(i, k) = x * std::sqrt(2.0 / k) * axis_values(i, k - 1) -
                                std::sqrt((k - 1.0) / k) * axis_values(i, k - 2);
    }

    Eigen::MatrixXd members(n, count);
    for (int j = 0; j < count; ++j) {
        const auto& label = labels[j];
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index rest = i;
            double value = 1.0;
            for (int a = 0; a < grid.dimension; ++a) {
                const Eigen::Index ia = rest % P;
                rest /= P;
                value *= axis_values(ia, label[a]);
            }
            members(i, j) = value;
        }
    }
    return members;
}

double TestFunctionBank::gram_deviation() const {
    return (gram_l2 - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff();
}

TestFunctionBank build_bank(int count, const Grid& grid) {
    if (count < 1) throw ValidationError("ValidationError", "bank size must be >= 1");
    if (grid.points_per_axis < static_cast<int>(8.0 * std::sqrt(static_cast<double>(count))))
        throw ValidationError("UnderResolved",
                              "grid too coarse for " + std::to_string(count) +
                                  " Hermite members: need P >= 8*sqrt(K), got P=" +
                                  std::to_string(grid.points_per_axis));

    TestFunctionBank bank;
    bank.count = count;
    bank.labels = enumerate_multi_indices(grid.dimension, count);
    bank.members = sample_hermite_functions(grid, count);
    bank.gram_l2 = bank.members.transpose() *
                   grid.lebesgue_weights.asDiagonal() * bank.members;

    const double deviation = bank.gram_deviation();
    if (deviation > 1e-6)
        throw NumericError("UnderResolved",
                           "Hermite bank Gram deviates from identity by " +
                               std::to_string(deviation) +
                               " (> 1e-6); enlarge the grid or reduce the bank");
    return bank;
}

std::string bank_to_csv(const TestFunctionBank& bank) {
    std::vector<std::string> columns;
    columns.reserve(bank.count);
    for (int j = 0; j < bank.count; ++j) {
        std::ostringstream name;
        name << "phi";
        for (std::size_t a = 0; a < bank.labels[j].size(); ++a)
            name << '_' << bank.labels[j][a];
        columns.push_back(name.str());
    }
    return matrix_to_csv(columns, bank.members);
}

}  // namespace gesp
