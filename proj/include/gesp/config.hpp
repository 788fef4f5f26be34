#pragma once

#include <cstdint>
#include <string>

#include "gesp/grid.hpp"
#include "gesp/kl.hpp"
#include "gesp/mc.hpp"

namespace gesp {

/// Resolved run configuration with defaults filled in.
struct RunConfig {
    int dimension = 1;
    double halfwidth = 20.0;
    int points_per_axis = 256;
    QuadratureRule rule = QuadratureRule::GaussLegendre;

    std::string kernel_name = "gaussian";
    double kernel_length_scale = 1.0;
    std::string kernel_grid_file;       // set for kernel_name == "grid-file"
    double kernel_bound = 1.0;          // declared envelope for grid-file kernels
    int kernel_growth_order = 0;

    int regularity_order = 0;   // N
    int growth_order = 0;       // M
    bool lebesgue_override = false;

    int modes = 64;
    double zero_tol = 1e-10;    // relative eigenvalue threshold
    int bank_size = 8;
    int k_target = 8;
    int realizations = 10000;
    std::uint64_t seed = 0;
    CoefficientLaw law = CoefficientLaw::Gaussian;
    double z_threshold = 4.0;

    std::string output_dir = ".";

    Grid make_grid() const;
    CovarianceKernel make_kernel(const Grid& grid) const;
    /// Re-serialize the resolved configuration (echoed into reports so a
    /// verify run can replay a report byte-for-byte).
    std::string to_json_string() const;
};

/// Parse and validate a JSON config file; unknown kernels, out-of-range
/// values and malformed JSON raise ParseError / ValidationError.
RunConfig parse_config(const std::string& path);

/// Parse from an in-memory JSON document (used by parse_config and verify).
RunConfig parse_config_text(const std::string& text);

}  // namespace gesp
