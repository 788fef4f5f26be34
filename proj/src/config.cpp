#include "gesp/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

#include "gesp/io.hpp"

namespace gesp {

using nlohmann::json;

namespace {

const json& require_object(const json& j, const char* what) {
    if (!j.is_object())
        throw ValidationError("ParseError", std::string(what) + " must be a JSON object");
    return j;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("ParseError",
                              std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace

Grid RunConfig::make_grid() const {
    return build_grid(dimension, halfwidth, points_per_axis, rule);
}

CovarianceKernel RunConfig::make_kernel(const Grid& grid) const {
    if (kernel_name == "grid-file")
        return CovarianceKernel::from_grid_file(kernel_grid_file, grid, kernel_bound,
                                                kernel_growth_order);
    return CovarianceKernel::builtin(kernel_name, kernel_length_scale);
}

std::string RunConfig::to_json_string() const {
    json j;
    j["dimension"] = dimension;
    j["domain"] = {{"halfwidth", halfwidth},
                   {"points_per_axis", points_per_axis},
                   {"rule", rule_name(rule)}};
    json k;
    k["name"] = kernel_name;
    if (kernel_name == "grid-file") {
        k["path"] = kernel_grid_file;
        k["bound"] = kernel_bound;
        k["growth_order"] = kernel_growth_order;
    } else if (kernel_name == "gaussian" || kernel_name == "exponential") {
        k["length_scale"] = kernel_length_scale;
    }
    j["kernel"] = k;
    j["N"] = regularity_order;
    j["M"] = growth_order;
    j["lebesgue_override"] = lebesgue_override;
    j["modes"] = modes;
    j["zero_tol"] = zero_tol;
    j["bank_size"] = bank_size;
    j["k_target"] = k_target;
    j["realizations"] = realizations;
    j["seed"] = seed;
    j["coefficient_law"] = law_name(law);
    j["z_threshold"] = z_threshold;
    return j.dump(2);
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("ParseError", e.what());
    }
    require_object(j, "config");

    RunConfig config;
    config.dimension = get_or(j, "dimension", 1);
    if (j.contains("domain")) {
        const json& dom = require_object(j.at("domain"), "domain");
        config.halfwidth = get_or(dom, "halfwidth", config.halfwidth);
        config.points_per_axis = get_or(dom, "points_per_axis", config.points_per_axis);
        config.rule = rule_from_name(get_or<std::string>(dom, "rule", "gauss-legendre"));
    }

    if (j.contains("kernel")) {
        if (j.at("kernel").is_string()) {
            config.kernel_name = j.at("kernel").get<std::string>();
        } else {
            const json& k = require_object(j.at("kernel"), "kernel");
            config.kernel_name = get_or<std::string>(k, "name", "gaussian");
            config.kernel_length_scale = get_or(k, "length_scale", 1.0);
            config.kernel_grid_file = get_or<std::string>(k, "path", "");
            config.kernel_bound = get_or(k, "bound", 1.0);
            config.kernel_growth_order = get_or(k, "growth_order", 0);
        }
    }
    config.regularity_order = get_or(j, "N", 0);
    config.growth_order = get_or(j, "M", 0);
    config.lebesgue_override = get_or(j, "lebesgue_override", false);
    config.modes = get_or(j, "modes", 64);
    config.zero_tol = get_or(j, "zero_tol", 1e-10);
    config.bank_size = get_or(j, "bank_size", 8);
    config.k_target = get_or(j, "k_target", 8);
    config.realizations = get_or(j, "realizations", 10000);
    config.seed = get_or<std::uint64_t>(j, "seed", 0);
    config.law = law_from_name(get_or<std::string>(j, "coefficient_law", "gaussian"));
    config.z_threshold = get_or(j, "z_threshold", 4.0);
    config.output_dir = get_or<std::string>(j, "output_dir", ".");

    // Surface module preconditions as validation errors up front.
    if (config.dimension < 1 || config.dimension > 3)
        throw ValidationError("DimensionUnsupported", "dimension must be 1, 2 or 3");
    if (config.halfwidth <= 0.0 || config.points_per_axis < 2)
        throw ValidationError("DegenerateGrid",
                              "domain needs halfwidth > 0 and points_per_axis >= 2");
    double node_count = std::pow(static_cast<double>(config.points_per_axis), config.dimension);
    if (config.modes < 1 || static_cast<double>(config.modes) > node_count)
        throw ValidationError("TooManyModes",
                              "modes must be in [1, P^d] = [1, " +
                                  std::to_string(static_cast<long long>(node_count)) + "]");
    if (config.kernel_name != "grid-file") {
        bool known = false;
        for (const auto& name : CovarianceKernel::builtin_names())
            known = known || name == config.kernel_name;
        if (!known) {
            std::string names = "grid-file";
            for (const auto& name : CovarianceKernel::builtin_names()) names += ", " + name;
            throw ValidationError("ValidationError",
                                  "unknown kernel '" + config.kernel_name +
                                      "'; known kernels: " + names);
        }
    } else if (config.kernel_grid_file.empty()) {
        throw ValidationError("ValidationError", "grid-file kernel requires a 'path'");
    }
    if (config.regularity_order < 0 || config.growth_order < 0)
        throw ValidationError("ValidationError", "N and M must be non-negative");
    if (config.zero_tol <= 0.0)
        throw ValidationError("ValidationError", "zero_tol must be positive");
    if (config.bank_size < 1 || config.k_target < 1)
        throw ValidationError("ValidationError", "bank_size and k_target must be >= 1");
    if (config.realizations < 2)
        throw ValidationError("InsufficientSamples", "realizations must be >= 2");
    if (config.z_threshold <= 0.0)
        throw ValidationError("ValidationError", "z_threshold must be positive");
    return config;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("ParseError", "cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

}  // namespace gesp
