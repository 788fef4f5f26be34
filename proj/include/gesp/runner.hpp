#pragma once

#include <string>

#include "gesp/config.hpp"

namespace gesp {

/// CLI exit-code contract: 0 all checks pass, 2 validation failure,
/// 3 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

/// Execute one subcommand (kl, color, whiten, roundtrip, bank, verify),
/// writing its artifacts under config.output_dir. Errors are reported as
/// error.json plus a stderr line; the return value follows the exit-code
/// contract.
int run_subcommand(const std::string& subcommand, const RunConfig& config);

}  // namespace gesp
