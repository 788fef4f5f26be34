#include "gesp/runner.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>

#include "gesp/factorization.hpp"
#include "gesp/io.hpp"

namespace gesp {

using nlohmann::json;

namespace {

std::string artifact_path(const RunConfig& config, const std::string& name) {
    return (std::filesystem::path(config.output_dir) / name).string();
}

json stage_record(const OperatorStage& stage) {
    json rec;
    if (const auto* bessel = std::get_if<BesselPotentialStage>(&stage)) {
        rec["stage"] = "bessel_potential";
        rec["alpha"] = bessel->alpha;
        rec["pad_factor"] = bessel->pad_factor;
    } else if (const auto* weight = std::get_if<WeightMultiplyStage>(&stage)) {
        rec["stage"] = "weight_multiply";
        rec["exponent"] = weight->exponent;
    } else if (const auto* spectral = std::get_if<SpectralDiagonalStage>(&stage)) {
        rec["stage"] = "spectral_diagonal";
        rec["modes"] = spectral->values.size();
        rec["sigma_max"] = spectral->values.size() ? spectral->values.maxCoeff() : 0.0;
    } else {
        const auto& relabel = std::get<CoefficientRelabelStage>(stage);
        rec["stage"] = "coefficient_relabel";
        rec["count"] = relabel.gamma.size();
        rec["gamma"] = relabel.gamma;
    }
    return rec;
}

json operator_record(const FactoredOperator& op) {
    json stages = json::array();
    for (const auto& stage : op.stages) stages.push_back(stage_record(stage));
    return stages;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void run_kl(const RunConfig& config) {
    const Grid grid = config.make_grid();
    const CovarianceKernel kernel = config.make_kernel(grid);
    const WeightedMeasure measure = config.lebesgue_override
                                        ? make_lebesgue_measure(grid)
                                        : make_measure(grid, config.growth_order);
    const Eigen::MatrixXd K = assemble_covariance_matrix(kernel, grid);
    const KLDecomposition decomp =
        nystrom_eigendecompose(K, grid, measure, config.modes, config.zero_tol);

    Eigen::MatrixXd eig_table(decomp.n_modes(), 2);
    for (int n = 0; n < decomp.n_modes(); ++n) {
        eig_table(n, 0) = n;
        eig_table(n, 1) = decomp.eigenvalues[n];
    }
    write_text_file(artifact_path(config, "eigs.csv"), matrix_to_csv({"n", "lambda"}, eig_table));

    std::vector<std::string> columns;
    for (int n = 0; n < decomp.n_modes(); ++n) columns.push_back("f" + std::to_string(n));
    write_text_file(artifact_path(config, "modes.csv"), matrix_to_csv(columns, decomp.f));

    const bool full = decomp.n_modes() == grid.node_count();
    const double sum = decomp.eigenvalues.sum();
    const double gap_rel = decomp.trace_estimate != 0.0
                               ? (decomp.trace_estimate - sum) / decomp.trace_estimate
                               : decomp.trace_estimate - sum;
    const bool trace_pass = full ? std::abs(gap_rel) <= 1e-8 : gap_rel >= -1e-8;

    json report;
    report["n_modes"] = decomp.n_modes();
    report["node_count"] = grid.node_count();
    report["eps_zero"] = decomp.eps_zero;
    report["n0_size"] = decomp.null_modes.size();
    report["clipped_negatives"] = decomp.clipped_negatives;
    report["trace_estimate"] = decomp.trace_estimate;
    report["eigenvalue_sum"] = sum;
    report["trace_gap_rel"] = gap_rel;
    report["trace_check"] = {{"mode", full ? "full" : "partial"}, {"pass", trace_pass}};
    write_text_file(artifact_path(config, "kl_report.json"), dump(report));
    if (!trace_pass) throw NumericError("NumericCheckFailed", "trace check failed");
}

double coloring_check_error(const ColorFactorization& color, const TestFunctionBank& bank,
                            const Grid& grid) {
    Eigen::MatrixXd colored(grid.node_count(), bank.count);
    for (int j = 0; j < bank.count; ++j)
        colored.col(j) =
            apply_to_test_function(color.coloring_operator, bank.members.col(j), grid);
    const Eigen::MatrixXd operator_route = color.white_noise.analytic_covariance(colored, grid);
    const Eigen::MatrixXd mercer_route = covariance_matrix(color.process, bank.members);
    return (operator_route - mercer_route).cwiseAbs().maxCoeff();
}

void run_color(const RunConfig& config) {
    const Grid grid = config.make_grid();
    const CovarianceKernel kernel = config.make_kernel(grid);
    const ColorFactorization color = color_factorize(
        kernel, config.regularity_order, config.growth_order, grid, config.modes, config.seed,
        config.law, config.zero_tol, config.lebesgue_override);

    write_text_file(artifact_path(config, "operator.json"),
                    dump(operator_record(color.coloring_operator)));

    json wn;
    wn["seed"] = color.white_noise.seed;
    wn["law"] = law_name(color.white_noise.law);
    wn["modes"] = color.white_noise.basis.cols();
    json sources = json::array();
    for (const auto& source : color.white_noise.sources)
        sources.push_back({{"from_data", source.from_data}, {"stream", source.stream_index}});
    wn["sources"] = sources;
    write_text_file(artifact_path(config, "wn_model.json"), dump(wn));

    const TestFunctionBank bank = build_bank(config.bank_size, grid);
    const double error = coloring_check_error(color, bank, grid);
    json check;
    check["coloring_error"] = error;
    check["tolerance"] = 1e-8;
    check["bank_size"] = bank.count;
    check["pass"] = error <= 1e-8;
    check["process"] = {{"modes", color.process.n_modes()},
                        {"N", color.process.regularity_order},
                        {"M", color.process.growth_order},
                        {"law", law_name(color.process.law)},
                        {"lambda_sum_sq", color.process.lambdas.cwiseAbs2().sum()},
                        {"lambda_tail", color.process.lambda_tail()}};
    write_text_file(artifact_path(config, "cov_check.json"), dump(check));
    if (error > 1e-8)
        throw NumericError("NumericCheckFailed",
                           "coloring covariance check failed: " + format_double(error));
}

void run_whiten(const RunConfig& config) {
    const Grid grid = config.make_grid();
    const CovarianceKernel kernel = config.make_kernel(grid);
    const ColorFactorization color = color_factorize(
        kernel, config.regularity_order, config.growth_order, grid, config.modes, config.seed,
        config.law, config.zero_tol, config.lebesgue_override);
    const WhitenFactorization whiten = whiten_factorize(color, config.k_target);

    const Eigen::MatrixXd targets = whiten.whitened.components.leftCols(
        std::min(config.k_target, whiten.whitened.n_modes()));
    const Eigen::MatrixXd gram = covariance_matrix(whiten.whitened, targets);
    const double error =
        (gram - Eigen::MatrixXd::Identity(targets.cols(), targets.cols())).cwiseAbs().maxCoeff();

    json report;
    report["gram_error"] = error;
    report["tolerance"] = 1e-8;
    report["rank"] = whiten.rkhs.lambdas.size();
    report["n0_size"] = color.decomposition.null_modes.size();
    report["k_target"] = config.k_target;
    report["gamma"] = whiten.rkhs.gamma;
    report["operator"] = operator_record(whiten.whitening_operator);
    report["pass"] = error <= 1e-8;
    write_text_file(artifact_path(config, "whiten_report.json"), dump(report));
    if (error > 1e-8)
        throw NumericError("NumericCheckFailed",
                           "whitening Gram check failed: " + format_double(error));
}

json roundtrip_report_json(const RunConfig& config, const RoundtripReport& report) {
    json j;
    j["config"] = json::parse(config.to_json_string());
    j["coloring_error"] = report.coloring_error;
    j["whitening_gram_error"] = report.whitening_gram_error;
    j["mc_errors"] = {{"color_max_z", report.mc_color_max_z},
                      {"whiten_max_z", report.mc_whiten_max_z},
                      {"law_agreement_max_z", report.mc_law_agreement_max_z}};
    j["modes"] = report.modes;
    j["rank"] = report.rank;
    j["n0_size"] = report.n0_size;
    j["bank_size"] = report.bank_size;
    j["realizations"] = report.realizations;
    j["seed"] = report.seed;
    j["z_threshold"] = report.z_threshold;
    j["pass"] = report.pass;
    return j;
}

RoundtripReport run_roundtrip_checks(const RunConfig& config) {
    const Grid grid = config.make_grid();
    const CovarianceKernel kernel = config.make_kernel(grid);
    return roundtrip_check(kernel, config.regularity_order, config.growth_order, grid,
                           config.modes, config.k_target, config.seed, config.realizations,
                           config.bank_size, config.law, config.z_threshold, config.zero_tol,
                           config.lebesgue_override);
}

void run_roundtrip(const RunConfig& config) {
    const RoundtripReport report = run_roundtrip_checks(config);
    write_text_file(artifact_path(config, "roundtrip_report.json"),
                    dump(roundtrip_report_json(config, report)));
    if (!report.pass)
        throw NumericError("NumericCheckFailed", "roundtrip verification failed");
}

void run_bank(const RunConfig& config) {
    const Grid grid = config.make_grid();
    const TestFunctionBank bank = build_bank(config.bank_size, grid);
    write_text_file(artifact_path(config, "bank.csv"), bank_to_csv(bank));
}

void run_verify(const RunConfig& config) {
    const std::string path = artifact_path(config, "roundtrip_report.json");
    const std::string stored = read_text_file(path);
    json stored_json;
    try {
        stored_json = json::parse(stored);
    } catch (const json::parse_error& e) {
        throw ValidationError("ParseError", std::string("stored report: ") + e.what());
    }
    if (!stored_json.contains("config") || !stored_json.contains("seed"))
        throw ValidationError("ValidationError",
                              "stored report lacks the config echo needed for replay");

    RunConfig replay = parse_config_text(stored_json.at("config").dump());
    replay.seed = stored_json.at("seed").get<std::uint64_t>();
    replay.output_dir = config.output_dir;

    const RoundtripReport report = run_roundtrip_checks(replay);
    const std::string regenerated = dump(roundtrip_report_json(replay, report));
    const bool identical = regenerated == stored;

    json verdict;
    verdict["report"] = "roundtrip_report.json";
    verdict["identical"] = identical;
    write_text_file(artifact_path(config, "verify_report.json"), dump(verdict));
    if (!identical)
        throw NumericError("ReplayMismatch",
                           "replayed report differs from the stored artifact");
}

}  // namespace

int run_subcommand(const std::string& subcommand, const RunConfig& config) {
    try {
        std::filesystem::create_directories(config.output_dir);
        if (subcommand == "kl")
            run_kl(config);
        else if (subcommand == "color")
            run_color(config);
        else if (subcommand == "whiten")
            run_whiten(config);
        else if (subcommand == "roundtrip")
            run_roundtrip(config);
        else if (subcommand == "bank")
            run_bank(config);
        else if (subcommand == "verify")
            run_verify(config);
        else
            throw ValidationError("ValidationError",
                                  "unknown subcommand '" + subcommand +
                                      "'; expected kl, color, whiten, roundtrip, bank or verify");
        return kExitOk;
    } catch (const Error& e) {
        json err;
        err["error"] = e.code();
        err["message"] = e.what();
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        try {
            write_text_file(artifact_path(config, "error.json"), dump(err));
        } catch (...) {
            // Output directory unusable; stderr already carries the report.
        }
        return e.category() == ErrorCategory::Validation ? kExitValidation : kExitNumeric;
    }
}

}  // namespace gesp
