#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gesp/config.hpp"
#include "gesp/io.hpp"
#include "gesp/runner.hpp"

using namespace gesp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("gesp_test_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

RunConfig small_roundtrip_config(const std::string& out) {
    RunConfig config = parse_config_text(R"({"kernel": "gaussian", "dimension": 1})");
    config.halfwidth = 15.0;
    config.points_per_axis = 128;
    config.modes = 24;
    config.bank_size = 6;
    config.k_target = 6;
    config.realizations = 2000;
    config.seed = 20260809;
    config.output_dir = out;
    return config;
}

}  // namespace

TEST_CASE("minimal config fills the documented defaults") {
    const RunConfig config = parse_config_text(R"({"kernel": "gaussian", "dimension": 1})");
    CHECK(config.halfwidth == 20.0);
    CHECK(config.points_per_axis == 256);
    CHECK(config.rule == QuadratureRule::GaussLegendre);
    CHECK(config.modes == 64);
    CHECK(config.zero_tol == 1e-10);
    CHECK(config.bank_size == 8);
    CHECK(config.law == CoefficientLaw::Gaussian);
    CHECK(config.z_threshold == 4.0);
    CHECK(config.kernel_name == "gaussian");
}

TEST_CASE("config validation surfaces module preconditions") {
    SUBCASE("too many modes") {
        try {
            parse_config_text(
                R"({"kernel": "gaussian", "dimension": 1,
                    "domain": {"points_per_axis": 16}, "modes": 17})");
            FAIL("expected TooManyModes");
        } catch (const Error& e) {
            CHECK(e.code() == "TooManyModes");
        }
    }
    SUBCASE("unknown kernels list the builtins") {
        try {
            parse_config_text(R"({"kernel": "matern", "dimension": 1})");
            FAIL("expected ValidationError");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("gaussian") != std::string::npos);
            CHECK(std::string(e.what()).find("polynomial-growth-demo") != std::string::npos);
        }
    }
    SUBCASE("malformed JSON is a parse error") {
        try {
            parse_config_text("{not json");
            FAIL("expected ParseError");
        } catch (const Error& e) {
            CHECK(e.code() == "ParseError");
        }
    }
    SUBCASE("config echo parses back to the same values") {
        const RunConfig config =
            parse_config_text(R"({"kernel": "exponential", "dimension": 2, "seed": 99})");
        const RunConfig echoed = parse_config_text(config.to_json_string());
        CHECK(echoed.kernel_name == config.kernel_name);
        CHECK(echoed.dimension == config.dimension);
        CHECK(echoed.seed == config.seed);
        CHECK(echoed.to_json_string() == config.to_json_string());
    }
}

TEST_CASE("kl subcommand emits the expected artifacts") {
    TempDir dir("kl");
    RunConfig config = parse_config_text(R"({"kernel": "gaussian", "dimension": 1})");
    config.points_per_axis = 64;
    config.halfwidth = 15.0;
    config.modes = 16;
    config.output_dir = dir.str();

    CHECK(run_subcommand("kl", config) == kExitOk);
    CHECK(fs::exists(dir.path / "eigs.csv"));
    CHECK(fs::exists(dir.path / "modes.csv"));
    CHECK(fs::exists(dir.path / "kl_report.json"));

    const std::string eigs = read_text_file((dir.path / "eigs.csv").string());
    CHECK(eigs.substr(0, eigs.find('\n')) == "n,lambda");
    const std::string report = read_text_file((dir.path / "kl_report.json").string());
    CHECK(report.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("roundtrip then verify reproduces the report byte for byte") {
    TempDir dir("roundtrip");
    const RunConfig config = small_roundtrip_config(dir.str());

    REQUIRE(run_subcommand("roundtrip", config) == kExitOk);
    const std::string first = read_text_file((dir.path / "roundtrip_report.json").string());

    // Idempotence: a second run overwrites with identical bytes.
    REQUIRE(run_subcommand("roundtrip", config) == kExitOk);
    const std::string second = read_text_file((dir.path / "roundtrip_report.json").string());
    CHECK(first == second);

    CHECK(run_subcommand("verify", config) == kExitOk);
    const std::string verdict = read_text_file((dir.path / "verify_report.json").string());
    CHECK(verdict.find("\"identical\": true") != std::string::npos);

    SUBCASE("tampered reports fail verification") {
        std::string tampered = first;
        const auto pos = tampered.find("\"coloring_error\"");
        REQUIRE(pos != std::string::npos);
        tampered.insert(pos, " ");
        write_text_file((dir.path / "roundtrip_report.json").string(), tampered);
        CHECK(run_subcommand("verify", config) == kExitNumeric);
    }
}

TEST_CASE("failing runs exit with the contract codes and an error report") {
    SUBCASE("rank-deficient whitening is a numeric failure") {
        TempDir dir("finite_rank");
        RunConfig config = parse_config_text(R"({"kernel": "rank1", "dimension": 1})");
        config.points_per_axis = 128;
        config.halfwidth = 12.0;
        config.modes = 8;
        config.k_target = 2;
        config.realizations = 100;
        config.output_dir = dir.str();

        CHECK(run_subcommand("roundtrip", config) == kExitNumeric);
        const std::string err = read_text_file((dir.path / "error.json").string());
        CHECK(err.find("FiniteRank") != std::string::npos);
    }

    SUBCASE("under-resolved bank is a validation failure") {
        TempDir dir("bank");
        RunConfig config = parse_config_text(R"({"kernel": "gaussian", "dimension": 1})");
        config.points_per_axis = 16;
        config.modes = 8;
        config.bank_size = 12;  // needs P >= 8 sqrt(12) ~ 28
        config.output_dir = dir.str();
        CHECK(run_subcommand("bank", config) == kExitValidation);
    }

    SUBCASE("unknown subcommand is a validation failure") {
        TempDir dir("unknown");
        RunConfig config = small_roundtrip_config(dir.str());
        CHECK(run_subcommand("paint", config) == kExitValidation);
    }
}

TEST_CASE("bank subcommand exports the node-major matrix") {
    TempDir dir("bank_ok");
    RunConfig config = parse_config_text(R"({"kernel": "gaussian", "dimension": 1})");
    config.points_per_axis = 128;
    config.halfwidth = 12.0;
    config.bank_size = 4;
    config.output_dir = dir.str();
    CHECK(run_subcommand("bank", config) == kExitOk);
    const std::string csv = read_text_file((dir.path / "bank.csv").string());
    CHECK(csv.substr(0, csv.find('\n')) == "phi_0,phi_1,phi_2,phi_3");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 129);
}

TEST_CASE("color and whiten subcommands emit their reports") {
    TempDir dir("color");
    RunConfig config = small_roundtrip_config(dir.str());
    CHECK(run_subcommand("color", config) == kExitOk);
    CHECK(fs::exists(dir.path / "operator.json"));
    CHECK(fs::exists(dir.path / "wn_model.json"));
    CHECK(fs::exists(dir.path / "cov_check.json"));
    const std::string check = read_text_file((dir.path / "cov_check.json").string());
    CHECK(check.find("\"pass\": true") != std::string::npos);

    CHECK(run_subcommand("whiten", config) == kExitOk);
    const std::string whiten = read_text_file((dir.path / "whiten_report.json").string());
    CHECK(whiten.find("\"pass\": true") != std::string::npos);
    CHECK(whiten.find("\"gamma\"") != std::string::npos);
}

TEST_CASE("grid-file kernels run through the pipeline") {
    TempDir dir("gridfile");
    // Tabulate the gaussian kernel by hand and feed it back as a file.
    const Grid grid = build_grid(1, 12.0, 32, QuadratureRule::GaussLegendre);
    Eigen::MatrixXd K(grid.node_count(), grid.node_count());
    for (Eigen::Index i = 0; i < grid.node_count(); ++i)
        for (Eigen::Index j = 0; j < grid.node_count(); ++j)
            K(i, j) = std::exp(-0.5 * std::pow(grid.nodes(i, 0) - grid.nodes(j, 0), 2));
    std::vector<std::string> cols;
    for (Eigen::Index j = 0; j < K.cols(); ++j) cols.push_back("c" + std::to_string(j));
    std::string csv = matrix_to_csv(cols, K);
    csv = csv.substr(csv.find('\n') + 1);  // grid-file format carries no header
    const std::string kernel_path = (dir.path / "kernel.csv").string();
    write_text_file(kernel_path, csv);

    RunConfig config = parse_config_text(
        R"({"dimension": 1, "domain": {"halfwidth": 12.0, "points_per_axis": 32},
            "kernel": {"name": "grid-file", "path": ")" +
        kernel_path + R"("}, "modes": 8})");
    config.output_dir = dir.str();
    CHECK(run_subcommand("kl", config) == kExitOk);
}
