#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "support/files.hpp"
#include "sysrisk/cli.hpp"
#include "sysrisk/error.hpp"

using namespace sysrisk;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SYSRISK_TEST_DATA;
const fs::path kGolden = SYSRISK_GOLDEN;

cli::RunConfig config_for(const std::string& command, const fs::path& manifest, const fs::path& out) {
    cli::RunConfig c;
    c.command = command;
    c.manifest = manifest;
    c.out_dir = out;
    c.threads = 2;
    return c;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string("\"") + SYSRISK_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string data_lines(const std::string& csv) {
    // Skips the version and header lines.
    std::size_t pos = 0;
    for (int k = 0; k < 2; ++k) pos = csv.find('\n', pos) + 1;
    return csv.substr(pos);
}

}  // namespace

TEST_CASE("profile matches the golden table") {
    fixture::TempDir out;
    auto c = config_for("profile", kData / "synthetic" / "manifest.json", out.path());
    c.date = "2013-03-02";
    c.expected_loss = cli::LossReport::Exact;
    cli::cmd_profile(c);
    CHECK(fixture::read_file(out / "profile.csv") == fixture::read_file(kGolden / "profile" / "profile.csv"));
    const auto meta = fixture::read_file(out / "run.json");
    CHECK(meta.find("\"method\": \"exact\"") != std::string::npos);
    CHECK(meta.find("\"psi\": 1.0") != std::string::npos);
}

TEST_CASE("timeseries matches the golden table") {
    fixture::TempDir out;
    cli::cmd_timeseries(config_for("timeseries", kData / "synthetic" / "manifest.json", out.path()));
    CHECK(fixture::read_file(out / "timeseries.csv") ==
          fixture::read_file(kGolden / "timeseries" / "timeseries.csv"));
}

TEST_CASE("marginal matches the golden table") {
    fixture::TempDir out;
    auto c = config_for("marginal", kData / "synthetic" / "manifest.json", out.path());
    c.date = "2013-03-02";
    cli::cmd_marginal(c);
    CHECK(fixture::read_file(out / "marginal.csv") == fixture::read_file(kGolden / "marginal" / "marginal.csv"));
}

TEST_CASE("generate reproduces the stored dataset") {
    fixture::TempDir out;
    cli::RunConfig c;
    c.command = "generate";
    c.out_dir = out.path();
    c.generator.banks = 8;
    c.generator.assets = 12;
    c.generator.seed = 7;
    c.generator.dates = 3;
    c.generator.step_days = 30;
    cli::cmd_generate(c);
    for (const char* name : {"capital.csv", "probabilities.csv", "holdings.csv", "securities.csv", "exposures.csv",
                             "manifest.json", "run.json"}) {
        CAPTURE(name);
        CHECK(fixture::read_file(out / name) == fixture::read_file(kData / "synthetic" / name));
    }
}

TEST_CASE("profile: hand fixture") {
    fixture::TempDir out;
    auto c = config_for("profile", kData / "two_bank" / "manifest.json", out.path());
    c.expected_loss = cli::LossReport::Exact;
    cli::cmd_profile(c);
    CHECK(data_lines(fixture::read_file(out / "profile.csv")) == "1,A,1,1,0,0.5,0.5,0\n2,B,1,1,0,0.5,0.5,0\n");
    // EL = 200 * (0.1 * 0.8 + 0.9 * 0.2 + 0.1 * 0.2) with every scenario R = 1.
    const auto bundle = cli::run_profile(c);
    CHECK(bundle.metadata_json.find("\"value\": 56.0") != std::string::npos);
}

TEST_CASE("profile: selecting only the overlap layer equals a single-layer run") {
    fixture::TempDir a, b;
    auto c = config_for("profile", kData / "synthetic" / "manifest.json", a.path());
    c.layers = {"OP"};
    const auto op = cli::run_profile(c);
    REQUIRE(op.profile);
    for (const auto& row : op.profile->rows) CHECK(row.r_hat[0] == doctest::Approx(row.r_comb).epsilon(1e-12));
}

TEST_CASE("errors leave no partial outputs") {
    fixture::TempDir out;
    const auto target = out / "report";
    auto c = config_for("profile", kData / "nope" / "manifest.json", target);
    CHECK_THROWS_AS(cli::cmd_profile(c), InputError);
    CHECK_FALSE(fs::exists(target));

    c.manifest = kData / "synthetic" / "manifest.json";
    c.expected_loss = cli::LossReport::Exact;
    c.exact_limit = 4;
    CHECK_THROWS_AS(cli::cmd_profile(c), LimitError);
    CHECK_FALSE(fs::exists(target));

    c.exact_limit = 16;
    c.date = "1999-01-01";
    CHECK_THROWS_AS(cli::cmd_profile(c), InputError);
    CHECK_FALSE(fs::exists(target));
}

TEST_CASE("timeseries: single date and empty manifest") {
    fixture::TempDir out;
    cli::cmd_timeseries(config_for("timeseries", kData / "two_bank" / "manifest.json", out.path()));
    CHECK(data_lines(fixture::read_file(out / "timeseries.csv")) == "2020-06-30,1,0,1\n");

    fixture::TempDir empty;
    fixture::write_file(empty / "manifest.json", R"({"format_version": 1, "dates": []})");
    CHECK_THROWS_AS(cli::cmd_timeseries(config_for("timeseries", empty / "manifest.json", empty / "out")),
                    InputError);
}

TEST_CASE("marginal: single and zero exposure fixtures") {
    fixture::TempDir one;
    cli::cmd_marginal(config_for("marginal", kData / "single_exposure" / "manifest.json", one.path()));
    CHECK(data_lines(fixture::read_file(one / "marginal.csv")) ==
          "B,C,direct,exposure,40,20\n");  // V = 40, R_B = R_C = 1: 40 * (0.2 + 0.3)

    fixture::TempDir zero;
    cli::cmd_marginal(config_for("marginal", kData / "zero_exposure" / "manifest.json", zero.path()));
    CHECK(data_lines(fixture::read_file(zero / "marginal.csv")).empty());
}

TEST_CASE("option constraints") {
    cli::RunConfig c;
    c.impact = ImpactMode::Absorption;
    CHECK_THROWS_AS(cli::network_options(c), InputError);
    c.alpha = 1.5;
    CHECK(cli::network_options(c).alpha == 1.5);
    c.calibration = std::pair{0.1, 0.1};
    CHECK_THROWS_AS(cli::network_options(c), InputError);
    c.alpha.reset();
    CHECK(cli::network_options(c).alpha == doctest::Approx(1.053605156578263).epsilon(1e-14));
    c.impact = ImpactMode::Linear;
    CHECK_THROWS_AS(cli::network_options(c), InputError);
}

TEST_CASE("validate reports per date") {
    std::ostringstream report;
    auto c = config_for("validate", kData / "synthetic" / "manifest.json", {});
    CHECK(cli::cmd_validate(c, report) == 0);
    CHECK(report.str().find("2013-04-01: ok") != std::string::npos);
}

TEST_CASE("outputs are deterministic") {
    for (const std::string command : {"profile", "timeseries", "marginal"}) {
        fixture::TempDir a, b;
        auto ca = config_for(command, kData / "synthetic" / "manifest.json", a.path());
        auto cb = config_for(command, kData / "synthetic" / "manifest.json", b.path());
        cb.threads = 1;
        if (command == "profile") cli::cmd_profile(ca), cli::cmd_profile(cb);
        if (command == "timeseries") cli::cmd_timeseries(ca), cli::cmd_timeseries(cb);
        if (command == "marginal") cli::cmd_marginal(ca), cli::cmd_marginal(cb);
        for (const auto& entry : fs::directory_iterator(a.path())) {
            CAPTURE(entry.path());
            CHECK(fixture::read_file(entry.path()) == fixture::read_file(b / entry.path().filename().string()));
        }
    }
}

TEST_CASE("binary exit codes") {
    fixture::TempDir out;
    const std::string manifest = (kData / "synthetic" / "manifest.json").string();
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("--version") == 0);
    CHECK(run_binary("profile -m \"" + manifest + "\" -o \"" + (out / "p").string() + "\"") == 0);
    CHECK(fs::exists(out / "p" / "profile.csv"));
    CHECK(run_binary("profile -m \"" + (out / "missing.json").string() + "\" -o \"" + (out / "q").string() + "\"") ==
          2);
    CHECK_FALSE(fs::exists(out / "q"));
    CHECK(run_binary("profile --psi 2 -m \"" + manifest + "\" -o \"" + (out / "r").string() + "\"") == 2);
    CHECK(run_binary("profile --expected-loss exact --exact-limit 4 -m \"" + manifest + "\" -o \"" +
                     (out / "s").string() + "\"") == 3);
    CHECK(run_binary("bogus") == 2);
    CHECK(run_binary("validate -m \"" + manifest + "\"") == 0);
}
