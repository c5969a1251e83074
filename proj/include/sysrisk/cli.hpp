#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sysrisk/generator.hpp"
#include "sysrisk/io.hpp"
#include "sysrisk/overlap.hpp"
#include "sysrisk/systemic_loss.hpp"

namespace sysrisk::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInputError = 2,
    kLimitError = 3,
};

enum class LossReport { None, Approximate, Exact };

struct RunConfig {
    std::string command;
    std::filesystem::path manifest;
    std::optional<std::string> date;  // profile/marginal; defaults to the last date
    double psi = 1.0;
    ImpactMode impact = ImpactMode::Linear;
    std::optional<double> alpha;
    std::optional<std::pair<double, double>> calibration;  // (sold fraction, price drop)
    std::vector<std::string> layers{std::string(kDirectLayer), std::string(kOverlapLayer)};
    LossReport expected_loss = LossReport::Approximate;
    std::size_t exact_limit = kDefaultExactBankLimit;
    std::filesystem::path out_dir;
    unsigned threads = 0;  // 0: hardware concurrency
    GeneratorConfig generator;
};

// Checks cross-field constraints and resolves the absorption alpha.
// Throws InputError.
NetworkOptions network_options(const RunConfig& config);

// Computations behind each subcommand; nothing is written.
ReportBundle run_profile(const RunConfig& config);
ReportBundle run_timeseries(const RunConfig& config);
ReportBundle run_marginal(const RunConfig& config);

// Compute, then write into config.out_dir. Outputs are written only after
// every computation succeeded.
void cmd_profile(const RunConfig& config);
void cmd_timeseries(const RunConfig& config);
void cmd_marginal(const RunConfig& config);
void cmd_generate(const RunConfig& config);
// Returns the number of dates that failed validation; prints a report.
std::size_t cmd_validate(const RunConfig& config, std::ostream& out);

}  // namespace sysrisk::cli
