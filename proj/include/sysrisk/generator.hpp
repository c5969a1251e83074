#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sysrisk/model.hpp"

namespace sysrisk {

// Parameters of the synthetic system generator. Identical configs produce
// identical output on every platform.
struct GeneratorConfig {
    std::size_t banks = 20;
    std::size_t assets = 50;
    std::uint64_t seed = 1;
    double holdings_density = 0.2;  // fraction of bank x asset cells held, in (0,1]
    double tail_exponent = 1.5;     // Pareto exponent of bank sizes, > 0
    // Density of each direct layer over ordered bank pairs, in [0,1].
    std::vector<std::pair<std::string, double>> direct_density{
        {"DL", 0.2}, {"deri", 0.1}, {"secu", 0.1}, {"FX", 0.05}};
    double direct_scale = 0.5;  // direct exposures relative to portfolio overlap
    double equity_scale = 0.1;  // equity relative to a bank's total assets
    double p_min = 0.001;
    double p_max = 0.01;
    std::size_t dates = 1;
    Date start_date{std::chrono::year{2013}, std::chrono::month{1}, std::chrono::day{31}};
    int step_days = 1;
    std::string currency = "MXN";
};

// Throws InputError for an infeasible or out-of-range config.
void validate_config(const GeneratorConfig& config);

// Snapshot for `config.start_date`.
SystemSnapshot generate_synthetic(const GeneratorConfig& config);

// `config.dates` snapshots, `config.step_days` apart, sharing banks and
// assets; holdings, prices and exposures drift between dates.
std::vector<SystemSnapshot> generate_series(const GeneratorConfig& config);

}  // namespace sysrisk
