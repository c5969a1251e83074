#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sysrisk/matrix.hpp"

namespace sysrisk {

using Date = std::chrono::year_month_day;

// Parses an ISO calendar date (YYYY-MM-DD). Throws InputError on malformed input.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

// Banks of one system: identifiers, equity C_i and default probabilities p_i.
//
// `absent` marks banks inserted by align_banks that are not part of the
// snapshot they were aligned into; it is empty when every bank is present.
struct BankRegistry {
    std::vector<std::string> bank_ids;
    std::vector<double> equity;
    std::vector<double> default_probability;
    std::vector<bool> absent;

    std::size_t size() const noexcept { return bank_ids.size(); }
    bool is_absent(std::size_t i) const { return !absent.empty() && absent[i]; }
    std::optional<std::size_t> index_of(std::string_view id) const;

    bool operator==(const BankRegistry&) const = default;
};

// Bipartite bank x asset holdings S_ia for one date.
struct HoldingsSnapshot {
    std::vector<std::string> asset_ids;
    Matrix shares;                    // banks x assets
    std::vector<double> outstanding;  // N_a
    std::vector<double> price;        // p_a

    std::size_t banks() const noexcept { return shares.rows(); }
    std::size_t assets() const noexcept { return asset_ids.size(); }

    bool operator==(const HoldingsSnapshot&) const = default;
};

inline constexpr std::string_view kOverlapLayer = "OP";
inline constexpr std::string_view kCombinedLayer = "comb";
inline constexpr std::string_view kDirectLayer = "direct";

// One bank x bank exposure layer. Entry (i, j) is the loss suffered by bank j
// if bank i defaults. Direct layers have a zero diagonal; the OP layer may not.
struct ExposureLayer {
    std::string name;
    Matrix matrix;

    bool operator==(const ExposureLayer&) const = default;
};

struct SystemSnapshot {
    Date date{};
    BankRegistry registry;
    std::optional<HoldingsSnapshot> holdings;
    std::vector<ExposureLayer> direct_layers;
    // Free-form provenance, e.g. "exposure_basis" = "gross".
    std::map<std::string, std::string> metadata;

    bool operator==(const SystemSnapshot&) const = default;
};

struct ValidationIssue {
    std::string invariant;
    std::string location;
};

// Violations break an invariant; flags are permitted oddities (inert assets,
// banks inserted by alignment).
struct ValidationReport {
    std::vector<ValidationIssue> violations;
    std::vector<ValidationIssue> flags;

    bool ok() const noexcept { return violations.empty(); }
    bool empty() const noexcept { return violations.empty() && flags.empty(); }
    std::string to_string() const;
};

ValidationReport validate_snapshot(const SystemSnapshot& snapshot);

// Throws InputError carrying the formatted report if any invariant is violated.
void require_valid(const SystemSnapshot& snapshot);

// Re-indexes every snapshot onto the union of bank ids, in order of first
// appearance. Banks missing from a snapshot get zero rows and columns, zero
// equity and probability, and are marked absent. Throws InputError on a
// duplicate bank id within one snapshot.
std::vector<SystemSnapshot> align_banks(const std::vector<SystemSnapshot>& snapshots);

}  // namespace sysrisk
