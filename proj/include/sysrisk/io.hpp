#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sysrisk/model.hpp"
#include "sysrisk/multilayer.hpp"
#include "sysrisk/systemic_loss.hpp"

namespace sysrisk {

// Version written into (and required from) every file this library reads or writes.
inline constexpr int kFormatVersion = 1;

// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

// Strict parse of a finite decimal number; the whole text must be consumed.
std::optional<double> parse_number(std::string_view text);

// Input tables (delimiter ',', one header row after the version line):
//
//   holdings.csv       date,bank_id,asset_id,shares
//   securities.csv     date,asset_id,outstanding,price
//   exposures.csv      date,layer,debtor_id,creditor_id,amount
//   capital.csv        date,bank_id,equity
//   probabilities.csv  bank_id,p
//
// `amount` is the creditor's loss if the debtor defaults. A file may hold
// rows for several dates; only rows matching the manifest entry's date are used.
struct ManifestEntry {
    Date date{};
    std::optional<std::filesystem::path> holdings;
    std::optional<std::filesystem::path> securities;
    std::optional<std::filesystem::path> exposures;
    std::filesystem::path capital;
    std::filesystem::path probabilities;
    // When set, the direct layers of this date in order; rows naming other
    // layers are rejected. Otherwise layers appear in order of first use.
    std::optional<std::vector<std::string>> layers;
};

// JSON manifest:
//   {"format_version": 1, "currency": "...", "exposure_basis": "gross",
//    "dates": [{"date": "YYYY-MM-DD", "capital": "...", "probabilities": "...",
//               "holdings": "...", "securities": "...", "exposures": "...",
//               "layers": ["DL", ...]}, ...]}
// Paths are relative to the manifest's directory. Dates are unique and sorted.
struct DatasetManifest {
    int format_version = kFormatVersion;
    std::optional<std::string> currency;
    std::optional<std::string> exposure_basis;
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir;

    const ManifestEntry* find(const Date& date) const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);

// Loads and validates one date. Throws ParseError (file, line, column) for
// malformed rows and InputError for invariant violations.
SystemSnapshot load_snapshot(const DatasetManifest& manifest, const ManifestEntry& entry);
// Loads every date, parsing each file once.
std::vector<SystemSnapshot> load_dataset(const DatasetManifest& manifest);

// Writes the canonical serialization of a dated sequence into `dir`: the five
// tables above plus manifest.json. Probabilities must agree across dates.
void write_dataset(const std::vector<SystemSnapshot>& snapshots, const std::filesystem::path& dir);

// Report tables.
//   profile.csv     rank,bank_id,R_comb,R_hat_<layer>...,R_comb_excl,R_hat_excl_<layer>...
//   timeseries.csv  date,R_bar_<layer>...,R_bar_comb
//   marginal.csv    from_bank,to_bank,layer,kind,size,delta_el
void write_profile_table(const SRProfile& profile, const std::filesystem::path& path);
void write_timeseries_table(const std::vector<std::string>& layer_names,
                            const std::vector<AverageDebtRank>& rows, const std::filesystem::path& path);
void write_marginal_table(const std::vector<MarginalExposureRecord>& records,
                          const std::filesystem::path& path);

// Everything one CLI run produces. Absent members are not written.
struct ReportBundle {
    std::optional<SRProfile> profile;
    std::optional<std::vector<AverageDebtRank>> timeseries;
    std::vector<std::string> timeseries_layers;
    std::optional<std::vector<MarginalExposureRecord>> marginal;
    std::string metadata_json;  // written verbatim to run.json
};

// Creates `dir` if needed. Throws InputError if a file cannot be written.
void write_report(const ReportBundle& bundle, const std::filesystem::path& dir);

}  // namespace sysrisk
