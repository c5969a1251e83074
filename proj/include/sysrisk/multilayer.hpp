#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sysrisk/debtrank.hpp"
#include "sysrisk/model.hpp"
#include "sysrisk/overlap.hpp"

namespace sysrisk {

// An exposure layer together with the economic values DebtRank is measured in.
// Direct layers derive their values from the exposures themselves; the
// overlapping-portfolio layer takes them from the holdings and keeps them
// fixed when its exposures are edited.
struct RiskLayer {
    enum class ValueSource { Exposures, Holdings };

    std::string name;
    Matrix exposures;
    EconomicValue value;
    ValueSource source = ValueSource::Exposures;

    static RiskLayer from_exposures(std::string name, Matrix exposures);
    static RiskLayer from_holdings(const HoldingsSnapshot& holdings, const AssetImpactMatrix& impact);

    // Recomputes `value` from `exposures` for exposure-valued layers.
    void refresh_value();
};

struct MultiLayerNetwork {
    std::vector<std::string> bank_ids;
    std::vector<RiskLayer> layers;
    RiskLayer combined;

    std::size_t banks() const noexcept { return bank_ids.size(); }
    const RiskLayer* find(std::string_view name) const;
    std::optional<std::size_t> layer_index(std::string_view name) const;
};

// Sums the layers into the combined network. Combined values are the
// value-weighted blend v_i = sum_a V_a v_a,i / V_comb with V_comb = sum_a V_a.
// Throws InputError on size mismatches or duplicate layer names.
MultiLayerNetwork combine_layers(std::vector<std::string> bank_ids, std::vector<RiskLayer> layers);

// R_hat_i = (V_layer / V_comb) R_i. Throws DegenerateError if V_comb <= 0.
std::vector<double> normalized_debtrank(std::span<const double> debtranks, double layer_value,
                                        double combined_value);

struct ProfileRow {
    std::string bank_id;
    std::size_t bank_index = 0;
    double r_comb = 0.0;
    double r_comb_excl = 0.0;
    std::vector<double> r_hat;       // per layer, initial distress included
    std::vector<double> r_hat_excl;  // per layer, initial distress excluded
};

// Banks ordered by descending combined DebtRank (initial distress included),
// ties broken by bank id.
struct SRProfile {
    Date date{};
    double psi = 1.0;
    std::vector<std::string> layer_names;
    std::vector<ProfileRow> rows;
};

SRProfile sr_profile(const MultiLayerNetwork& network, const BankRegistry& registry, double psi = 1.0);

// Arithmetic mean. Throws InputError on an empty input.
double average_debtrank(std::span<const double> values);

struct AverageDebtRank {
    Date date{};
    std::vector<double> per_layer;  // mean normalized DebtRank per layer
    double combined = 0.0;          // mean combined DebtRank
};

// Averages over the banks present in `registry` (aligned-in placeholders excluded).
AverageDebtRank average_profile(const SRProfile& profile, const BankRegistry& registry);

struct NetworkOptions {
    ImpactMode impact = ImpactMode::Linear;
    double alpha = 0.0;               // absorption mode, global
    std::vector<double> asset_alpha;  // absorption mode, per asset; overrides `alpha`
    // "direct" (all direct layers summed), "OP", or individual direct layer names.
    std::vector<std::string> layers{std::string(kDirectLayer), std::string(kOverlapLayer)};
};

// Builds the selected layers of a snapshot. A selected layer the snapshot
// does not carry becomes an all-zero layer.
MultiLayerNetwork build_network(const SystemSnapshot& snapshot, const NetworkOptions& options);

}  // namespace sysrisk
