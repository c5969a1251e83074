#include "sysrisk/multilayer.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "sysrisk/error.hpp"

namespace sysrisk {

RiskLayer RiskLayer::from_exposures(std::string name, Matrix exposures) {
    RiskLayer layer{std::move(name), std::move(exposures), {}, ValueSource::Exposures};
    layer.refresh_value();
    return layer;
}

RiskLayer RiskLayer::from_holdings(const HoldingsSnapshot& holdings, const AssetImpactMatrix& impact) {
    RiskLayer layer{std::string(kOverlapLayer), indirect_exposures(holdings, impact).matrix, {},
                    ValueSource::Holdings};
    try {
        layer.value = op_economic_value(holdings);
    } catch (const DegenerateError&) {
        layer.value = EconomicValue::zero(holdings.banks());
    }
    return layer;
}

void RiskLayer::refresh_value() {
    if (source == ValueSource::Exposures) value = economic_value_or_zero(exposures);
}

const RiskLayer* MultiLayerNetwork::find(std::string_view name) const {
    if (name == kCombinedLayer) return &combined;
    const auto idx = layer_index(name);
    return idx ? &layers[*idx] : nullptr;
}

std::optional<std::size_t> MultiLayerNetwork::layer_index(std::string_view name) const {
    for (std::size_t k = 0; k < layers.size(); ++k)
        if (layers[k].name == name) return k;
    return std::nullopt;
}

MultiLayerNetwork combine_layers(std::vector<std::string> bank_ids, std::vector<RiskLayer> layers) {
    const std::size_t n = bank_ids.size();
    std::set<std::string> names;
    for (const auto& layer : layers) {
        if (layer.exposures.rows() != n || layer.exposures.cols() != n || layer.value.share.size() != n)
            throw InputError("combine_layers: layer '" + layer.name + "' is not aligned to the bank index");
        if (layer.name == kCombinedLayer || !names.insert(layer.name).second)
            throw InputError("combine_layers: duplicate or reserved layer name '" + layer.name + "'");
    }

    RiskLayer comb{std::string(kCombinedLayer), Matrix(n, n), EconomicValue::zero(n),
                   RiskLayer::ValueSource::Exposures};
    for (const auto& layer : layers) {
        auto dst = comb.exposures.data();
        const auto src = layer.exposures.data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
        comb.value.total += layer.value.total;
    }
    if (comb.value.total > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            double weighted = 0.0;
            for (const auto& layer : layers) weighted += layer.value.total * layer.value.share[i];
            comb.value.share[i] = weighted / comb.value.total;
        }
    }
    return {std::move(bank_ids), std::move(layers), std::move(comb)};
}

std::vector<double> normalized_debtrank(std::span<const double> debtranks, double layer_value,
                                        double combined_value) {
    if (!(combined_value > 0.0))
        throw DegenerateError("normalized_debtrank: combined economic value must be positive");
    const double scale = layer_value / combined_value;
    std::vector<double> out(debtranks.size());
    std::transform(debtranks.begin(), debtranks.end(), out.begin(), [scale](double r) { return scale * r; });
    return out;
}

SRProfile sr_profile(const MultiLayerNetwork& network, const BankRegistry& registry, double psi) {
    const std::size_t n = network.banks();
    if (registry.size() != n) throw InputError("sr_profile: registry does not match the network");

    SRProfile profile;
    profile.psi = psi;
    profile.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        profile.rows[i].bank_id = network.bank_ids[i];
        profile.rows[i].bank_index = i;
    }

    const auto singletons = [&](const RiskLayer& layer) {
        return debtrank_all_singletons(impact_matrix(layer.exposures, registry), layer.value, psi);
    };

    const double v_comb = network.combined.value.total;
    for (const auto& layer : network.layers) {
        profile.layer_names.push_back(layer.name);
        const auto results = singletons(layer);
        // With V_comb = 0 every layer is empty and all normalized values are zero.
        const double scale = v_comb > 0.0 ? layer.value.total / v_comb : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            profile.rows[i].r_hat.push_back(scale * results[i].debtrank_incl);
            profile.rows[i].r_hat_excl.push_back(scale * results[i].debtrank_excl);
        }
    }
    const auto combined = singletons(network.combined);
    for (std::size_t i = 0; i < n; ++i) {
        profile.rows[i].r_comb = combined[i].debtrank_incl;
        profile.rows[i].r_comb_excl = combined[i].debtrank_excl;
    }

    std::sort(profile.rows.begin(), profile.rows.end(), [](const ProfileRow& a, const ProfileRow& b) {
        if (a.r_comb != b.r_comb) return a.r_comb > b.r_comb;
        return a.bank_id < b.bank_id;
    });
    return profile;
}

double average_debtrank(std::span<const double> values) {
    if (values.empty()) throw InputError("average_debtrank: no values");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

AverageDebtRank average_profile(const SRProfile& profile, const BankRegistry& registry) {
    AverageDebtRank avg;
    avg.date = profile.date;
    std::vector<double> column;
    const auto present = [&](const ProfileRow& row) { return !registry.is_absent(row.bank_index); };

    for (std::size_t k = 0; k < profile.layer_names.size(); ++k) {
        column.clear();
        for (const auto& row : profile.rows)
            if (present(row)) column.push_back(row.r_hat[k]);
        avg.per_layer.push_back(average_debtrank(column));
    }
    column.clear();
    for (const auto& row : profile.rows)
        if (present(row)) column.push_back(row.r_comb);
    avg.combined = average_debtrank(column);
    return avg;
}

MultiLayerNetwork build_network(const SystemSnapshot& snapshot, const NetworkOptions& options) {
    const std::size_t n = snapshot.registry.size();
    std::set<std::string> selected;
    bool want_direct = false;
    bool want_sublayer = false;
    for (const auto& name : options.layers) {
        if (name.empty() || name == kCombinedLayer)
            throw InputError("layer selection: '" + name + "' is not a selectable layer");
        if (!selected.insert(name).second) throw InputError("layer selection: '" + name + "' listed twice");
        if (name == kDirectLayer) want_direct = true;
        else if (name != kOverlapLayer) want_sublayer = true;
    }
    if (want_direct && want_sublayer)
        throw InputError("layer selection: 'direct' already contains every direct sub-layer");
    if (options.layers.empty()) throw InputError("layer selection is empty");

    std::vector<RiskLayer> layers;
    for (const auto& name : options.layers) {
        if (name == kOverlapLayer) {
            if (!snapshot.holdings) {
                layers.push_back(RiskLayer::from_holdings(
                    HoldingsSnapshot{{}, Matrix(n, 0), {}, {}}, AssetImpactMatrix{Matrix(n, 0), ImpactMode::Linear, {}}));
                continue;
            }
            const auto& h = *snapshot.holdings;
            AssetImpactMatrix impact;
            if (options.impact == ImpactMode::Linear) {
                impact = linear_impact(h);
            } else if (!options.asset_alpha.empty()) {
                impact = absorption_impact(h, options.asset_alpha);
            } else {
                impact = absorption_impact(h, options.alpha);
            }
            layers.push_back(RiskLayer::from_holdings(h, impact));
        } else if (name == kDirectLayer) {
            Matrix sum(n, n);
            for (const auto& layer : snapshot.direct_layers) {
                auto dst = sum.data();
                const auto src = layer.matrix.data();
                for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
            }
            layers.push_back(RiskLayer::from_exposures(name, std::move(sum)));
        } else {
            const auto it = std::find_if(snapshot.direct_layers.begin(), snapshot.direct_layers.end(),
                                         [&](const ExposureLayer& l) { return l.name == name; });
            layers.push_back(RiskLayer::from_exposures(
                name, it != snapshot.direct_layers.end() ? it->matrix : Matrix(n, n)));
        }
    }
    return combine_layers(snapshot.registry.bank_ids, std::move(layers));
}

}  // namespace sysrisk
