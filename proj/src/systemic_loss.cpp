#include "sysrisk/systemic_loss.hpp"

#include <cmath>

#include "parallel.hpp"
#include "sysrisk/error.hpp"

namespace sysrisk {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
        else comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

void check_registry(const RiskLayer& layer, const BankRegistry& registry) {
    if (layer.exposures.rows() != registry.size() || registry.default_probability.size() != registry.size())
        throw InputError("expected loss: registry does not match layer '" + layer.name + "'");
}

std::vector<double> singleton_debtranks(const RiskLayer& layer, const BankRegistry& registry, double psi) {
    const auto results = debtrank_all_singletons(impact_matrix(layer.exposures, registry), layer.value, psi);
    std::vector<double> r(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) r[i] = results[i].debtrank_incl;
    return r;
}

}  // namespace

ExpectedLossResult expected_loss_exact(const RiskLayer& layer, const BankRegistry& registry, double psi,
                                       std::size_t max_banks) {
    check_registry(layer, registry);
    const std::size_t b = registry.size();
    if (b > max_banks || b >= 63)
        throw LimitError("expected_loss_exact: " + std::to_string(b) + " banks exceed the exact limit of " +
                         std::to_string(max_banks) + "; use the approximation");

    const auto impact = impact_matrix(layer.exposures, registry);
    const auto& p = registry.default_probability;
    const std::uint64_t scenarios = std::uint64_t{1} << b;

    CompensatedSum weights;
    CompensatedSum loss;
    std::vector<std::size_t> seeds;
    seeds.reserve(b);
    for (std::uint64_t mask = 0; mask < scenarios; ++mask) {
        double w = 1.0;
        seeds.clear();
        for (std::size_t i = 0; i < b; ++i) {
            if (mask >> i & 1U) {
                w *= p[i];
                seeds.push_back(i);
            } else {
                w *= 1.0 - p[i];
            }
        }
        weights.add(w);
        if (seeds.empty() || w == 0.0) continue;
        loss.add(w * debtrank_run(impact, layer.value, seeds, psi).debtrank_incl);
    }

    ExpectedLossResult out;
    out.method = LossMethod::Exact;
    out.terms_evaluated = scenarios;
    out.total_value = layer.value.total;
    out.weight_sum = weights.value();
    if (std::abs(out.weight_sum - 1.0) > 1e-12)
        throw Error("expected_loss_exact: scenario probabilities sum to " + std::to_string(out.weight_sum));
    out.value = layer.value.total * loss.value();
    return out;
}

ExpectedLossResult expected_loss_approx(const RiskLayer& layer, const BankRegistry& registry, double psi) {
    check_registry(layer, registry);
    const auto r = singleton_debtranks(layer, registry, psi);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sum += registry.default_probability[i] * r[i];

    ExpectedLossResult out;
    out.method = LossMethod::Approximate;
    out.terms_evaluated = r.size();
    out.total_value = layer.value.total;
    out.value = layer.value.total * sum;
    return out;
}

MultiLayerNetwork with_exposure(const MultiLayerNetwork& network, std::string_view layer, std::size_t k,
                                std::size_t l, double amount) {
    const auto idx = network.layer_index(layer);
    if (!idx) throw InputError("unknown layer '" + std::string(layer) + "'");
    if (k >= network.banks() || l >= network.banks()) throw InputError("bank index out of range");
    if (!(amount >= 0.0 && std::isfinite(amount))) throw InputError("exposure must be nonnegative");

    auto layers = network.layers;
    layers[*idx].exposures(k, l) = amount;
    layers[*idx].refresh_value();
    return combine_layers(network.bank_ids, std::move(layers));
}

MarginalExposureRecord marginal_exposure_loss(const MultiLayerNetwork& network, const BankRegistry& registry,
                                              std::size_t k, std::size_t l, std::string_view layer,
                                              double delta, double psi) {
    if (!(delta >= 0.0)) throw InputError("marginal_exposure_loss: delta must be nonnegative");
    const auto idx = network.layer_index(layer);
    if (!idx) throw InputError("marginal_exposure_loss: unknown layer '" + std::string(layer) + "'");
    if (k >= network.banks() || l >= network.banks())
        throw InputError("marginal_exposure_loss: bank index out of range");
    check_registry(network.combined, registry);

    const double current = network.layers[*idx].exposures(k, l);
    const auto perturbed = with_exposure(network, layer, k, l, current + delta);

    const auto r_before = singleton_debtranks(network.combined, registry, psi);
    const auto r_after = singleton_debtranks(perturbed.combined, registry, psi);
    const double v_before = network.combined.value.total;
    const double v_after = perturbed.combined.value.total;

    double delta_el = 0.0;
    for (std::size_t i = 0; i < r_before.size(); ++i)
        delta_el += registry.default_probability[i] * (v_after * r_after[i] - v_before * r_before[i]);

    MarginalExposureRecord rec;
    rec.from_bank = network.bank_ids[k];
    rec.to_bank = network.bank_ids[l];
    rec.layer = std::string(layer);
    rec.self_impact = k == l;
    rec.exposure_size = delta;
    rec.delta_el = delta_el;
    return rec;
}

MarginalExposureRecord marginal_exposure_loss(const MultiLayerNetwork& network, const BankRegistry& registry,
                                              std::string_view from_bank, std::string_view to_bank,
                                              std::string_view layer, double delta, double psi) {
    const auto k = registry.index_of(from_bank);
    const auto l = registry.index_of(to_bank);
    if (!k) throw InputError("marginal_exposure_loss: unknown bank '" + std::string(from_bank) + "'");
    if (!l) throw InputError("marginal_exposure_loss: unknown bank '" + std::string(to_bank) + "'");
    return marginal_exposure_loss(network, registry, *k, *l, layer, delta, psi);
}

std::vector<MarginalExposureRecord> marginal_scan(const MultiLayerNetwork& network,
                                                  const BankRegistry& registry, double psi, unsigned threads) {
    struct Edge {
        std::size_t layer, k, l;
    };
    std::vector<Edge> edges;
    const std::size_t n = network.banks();
    for (std::size_t a = 0; a < network.layers.size(); ++a)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = 0; l < n; ++l)
                if (network.layers[a].exposures(k, l) != 0.0) edges.push_back({a, k, l});

    std::vector<MarginalExposureRecord> out(edges.size());
    detail::parallel_for(edges.size(), threads, [&](std::size_t e) {
        const auto& [a, k, l] = edges[e];
        const auto& name = network.layers[a].name;
        const double x = network.layers[a].exposures(k, l);
        const auto without = with_exposure(network, name, k, l, 0.0);
        out[e] = marginal_exposure_loss(without, registry, k, l, name, x, psi);
    });
    return out;
}

}  // namespace sysrisk
