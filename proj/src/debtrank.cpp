#include "sysrisk/debtrank.hpp"

#include <algorithm>
#include <string>

#include "sysrisk/error.hpp"

namespace sysrisk {

namespace {

void check_square(const Matrix& m, std::size_t n, const char* what) {
    if (m.rows() != n || m.cols() != n)
        throw InputError(std::string(what) + ": expected a " + std::to_string(n) + "x" +
                         std::to_string(n) + " matrix, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
}

DebtRankResult cascade(const ImpactMatrix& impact, const EconomicValue& value, std::span<const std::size_t> seeds,
                       double psi, std::vector<std::vector<double>>* history);

}  // namespace

ImpactMatrix impact_matrix(const Matrix& exposures, const BankRegistry& registry) {
    const std::size_t n = registry.size();
    check_square(exposures, n, "impact_matrix");
    if (registry.equity.size() != n) throw InputError("impact_matrix: registry equity size mismatch");

    ImpactMatrix w{Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        if (registry.is_absent(j)) continue;
        const double c = registry.equity[j];
        if (!(c > 0.0))
            throw InputError("impact_matrix: equity of bank '" + registry.bank_ids[j] +
                             "' must be strictly positive");
        for (std::size_t i = 0; i < n; ++i) w.weights(i, j) = std::min(1.0, exposures(i, j) / c);
    }
    return w;
}

ImpactMatrix impact_matrix(const ExposureLayer& layer, const BankRegistry& registry) {
    return impact_matrix(layer.matrix, registry);
}

EconomicValue economic_value_or_zero(const Matrix& exposures) {
    if (!exposures.square()) throw InputError("economic_value: exposure matrix must be square");
    const std::size_t n = exposures.rows();
    // X_i = sum_j X_ji, i.e. column sums.
    std::vector<double> outstanding(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto row = exposures.row(j);
        for (std::size_t i = 0; i < n; ++i) outstanding[i] += row[i];
    }
    double total = 0.0;
    for (double x : outstanding) total += x;
    if (!(total > 0.0)) return EconomicValue::zero(n);

    EconomicValue ev{std::move(outstanding), total};
    for (double& x : ev.share) x /= total;
    return ev;
}

EconomicValue economic_value(const Matrix& exposures) {
    auto ev = economic_value_or_zero(exposures);
    if (!(ev.total > 0.0)) throw DegenerateError("economic_value: degenerate layer (all exposures zero)");
    return ev;
}

EconomicValue economic_value(const ExposureLayer& layer) {
    try {
        return economic_value(layer.matrix);
    } catch (const DegenerateError&) {
        throw DegenerateError("economic_value: degenerate layer '" + layer.name + "' (all exposures zero)");
    }
}

DebtRankResult debtrank_run(const ImpactMatrix& impact, const EconomicValue& value,
                            std::span<const std::size_t> seeds, double psi) {
    return cascade(impact, value, seeds, psi, nullptr);
}

std::vector<std::vector<double>> debtrank_trace(const ImpactMatrix& impact, const EconomicValue& value,
                                                std::span<const std::size_t> seeds, double psi) {
    std::vector<std::vector<double>> history;
    cascade(impact, value, seeds, psi, &history);
    return history;
}

namespace {

DebtRankResult cascade(const ImpactMatrix& impact, const EconomicValue& value, std::span<const std::size_t> seeds,
                       double psi, std::vector<std::vector<double>>* history) {
    const std::size_t n = impact.size();
    check_square(impact.weights, n, "debtrank_run");
    if (value.share.size() != n) throw InputError("debtrank_run: economic value size mismatch");
    if (seeds.empty()) throw InputError("debtrank_run: seed set must be non-empty");
    if (!(psi >= 0.0 && psi <= 1.0)) throw InputError("debtrank_run: psi must lie in [0,1]");

    DebtRankResult r;
    r.final_distress.assign(n, 0.0);
    r.node_states.assign(n, NodeState::Undistressed);
    auto& h = r.final_distress;
    auto& state = r.node_states;

    for (std::size_t s : seeds) {
        if (s >= n) throw InputError("debtrank_run: seed index " + std::to_string(s) + " out of range");
        h[s] = psi;
        state[s] = NodeState::Distressed;
    }

    double initial = 0.0;
    for (std::size_t j = 0; j < n; ++j) initial += h[j] * value.share[j];

    std::vector<std::size_t> distressed;
    for (std::size_t j = 0; j < n; ++j)
        if (state[j] == NodeState::Distressed) distressed.push_back(j);

    std::vector<double> increment(n);
    std::size_t t = 1;
    if (history) history->push_back(h);
    while (!distressed.empty()) {
        std::fill(increment.begin(), increment.end(), 0.0);
        for (std::size_t j : distressed) {
            const double hj = h[j];
            if (hj == 0.0) continue;
            const auto row = impact.weights.row(j);
            for (std::size_t i = 0; i < n; ++i) increment[i] += row[i] * hj;
        }
        ++t;
        for (std::size_t i = 0; i < n; ++i) h[i] = std::min(1.0, h[i] + increment[i]);
        if (history) history->push_back(h);

        for (std::size_t j : distressed) state[j] = NodeState::Inactive;
        distressed.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i] == NodeState::Undistressed && h[i] > 0.0) {
                state[i] = NodeState::Distressed;
                distressed.push_back(i);
            }
        }
    }

    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += h[j] * value.share[j];
    // The shares sum to one only up to rounding.
    total = std::min(total, 1.0);
    r.debtrank_incl = total;
    r.debtrank_excl = total - initial;
    r.rounds = t;
    return r;
}

}  // namespace

std::vector<DebtRankResult> debtrank_all_singletons(const ImpactMatrix& impact,
                                                    const EconomicValue& value, double psi) {
    std::vector<DebtRankResult> out;
    out.reserve(impact.size());
    for (std::size_t i = 0; i < impact.size(); ++i) {
        const std::size_t seed[] = {i};
        out.push_back(debtrank_run(impact, value, seed, psi));
    }
    return out;
}

}  // namespace sysrisk
