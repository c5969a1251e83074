#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sysrisk/matrix.hpp"
#include "sysrisk/model.hpp"

namespace sysrisk {

// W_ij = min(1, X_ij / C_j): the fraction of j's equity lost if i defaults.
struct ImpactMatrix {
    Matrix weights;

    std::size_t size() const noexcept { return weights.rows(); }
};

// Per-bank share v_i of the total economic value V. The shares sum to one
// whenever V > 0; a layer with V = 0 carries all-zero shares.
struct EconomicValue {
    std::vector<double> share;
    double total = 0.0;

    static EconomicValue zero(std::size_t banks) { return {std::vector<double>(banks, 0.0), 0.0}; }
    bool operator==(const EconomicValue&) const = default;
};

enum class NodeState : char { Undistressed = 'U', Distressed = 'D', Inactive = 'I' };

struct DebtRankResult {
    std::vector<double> final_distress;  // h_i(T)
    std::vector<NodeState> node_states;  // s_i(T)
    double debtrank_excl = 0.0;          // distress caused beyond the initial shock
    double debtrank_incl = 0.0;          // total distress including the initial shock
    std::size_t rounds = 0;              // T, the index of the final time step
};

// Throws InputError on a dimension mismatch or a non-positive equity of a
// present bank. Columns of banks marked absent are zero.
ImpactMatrix impact_matrix(const Matrix& exposures, const BankRegistry& registry);
ImpactMatrix impact_matrix(const ExposureLayer& layer, const BankRegistry& registry);

// v_i = sum_j X_ji / sum_jk X_jk, V = sum_jk X_jk.
// Throws DegenerateError ("degenerate layer") if the layer is all zero.
EconomicValue economic_value(const Matrix& exposures);
EconomicValue economic_value(const ExposureLayer& layer);

// Same as economic_value but an all-zero layer yields EconomicValue::zero.
EconomicValue economic_value_or_zero(const Matrix& exposures);

// Runs the synchronous DebtRank cascade from `seeds`, each starting at
// distress `psi`. Duplicate seeds are ignored. Throws InputError for an empty
// seed set, an out-of-range seed, psi outside [0,1] or mismatched sizes.
DebtRankResult debtrank_run(const ImpactMatrix& impact, const EconomicValue& value,
                            std::span<const std::size_t> seeds, double psi = 1.0);

// Distress vectors h(1), ..., h(T) of the cascade debtrank_run performs.
std::vector<std::vector<double>> debtrank_trace(const ImpactMatrix& impact, const EconomicValue& value,
                                                std::span<const std::size_t> seeds, double psi = 1.0);

// One debtrank_run per bank, seeded with that bank alone.
std::vector<DebtRankResult> debtrank_all_singletons(const ImpactMatrix& impact,
                                                    const EconomicValue& value, double psi = 1.0);

}  // namespace sysrisk
