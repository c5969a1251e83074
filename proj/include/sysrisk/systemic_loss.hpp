#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sysrisk/model.hpp"
#include "sysrisk/multilayer.hpp"

namespace sysrisk {

enum class LossMethod { Exact, Approximate };

struct ExpectedLossResult {
    double value = 0.0;
    LossMethod method = LossMethod::Approximate;
    std::uint64_t terms_evaluated = 0;
    double total_value = 0.0;  // V used for scaling
    double weight_sum = 1.0;   // sum of scenario probabilities (exact method)
};

inline constexpr std::size_t kDefaultExactBankLimit = 16;

// Expected systemic loss by full enumeration of default scenarios:
//
//   EL = V * sum_{S subset of B} prod_{i in S} p_i prod_{j not in S} (1 - p_j) R_S
//
// with R_S the DebtRank of S including initial distress and R_empty = 0.
// Throws LimitError when the layer has more than `max_banks` banks.
ExpectedLossResult expected_loss_exact(const RiskLayer& layer, const BankRegistry& registry,
                                       double psi = 1.0, std::size_t max_banks = kDefaultExactBankLimit);

// First-order approximation EL ~ V * sum_i p_i R_i over single-bank DebtRanks
// (initial distress included).
ExpectedLossResult expected_loss_approx(const RiskLayer& layer, const BankRegistry& registry,
                                        double psi = 1.0);

struct MarginalExposureRecord {
    std::string from_bank;  // k, the debtor
    std::string to_bank;    // l, the creditor
    std::string layer;
    bool self_impact = false;
    double exposure_size = 0.0;
    double delta_el = 0.0;
};

// Returns a copy of `network` with entry (k, l) of `layer` set to `amount`,
// with that layer's economic values and the combined layer rebuilt.
MultiLayerNetwork with_exposure(const MultiLayerNetwork& network, std::string_view layer, std::size_t k,
                                std::size_t l, double amount);

// Change in approximate expected systemic loss from adding `delta` to the
// exposure (k, l) of `layer`, evaluated on the combined network:
//
//   dEL = sum_i p_i [V(X + dX) R_i(X + dX) - V(X) R_i(X)]
//
// Throws InputError for unknown banks or layer, or a negative delta.
MarginalExposureRecord marginal_exposure_loss(const MultiLayerNetwork& network, const BankRegistry& registry,
                                              std::size_t k, std::size_t l, std::string_view layer,
                                              double delta, double psi = 1.0);
MarginalExposureRecord marginal_exposure_loss(const MultiLayerNetwork& network, const BankRegistry& registry,
                                              std::string_view from_bank, std::string_view to_bank,
                                              std::string_view layer, double delta, double psi = 1.0);

// One record per nonzero exposure of every layer (OP diagonal entries
// included as self-impact): the marginal loss of adding that exposure to the
// network from which it has been removed. Ordered by layer, then row-major.
// Records are independent and computed on up to `threads` workers (0: all
// cores); the result does not depend on the thread count.
std::vector<MarginalExposureRecord> marginal_scan(const MultiLayerNetwork& network,
                                                  const BankRegistry& registry, double psi = 1.0,
                                                  unsigned threads = 1);

}  // namespace sysrisk
