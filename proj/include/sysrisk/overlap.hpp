#pragma once

#include <span>
#include <vector>

#include "sysrisk/debtrank.hpp"
#include "sysrisk/matrix.hpp"
#include "sysrisk/model.hpp"

namespace sysrisk {

enum class ImpactMode { Linear, Absorption };

// Bank x asset market impact. Linear: S_ia / N_a. Absorption:
// 1 - exp(-alpha_a * S_ia / N_a). `alpha` holds one entry per asset in
// absorption mode and is empty in linear mode.
struct AssetImpactMatrix {
    Matrix entries;
    ImpactMode mode = ImpactMode::Linear;
    std::vector<double> alpha;
};

AssetImpactMatrix linear_impact(const HoldingsSnapshot& holdings);

// Price multiplier exp(-alpha * x) after selling fraction x of an asset.
// Returns exactly 1 for x = 0. Throws InputError for x < 0 or alpha <= 0.
double price_after_sale(double sold_fraction, double alpha);

// alpha such that selling `sold_fraction` moves the price down by `price_drop`:
// alpha = -ln(1 - price_drop) / sold_fraction.
// Requires sold_fraction in (0,1] and price_drop in (0,1).
double calibrate_alpha(double sold_fraction, double price_drop);

AssetImpactMatrix absorption_impact(const HoldingsSnapshot& holdings, double alpha);
// Per-asset variant; `alpha` must have one positive entry per asset.
AssetImpactMatrix absorption_impact(const HoldingsSnapshot& holdings, std::span<const double> alpha);

// Indirect exposures through overlapping portfolios, in the library's
// orientation (entry (i, j) = loss of bank j when bank i liquidates):
//
//   X_ij = sum_a impact_ia * p_a * S_ja
//
// The diagonal is the self-inflicted liquidation loss. In linear mode the
// result is symmetric. Layer name is "OP".
ExposureLayer indirect_exposures(const HoldingsSnapshot& holdings, const AssetImpactMatrix& impact);

// v_i = sum_a p_a S_ia / V with V = sum_i sum_a p_a S_ia.
// Throws DegenerateError ("degenerate holdings") when V = 0.
EconomicValue op_economic_value(const HoldingsSnapshot& holdings);

}  // namespace sysrisk
