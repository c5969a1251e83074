#include "sysrisk/overlap.hpp"

#include <cmath>
#include <string>

#include "sysrisk/error.hpp"

namespace sysrisk {

namespace {

void check_shapes(const HoldingsSnapshot& h) {
    if (h.shares.cols() != h.assets() || h.outstanding.size() != h.assets() || h.price.size() != h.assets())
        throw InputError("holdings: share matrix, outstanding and price sizes disagree");
    for (std::size_t a = 0; a < h.assets(); ++a)
        if (!(h.outstanding[a] > 0.0))
            throw InputError("holdings: outstanding shares of asset '" + h.asset_ids[a] + "' must be positive");
}

}  // namespace

AssetImpactMatrix linear_impact(const HoldingsSnapshot& holdings) {
    check_shapes(holdings);
    AssetImpactMatrix out{Matrix(holdings.banks(), holdings.assets()), ImpactMode::Linear, {}};
    for (std::size_t i = 0; i < holdings.banks(); ++i)
        for (std::size_t a = 0; a < holdings.assets(); ++a)
            out.entries(i, a) = holdings.shares(i, a) / holdings.outstanding[a];
    return out;
}

double price_after_sale(double sold_fraction, double alpha) {
    if (!(sold_fraction >= 0.0)) throw InputError("price_after_sale: sold fraction must be nonnegative");
    if (!(alpha > 0.0)) throw InputError("price_after_sale: alpha must be positive");
    if (sold_fraction == 0.0) return 1.0;
    return std::exp(-alpha * sold_fraction);
}

double calibrate_alpha(double sold_fraction, double price_drop) {
    if (!(sold_fraction > 0.0 && sold_fraction <= 1.0))
        throw InputError("calibrate_alpha: sold fraction must lie in (0,1]");
    if (!(price_drop > 0.0 && price_drop < 1.0))
        throw InputError("calibrate_alpha: price drop must lie in (0,1)");
    return -std::log1p(-price_drop) / sold_fraction;
}

AssetImpactMatrix absorption_impact(const HoldingsSnapshot& holdings, double alpha) {
    const std::vector<double> per_asset(holdings.assets(), alpha);
    return absorption_impact(holdings, per_asset);
}

AssetImpactMatrix absorption_impact(const HoldingsSnapshot& holdings, std::span<const double> alpha) {
    check_shapes(holdings);
    if (alpha.size() != holdings.assets())
        throw InputError("absorption_impact: expected one alpha per asset");
    for (double a : alpha)
        if (!(a > 0.0 && std::isfinite(a))) throw InputError("absorption_impact: alpha must be positive");

    AssetImpactMatrix out{Matrix(holdings.banks(), holdings.assets()), ImpactMode::Absorption,
                          std::vector<double>(alpha.begin(), alpha.end())};
    for (std::size_t i = 0; i < holdings.banks(); ++i)
        for (std::size_t a = 0; a < holdings.assets(); ++a)
            out.entries(i, a) = -std::expm1(-alpha[a] * (holdings.shares(i, a) / holdings.outstanding[a]));
    return out;
}

ExposureLayer indirect_exposures(const HoldingsSnapshot& holdings, const AssetImpactMatrix& impact) {
    check_shapes(holdings);
    const std::size_t b = holdings.banks();
    const std::size_t m = holdings.assets();
    if (impact.entries.rows() != b || impact.entries.cols() != m)
        throw InputError("indirect_exposures: impact matrix does not match holdings");

    ExposureLayer layer{std::string(kOverlapLayer), Matrix(b, b)};
    // Fixed summation order over assets keeps results bit-stable.
    for (std::size_t i = 0; i < b; ++i) {
        const auto impact_i = impact.entries.row(i);
        auto out = layer.matrix.row(i);
        for (std::size_t j = 0; j < b; ++j) {
            const auto held_j = holdings.shares.row(j);
            double x = 0.0;
            for (std::size_t a = 0; a < m; ++a) x += impact_i[a] * holdings.price[a] * held_j[a];
            out[j] = x;
        }
    }
    return layer;
}

EconomicValue op_economic_value(const HoldingsSnapshot& holdings) {
    check_shapes(holdings);
    EconomicValue ev{std::vector<double>(holdings.banks(), 0.0), 0.0};
    for (std::size_t i = 0; i < holdings.banks(); ++i) {
        const auto row = holdings.shares.row(i);
        double value = 0.0;
        for (std::size_t a = 0; a < holdings.assets(); ++a) value += holdings.price[a] * row[a];
        ev.share[i] = value;
        ev.total += value;
    }
    if (!(ev.total > 0.0)) throw DegenerateError("op_economic_value: degenerate holdings (no positive holding)");
    for (double& v : ev.share) v /= ev.total;
    return ev;
}

}  // namespace sysrisk
