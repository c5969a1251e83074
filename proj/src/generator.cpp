#include "sysrisk/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "sysrisk/error.hpp"

namespace sysrisk {

namespace {

// std distributions are implementation-defined; transform the engine's raw
// output directly so that streams match across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * n)); }

private:
    std::mt19937_64 engine_;
};

std::string make_id(char prefix, std::size_t i, std::size_t count, int min_width) {
    int digits = 1;
    for (std::size_t c = count; c >= 10; c /= 10) ++digits;
    const int width = std::max(min_width, digits);
    auto digits_text = std::to_string(i + 1);
    if (static_cast<int>(digits_text.size()) < width)
        digits_text.insert(0, static_cast<std::size_t>(width) - digits_text.size(), '0');
    return prefix + digits_text;
}

struct Base {
    std::vector<double> weight;
    Matrix shares;
    std::vector<double> outstanding;
    std::vector<double> price;
    std::vector<Matrix> layers;
    std::vector<double> probability;
};

std::vector<std::pair<std::size_t, std::size_t>> pick_cells(const GeneratorConfig& cfg,
                                                             const std::vector<double>& weight, Rng& rng) {
    const std::size_t b = cfg.banks;
    const std::size_t m = cfg.assets;
    const auto cells = static_cast<std::size_t>(std::llround(cfg.holdings_density * double(b) * double(m)));

    std::vector<bool> taken(b * m, false);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    // Give every asset one holder first, drawn by bank size, when the budget allows.
    if (cells >= m) {
        const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
        for (std::size_t a = 0; a < m; ++a) {
            double target = rng.uniform() * total;
            std::size_t i = 0;
            while (i + 1 < b && target >= weight[i]) target -= weight[i++];
            taken[i * m + a] = true;
            chosen.emplace_back(i, a);
        }
    }
    std::vector<std::size_t> free;
    for (std::size_t c = 0; c < b * m; ++c)
        if (!taken[c]) free.push_back(c);
    // Partial Fisher-Yates over the remaining cells.
    const std::size_t extra = cells - chosen.size();
    for (std::size_t k = 0; k < extra; ++k) {
        const std::size_t pick = k + rng.index(free.size() - k);
        std::swap(free[k], free[pick]);
        chosen.emplace_back(free[k] / m, free[k] % m);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

Base make_base(const GeneratorConfig& cfg, Rng& rng) {
    const std::size_t b = cfg.banks;
    const std::size_t m = cfg.assets;
    Base base;

    base.weight.resize(b);
    for (auto& w : base.weight) w = std::pow(1.0 - rng.uniform(), -1.0 / cfg.tail_exponent);

    base.outstanding.resize(m);
    base.price.resize(m);
    for (std::size_t a = 0; a < m; ++a) {
        base.outstanding[a] = std::floor(std::pow(10.0, 5.0 + 2.0 * rng.uniform()));
        base.price[a] = std::pow(10.0, 3.0 * rng.uniform());
    }

    base.shares = Matrix(b, m);
    const auto cells = pick_cells(cfg, base.weight, rng);
    std::vector<std::vector<std::size_t>> holders(m);
    for (const auto& [i, a] : cells) holders[a].push_back(i);
    for (std::size_t a = 0; a < m; ++a) {
        if (holders[a].empty()) continue;
        const double held = (0.3 + 0.6 * rng.uniform()) * base.outstanding[a];
        std::vector<double> w;
        for (std::size_t i : holders[a]) w.push_back(base.weight[i] * (0.5 + rng.uniform()));
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        for (std::size_t k = 0; k < holders[a].size(); ++k)
            base.shares(holders[a][k], a) = std::max(1.0, std::floor(held * w[k] / total));
    }

    std::vector<double> portfolio(b, 0.0);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t a = 0; a < m; ++a) portfolio[i] += base.price[a] * base.shares(i, a);
    const double mean_portfolio = std::accumulate(portfolio.begin(), portfolio.end(), 0.0) / double(b);

    std::size_t active_layers = 0;
    for (const auto& [name, d] : cfg.direct_density) active_layers += d > 0.0 ? 1 : 0;
    for (const auto& [name, density] : cfg.direct_density) {
        Matrix x(b, b);
        const double per_bank = std::max(1.0, density * double(b - 1)) * double(std::max<std::size_t>(1, active_layers));
        for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t j = 0; j < b; ++j) {
                if (i == j) continue;
                const double u = rng.uniform();
                if (!(u < density)) continue;
                const double size_i = portfolio[i] + 0.01 * mean_portfolio;
                const double size_j = portfolio[j] + 0.01 * mean_portfolio;
                x(i, j) = cfg.direct_scale * std::sqrt(size_i * size_j) * (0.5 + rng.uniform()) / per_bank;
            }
        }
        base.layers.push_back(std::move(x));
    }

    base.probability.resize(b);
    for (auto& p : base.probability) p = cfg.p_min + (cfg.p_max - cfg.p_min) * rng.uniform();
    return base;
}

SystemSnapshot make_snapshot(const GeneratorConfig& cfg, const Base& base, const Matrix& shares,
                             const std::vector<double>& price, const std::vector<Matrix>& layers, const Date& date) {
    const std::size_t b = cfg.banks;
    const std::size_t m = cfg.assets;
    SystemSnapshot s;
    s.date = date;
    s.metadata["currency"] = cfg.currency;
    s.metadata["exposure_basis"] = "gross";

    auto& reg = s.registry;
    for (std::size_t i = 0; i < b; ++i) reg.bank_ids.push_back(make_id('B', i, b, 3));
    reg.default_probability = base.probability;

    HoldingsSnapshot h;
    for (std::size_t a = 0; a < m; ++a) h.asset_ids.push_back(make_id('S', a, m, 4));
    h.shares = shares;
    h.outstanding = base.outstanding;
    h.price = price;

    // Equity is a fixed fraction of total assets: portfolio plus interbank claims.
    std::vector<double> assets(b, 0.0);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t a = 0; a < m; ++a) assets[i] += price[a] * shares(i, a);
    for (std::size_t k = 0; k < layers.size(); ++k) {
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < b; ++j) assets[j] += layers[k](i, j);
        s.direct_layers.push_back({cfg.direct_density[k].first, layers[k]});
    }
    const double mean_assets = std::accumulate(assets.begin(), assets.end(), 0.0) / double(b);
    reg.equity.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
        const double a = assets[i] > 0.0 ? assets[i] : mean_assets;
        reg.equity[i] = a > 0.0 ? cfg.equity_scale * a : 1.0;
    }
    s.holdings = std::move(h);
    return s;
}

}  // namespace

void validate_config(const GeneratorConfig& cfg) {
    if (cfg.banks == 0 || cfg.assets == 0) throw InputError("generator: banks and assets must be positive");
    if (!(cfg.holdings_density > 0.0 && cfg.holdings_density <= 1.0))
        throw InputError("generator: holdings density must lie in (0,1]");
    if (std::llround(cfg.holdings_density * double(cfg.banks) * double(cfg.assets)) < 1)
        throw InputError("generator: holdings density too small to place a single holding");
    if (!(cfg.tail_exponent > 0.0)) throw InputError("generator: tail exponent must be positive");
    std::set<std::string> names;
    for (const auto& [name, d] : cfg.direct_density) {
        if (!(d >= 0.0 && d <= 1.0)) throw InputError("generator: density of layer '" + name + "' must lie in [0,1]");
        if (name.empty() || name == kOverlapLayer || name == kCombinedLayer || name == kDirectLayer ||
            !names.insert(name).second)
            throw InputError("generator: invalid or duplicate layer name '" + name + "'");
    }
    if (!(cfg.direct_scale >= 0.0)) throw InputError("generator: direct scale must be nonnegative");
    if (!(cfg.equity_scale > 0.0)) throw InputError("generator: equity scale must be positive");
    if (!(cfg.p_min >= 0.0 && cfg.p_min <= cfg.p_max && cfg.p_max <= 1.0))
        throw InputError("generator: default probabilities need 0 <= p_min <= p_max <= 1");
    if (cfg.dates == 0) throw InputError("generator: at least one date required");
    if (cfg.step_days < 1) throw InputError("generator: step must be at least one day");
    if (!cfg.start_date.ok()) throw InputError("generator: invalid start date");
}

SystemSnapshot generate_synthetic(const GeneratorConfig& config) {
    auto single = config;
    single.dates = 1;
    return generate_series(single).front();
}

std::vector<SystemSnapshot> generate_series(const GeneratorConfig& config) {
    validate_config(config);
    Rng rng(config.seed);
    const Base base = make_base(config, rng);

    std::vector<SystemSnapshot> out;
    std::vector<double> price = base.price;
    const std::chrono::sys_days start{config.start_date};
    for (std::size_t t = 0; t < config.dates; ++t) {
        const Date date{start + std::chrono::days{static_cast<long>(t) * config.step_days}};
        if (t == 0) {
            out.push_back(make_snapshot(config, base, base.shares, price, base.layers, date));
            continue;
        }
        // Drift: holdings shrink by up to 15% (keeps total holdings within
        // outstanding), prices random-walk, exposures vary +-20%.
        Matrix shares = base.shares;
        for (auto& s : shares.data())
            if (s > 0.0) s = std::max(1.0, std::floor(s * (0.85 + 0.15 * rng.uniform())));
        for (auto& p : price) p *= std::exp(0.05 * (2.0 * rng.uniform() - 1.0));
        std::vector<Matrix> layers = base.layers;
        for (auto& layer : layers)
            for (auto& x : layer.data())
                if (x > 0.0) x *= 0.8 + 0.4 * rng.uniform();
        out.push_back(make_snapshot(config, base, shares, price, layers, date));
    }
    return out;
}

}  // namespace sysrisk
