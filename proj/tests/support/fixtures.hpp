#pragma once

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sysrisk/matrix.hpp"
#include "sysrisk/model.hpp"

namespace fixture {

inline sysrisk::Matrix to_matrix(const oracle::Grid& g) {
    sysrisk::Matrix m(g.size(), g.empty() ? 0 : g.front().size());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = g[i][j];
    return m;
}

inline oracle::Grid to_grid(const sysrisk::Matrix& m) {
    oracle::Grid g(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
    return g;
}

inline std::vector<std::string> bank_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("B" + std::to_string(i + 1));
    return ids;
}

inline sysrisk::BankRegistry registry(std::vector<double> equity, std::vector<double> p = {}) {
    sysrisk::BankRegistry r;
    r.bank_ids = bank_ids(equity.size());
    if (p.empty()) p.assign(equity.size(), 0.0);
    r.equity = std::move(equity);
    r.default_probability = std::move(p);
    return r;
}

// Random direct exposure network: each ordered pair linked with probability
// `density`, amounts and equities log-uniform over a few decades.
struct RandomNetwork {
    oracle::Grid x;
    std::vector<double> equity;
};

inline RandomNetwork random_network(std::mt19937_64& rng, std::size_t n, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomNetwork net{oracle::Grid(n, std::vector<double>(n, 0.0)), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && u(rng) < density) net.x[i][j] = std::pow(10.0, 1.0 + 2.0 * u(rng));
    for (auto& c : net.equity) c = std::pow(10.0, 1.5 + 2.0 * u(rng));
    // Guarantee a nonzero layer.
    if (n > 1) net.x[0][1] += 1.0;
    return net;
}

// Random holdings with `b` banks and `m` assets, roughly `density` of cells held.
inline sysrisk::HoldingsSnapshot random_holdings(std::mt19937_64& rng, std::size_t b, std::size_t m,
                                                 double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    sysrisk::HoldingsSnapshot h;
    h.shares = sysrisk::Matrix(b, m);
    for (std::size_t a = 0; a < m; ++a) {
        h.asset_ids.push_back("S" + std::to_string(a + 1));
        const double n = std::floor(std::pow(10.0, 3.0 + 3.0 * u(rng)));
        h.outstanding.push_back(n);
        h.price.push_back(std::pow(10.0, 2.0 * u(rng)));
        double budget = (0.2 + 0.7 * u(rng)) * n;
        for (std::size_t i = 0; i < b; ++i) {
            if (u(rng) >= density) continue;
            const double s = std::floor(budget * u(rng));
            h.shares(i, a) = s;
            budget -= s;
        }
    }
    h.shares(0, 0) = std::max(h.shares(0, 0), 1.0);
    return h;
}

}  // namespace fixture
