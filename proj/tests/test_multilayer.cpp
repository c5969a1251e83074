#include <algorithm>
#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "sysrisk/error.hpp"
#include "sysrisk/multilayer.hpp"

using namespace sysrisk;
using doctest::Approx;

namespace {

SystemSnapshot random_snapshot(std::mt19937_64& rng, std::size_t b, std::size_t m) {
    SystemSnapshot s;
    s.date = parse_date("2014-06-30");
    const auto dl = fixture::random_network(rng, b, 0.3);
    const auto fx = fixture::random_network(rng, b, 0.2);
    std::vector<double> p(b);
    std::uniform_real_distribution<double> u(0.001, 0.05);
    for (auto& e : p) e = u(rng);
    s.registry = fixture::registry(dl.equity, p);
    s.holdings = fixture::random_holdings(rng, b, m, 0.4);
    s.direct_layers = {{"DL", fixture::to_matrix(dl.x)}, {"FX", fixture::to_matrix(fx.x)}};
    return s;
}

const ProfileRow& row_of(const SRProfile& p, std::string_view id) {
    return *std::find_if(p.rows.begin(), p.rows.end(), [&](const ProfileRow& r) { return r.bank_id == id; });
}

}  // namespace

TEST_CASE("combine_layers: examples") {
    const auto a = fixture::to_matrix({{0, 5, 0}, {0, 0, 0}, {2, 0, 0}});
    const auto b = fixture::to_matrix({{0, 0, 0}, {0, 0, 7}, {0, 0, 0}});

    SUBCASE("single layer is the identity") {
        const auto net = combine_layers(fixture::bank_ids(3), {RiskLayer::from_exposures("DL", a)});
        CHECK(net.combined.exposures == a);
        CHECK(net.combined.value == net.layers[0].value);
        CHECK(net.combined.name == "comb");
    }
    SUBCASE("disjoint supports are united") {
        const auto net = combine_layers(fixture::bank_ids(3),
                                        {RiskLayer::from_exposures("DL", a), RiskLayer::from_exposures("FX", b)});
        CHECK(net.combined.exposures(0, 1) == 5.0);
        CHECK(net.combined.exposures(2, 0) == 2.0);
        CHECK(net.combined.exposures(1, 2) == 7.0);
        CHECK(net.combined.value.total == 14.0);
        CHECK(net.find("FX") == &net.layers[1]);
        CHECK(net.find("comb") == &net.combined);
        CHECK(net.layer_index("DL") == 0u);
        CHECK_FALSE(net.layer_index("OP"));
    }
    SUBCASE("blended values match the summed exposures for exposure-valued layers") {
        const auto net = combine_layers(fixture::bank_ids(3),
                                        {RiskLayer::from_exposures("DL", a), RiskLayer::from_exposures("FX", b)});
        const auto direct = economic_value(net.combined.exposures);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(net.combined.value.share[i] == Approx(direct.share[i]).epsilon(1e-15));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(combine_layers(fixture::bank_ids(2), {RiskLayer::from_exposures("DL", a)}), InputError);
        CHECK_THROWS_AS(combine_layers(fixture::bank_ids(3),
                                       {RiskLayer::from_exposures("DL", a), RiskLayer::from_exposures("DL", b)}),
                        InputError);
    }
}

TEST_CASE("normalized_debtrank: examples") {
    const std::vector<double> r{0.4, 0.1, 0.0};
    CHECK(normalized_debtrank(r, 10.0, 10.0) == r);
    CHECK(normalized_debtrank(r, 0.0, 10.0) == std::vector<double>{0.0, 0.0, 0.0});
    const std::vector<double> half{0.4, 0.4};
    for (double e : normalized_debtrank(half, 5.0, 10.0)) CHECK(e == Approx(0.2).epsilon(1e-15));
    CHECK_THROWS_AS(normalized_debtrank(r, 0.0, 0.0), DegenerateError);
}

TEST_CASE("average_debtrank: examples") {
    const std::vector<double> same(7, 0.3);
    CHECK(average_debtrank(same) == Approx(0.3).epsilon(1e-15));
    const std::vector<double> two{0.0, 1.0};
    CHECK(average_debtrank(two) == 0.5);
    CHECK_THROWS_AS(average_debtrank(std::vector<double>{}), InputError);
}

TEST_CASE("sr_profile: OP only reduces to the single layer") {
    std::mt19937_64 rng(41);
    auto s = random_snapshot(rng, 6, 8);
    s.direct_layers.clear();
    const auto net = build_network(s, {});
    const auto profile = sr_profile(net, s.registry);
    REQUIRE(profile.layer_names == std::vector<std::string>{"direct", "OP"});
    for (const auto& row : profile.rows) {
        CHECK(row.r_hat[0] == 0.0);
        CHECK(row.r_hat[1] == Approx(row.r_comb).epsilon(1e-12));
    }
}

TEST_CASE("sr_profile: isolated banks only count their own distress") {
    const auto x = fixture::to_matrix({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    auto layer = RiskLayer::from_exposures("DL", x);
    layer.value = EconomicValue{{0.5, 0.3, 0.2}, 10.0};
    const auto net = combine_layers(fixture::bank_ids(3), {layer});
    const auto profile = sr_profile(net, fixture::registry({1, 1, 1}), 0.5);
    for (const auto& row : profile.rows) {
        CHECK(row.r_comb_excl == 0.0);
        CHECK(row.r_comb == Approx(0.5 * layer.value.share[row.bank_index]).epsilon(1e-15));
    }
    CHECK(profile.rows.front().bank_id == "B1");
    CHECK(profile.rows.back().bank_id == "B3");
}

TEST_CASE("sr_profile: ties are ordered by bank id") {
    const auto net = combine_layers(fixture::bank_ids(3), {RiskLayer::from_exposures("DL", Matrix(3, 3))});
    const auto profile = sr_profile(net, fixture::registry({1, 1, 1}));
    CHECK(profile.rows[0].bank_id == "B1");
    CHECK(profile.rows[1].bank_id == "B2");
    CHECK(profile.rows[2].bank_id == "B3");
}

TEST_CASE("sr_profile matches independent per-bank cascades") {
    std::mt19937_64 rng(43);
    const auto s = random_snapshot(rng, 10, 15);
    const auto net = build_network(s, NetworkOptions{ImpactMode::Linear, 0.0, {}, {"DL", "FX", "OP"}});
    const double psi = 0.8;
    const auto profile = sr_profile(net, s.registry, psi);
    REQUIRE(profile.rows.size() == 10);

    for (std::size_t r = 1; r < profile.rows.size(); ++r)
        CHECK(profile.rows[r - 1].r_comb >= profile.rows[r].r_comb);

    const auto reference = [&](const RiskLayer& layer, std::size_t i) {
        const auto w = oracle::impact(fixture::to_grid(layer.exposures), s.registry.equity);
        return oracle::debtrank(w, layer.value.share, {i}, psi);
    };
    const double v_comb = net.combined.value.total;
    for (const auto& row : profile.rows) {
        const auto comb = reference(net.combined, row.bank_index);
        CHECK(row.r_comb == Approx(comb.incl).epsilon(1e-12));
        CHECK(row.r_comb_excl == Approx(comb.excl).epsilon(1e-12));
        for (std::size_t a = 0; a < net.layers.size(); ++a) {
            const auto& layer = net.layers[a];
            const auto one = reference(layer, row.bank_index);
            CHECK(row.r_hat[a] == Approx(layer.value.total / v_comb * one.incl).epsilon(1e-12));
            CHECK(row.r_hat_excl[a] == Approx(layer.value.total / v_comb * one.excl).epsilon(1e-12));
        }
    }

    const auto avg = average_profile(profile, s.registry);
    double mean = 0.0;
    for (const auto& row : profile.rows) mean += row.r_comb;
    CHECK(avg.combined == Approx(mean / 10.0).epsilon(1e-12));
    REQUIRE(avg.per_layer.size() == 3);
}

TEST_CASE("sr_profile: properties") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = random_snapshot(rng, 3 + trial % 8, 5);
        const auto net = build_network(s, {});
        const auto profile = sr_profile(net, s.registry);

        // Default probabilities do not enter the profile.
        auto other = s.registry;
        for (auto& p : other.default_probability) p = 0.5;
        const auto same = sr_profile(net, other);
        for (std::size_t r = 0; r < profile.rows.size(); ++r) {
            CHECK(same.rows[r].bank_id == profile.rows[r].bank_id);
            CHECK(same.rows[r].r_comb == profile.rows[r].r_comb);
        }

        for (const auto& row : profile.rows) {
            CHECK(row.r_comb >= 0.0);
            CHECK(row.r_comb <= 1.0);
            for (double h : row.r_hat) CHECK(h >= 0.0);
        }

        // Relabeling banks (reversing the order) permutes the profile.
        const std::size_t b = s.registry.size();
        SystemSnapshot rev = s;
        for (std::size_t i = 0; i < b; ++i) {
            const std::size_t k = b - 1 - i;
            rev.registry.bank_ids[k] = s.registry.bank_ids[i];
            rev.registry.equity[k] = s.registry.equity[i];
            rev.registry.default_probability[k] = s.registry.default_probability[i];
            for (std::size_t a = 0; a < s.holdings->asset_ids.size(); ++a)
                rev.holdings->shares(k, a) = s.holdings->shares(i, a);
            for (std::size_t l = 0; l < s.direct_layers.size(); ++l)
                for (std::size_t j = 0; j < b; ++j)
                    rev.direct_layers[l].matrix(k, b - 1 - j) = s.direct_layers[l].matrix(i, j);
        }
        const auto rprofile = sr_profile(build_network(rev, {}), rev.registry);
        for (const auto& row : profile.rows) {
            const auto& other_row = row_of(rprofile, row.bank_id);
            CHECK(other_row.r_comb == Approx(row.r_comb).epsilon(1e-12));
            for (std::size_t a = 0; a < row.r_hat.size(); ++a)
                CHECK(other_row.r_hat[a] == Approx(row.r_hat[a]).epsilon(1e-12));
        }
    }
}

TEST_CASE("average_profile excludes banks inserted by alignment") {
    std::mt19937_64 rng(53);
    auto a = random_snapshot(rng, 4, 5);
    auto b = a;
    b.registry.bank_ids[3] = "Z9";
    auto aligned = align_banks({a, b});
    const auto& reg = aligned[0].registry;
    REQUIRE(reg.size() == 5);
    REQUIRE(reg.is_absent(4));

    const auto profile = sr_profile(build_network(aligned[0], {}), reg);
    const auto avg = average_profile(profile, reg);
    double mean = 0.0;
    for (const auto& row : profile.rows)
        if (row.bank_id != "Z9") mean += row.r_comb;
    CHECK(avg.combined == Approx(mean / 4.0).epsilon(1e-12));
    CHECK(row_of(profile, "Z9").r_comb == 0.0);
}

TEST_CASE("build_network: layer selection") {
    std::mt19937_64 rng(59);
    const auto s = random_snapshot(rng, 5, 6);

    const auto both = build_network(s, {});
    REQUIRE(both.layers.size() == 2);
    CHECK(both.layers[0].name == "direct");
    CHECK(both.layers[0].exposures(0, 1) ==
          s.direct_layers[0].matrix(0, 1) + s.direct_layers[1].matrix(0, 1));
    CHECK(both.layers[1].source == RiskLayer::ValueSource::Holdings);

    const auto op = build_network(s, NetworkOptions{ImpactMode::Linear, 0.0, {}, {"OP"}});
    REQUIRE(op.layers.size() == 1);
    CHECK(op.combined.exposures == op.layers[0].exposures);

    const auto missing = build_network(s, NetworkOptions{ImpactMode::Linear, 0.0, {}, {"DL", "deri"}});
    CHECK(missing.layers[1].value.total == 0.0);

    const auto absorb = build_network(s, NetworkOptions{ImpactMode::Absorption, 1.0, {}, {"OP"}});
    CHECK(absorb.layers[0].value == op.layers[0].value);

    CHECK_THROWS_AS(build_network(s, NetworkOptions{ImpactMode::Linear, 0.0, {}, {"comb"}}), InputError);
    CHECK_THROWS_AS(build_network(s, NetworkOptions{ImpactMode::Linear, 0.0, {}, {"OP", "OP"}}), InputError);
    CHECK_THROWS_AS(build_network(s, NetworkOptions{ImpactMode::Linear, 0.0, {}, {"direct", "DL"}}), InputError);
    CHECK_THROWS_AS(build_network(s, NetworkOptions{ImpactMode::Linear, 0.0, {}, {}}), InputError);
    CHECK_THROWS_AS(build_network(s, NetworkOptions{ImpactMode::Absorption, 0.0, {}, {"OP"}}), InputError);
}
