#include "sysrisk/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sysrisk/error.hpp"

namespace sysrisk {

namespace {

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    for (char c : text)
        if (c < '0' || c > '9') return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

void add(std::vector<ValidationIssue>& list, std::string invariant, std::string location) {
    list.push_back({std::move(invariant), std::move(location)});
}

void validate_layer(const ExposureLayer& layer, const BankRegistry& registry,
                    ValidationReport& report) {
    const auto where = "layer " + layer.name;
    if (layer.name.empty()) add(report.violations, "layer name non-empty", "layer #?");
    if (layer.name == kOverlapLayer || layer.name == kCombinedLayer)
        add(report.violations, "direct layer name not reserved (OP, comb)", where);
    const auto& m = layer.matrix;
    if (m.rows() != registry.size() || m.cols() != registry.size()) {
        add(report.violations, "layer dimensions match bank registry", where);
        return;
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double x = m(i, j);
            if (!std::isfinite(x) || x < 0.0) {
                add(report.violations, "exposure nonnegative and finite",
                    where + " debtor " + registry.bank_ids[i] + " creditor " + registry.bank_ids[j]);
            } else if (i == j && x != 0.0) {
                add(report.violations, "direct layer diagonal zero",
                    where + " bank " + registry.bank_ids[i]);
            }
        }
    }
}

void validate_holdings(const HoldingsSnapshot& h, const BankRegistry& registry,
                       ValidationReport& report) {
    if (h.shares.rows() != registry.size() || h.shares.cols() != h.asset_ids.size() ||
        h.outstanding.size() != h.asset_ids.size() || h.price.size() != h.asset_ids.size()) {
        add(report.violations, "holdings dimensions match banks and assets", "holdings");
        return;
    }
    std::unordered_set<std::string> seen;
    for (std::size_t a = 0; a < h.assets(); ++a) {
        const auto& id = h.asset_ids[a];
        const auto where = "asset " + id;
        if (id.empty()) add(report.violations, "asset_id non-empty", "asset #" + std::to_string(a));
        if (!seen.insert(id).second) add(report.violations, "asset_id unique", where);
        if (!(std::isfinite(h.outstanding[a]) && h.outstanding[a] > 0.0))
            add(report.violations, "outstanding strictly positive", where);
        if (!(std::isfinite(h.price[a]) && h.price[a] > 0.0))
            add(report.violations, "price strictly positive", where);

        double held = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < h.banks(); ++i) {
            const double s = h.shares(i, a);
            if (!std::isfinite(s) || s < 0.0) {
                add(report.violations, "shares nonnegative and finite",
                    where + " bank " + registry.bank_ids[i]);
                continue;
            }
            held += s;
            any = any || s > 0.0;
        }
        if (held > h.outstanding[a])
            add(report.violations, "over-holding: total shares held exceed outstanding", where);
        if (!any) add(report.flags, "inert asset: held by no bank", where);
    }
}

}  // namespace

Date parse_date(std::string_view text) {
    int y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d)) {
        throw InputError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw InputError("invalid calendar date '" + std::string(text) + "'");
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::optional<std::size_t> BankRegistry::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < bank_ids.size(); ++i)
        if (bank_ids[i] == id) return i;
    return std::nullopt;
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& v : violations) out << "violation: " << v.invariant << " (" << v.location << ")\n";
    for (const auto& f : flags) out << "flag: " << f.invariant << " (" << f.location << ")\n";
    return out.str();
}

ValidationReport validate_snapshot(const SystemSnapshot& snapshot) {
    ValidationReport report;
    const auto& reg = snapshot.registry;
    const std::size_t b = reg.size();

    if (reg.equity.size() != b || reg.default_probability.size() != b ||
        (!reg.absent.empty() && reg.absent.size() != b)) {
        add(report.violations, "registry columns have equal length", "registry");
        return report;
    }

    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < b; ++i) {
        const auto& id = reg.bank_ids[i];
        const auto where = "bank " + (id.empty() ? "#" + std::to_string(i) : id);
        if (id.empty()) add(report.violations, "bank_id non-empty", where);
        if (!ids.insert(id).second) add(report.violations, "bank_id unique", where);
        if (reg.is_absent(i)) {
            add(report.flags, "bank absent from this snapshot (inserted by alignment)", where);
            continue;
        }
        if (!(std::isfinite(reg.equity[i]) && reg.equity[i] > 0.0))
            add(report.violations, "equity strictly positive", where);
        const double p = reg.default_probability[i];
        if (!(p >= 0.0 && p <= 1.0)) add(report.violations, "default_probability in [0,1]", where);
    }

    if (!snapshot.holdings && snapshot.direct_layers.empty())
        add(report.violations, "at least one of holdings or direct layers present", "snapshot");

    if (snapshot.holdings) validate_holdings(*snapshot.holdings, reg, report);

    std::set<std::string> names;
    for (const auto& layer : snapshot.direct_layers) {
        if (!names.insert(layer.name).second)
            add(report.violations, "layer name unique", "layer " + layer.name);
        validate_layer(layer, reg, report);
    }
    return report;
}

void require_valid(const SystemSnapshot& snapshot) {
    const auto report = validate_snapshot(snapshot);
    if (!report.ok())
        throw InputError("invalid snapshot " + format_date(snapshot.date) + ":\n" + report.to_string());
}

std::vector<SystemSnapshot> align_banks(const std::vector<SystemSnapshot>& snapshots) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::size_t> position;
    for (const auto& snap : snapshots) {
        std::unordered_set<std::string> local;
        for (const auto& id : snap.registry.bank_ids) {
            if (!local.insert(id).second)
                throw InputError("duplicate bank_id '" + id + "' in snapshot " + format_date(snap.date));
            if (position.emplace(id, order.size()).second) order.push_back(id);
        }
    }

    const std::size_t n = order.size();
    std::vector<SystemSnapshot> out;
    out.reserve(snapshots.size());
    for (const auto& snap : snapshots) {
        const auto& src = snap.registry;
        if (src.equity.size() != src.size() || src.default_probability.size() != src.size() ||
            (snap.holdings && snap.holdings->banks() != src.size()))
            throw InputError("snapshot " + format_date(snap.date) + " is not internally consistent");
        for (const auto& layer : snap.direct_layers)
            if (layer.matrix.rows() != src.size() || layer.matrix.cols() != src.size())
                throw InputError("layer " + layer.name + " does not match the bank registry");
        // map[k] = new index of old bank k
        std::vector<std::size_t> map(src.size());
        for (std::size_t k = 0; k < src.size(); ++k) map[k] = position.at(src.bank_ids[k]);

        SystemSnapshot dst;
        dst.date = snap.date;
        dst.metadata = snap.metadata;
        dst.registry.bank_ids = order;
        dst.registry.equity.assign(n, 0.0);
        dst.registry.default_probability.assign(n, 0.0);
        dst.registry.absent.assign(n, true);
        for (std::size_t k = 0; k < src.size(); ++k) {
            dst.registry.equity[map[k]] = src.equity[k];
            dst.registry.default_probability[map[k]] = src.default_probability[k];
            dst.registry.absent[map[k]] = src.is_absent(k);
        }
        bool any_absent = false;
        for (bool a : dst.registry.absent) any_absent = any_absent || a;
        if (!any_absent) dst.registry.absent.clear();

        if (snap.holdings) {
            const auto& h = *snap.holdings;
            HoldingsSnapshot nh{h.asset_ids, Matrix(n, h.assets()), h.outstanding, h.price};
            for (std::size_t k = 0; k < h.banks(); ++k)
                for (std::size_t a = 0; a < h.assets(); ++a) nh.shares(map[k], a) = h.shares(k, a);
            dst.holdings = std::move(nh);
        }
        for (const auto& layer : snap.direct_layers) {
            ExposureLayer nl{layer.name, Matrix(n, n)};
            for (std::size_t i = 0; i < layer.matrix.rows(); ++i)
                for (std::size_t j = 0; j < layer.matrix.cols(); ++j)
                    nl.matrix(map[i], map[j]) = layer.matrix(i, j);
            dst.direct_layers.push_back(std::move(nl));
        }
        out.push_back(std::move(dst));
    }
    return out;
}

}  // namespace sysrisk
