#include "sysrisk/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sysrisk/error.hpp"

namespace sysrisk {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::string kVersionLine = "# format-version: " + std::to_string(kFormatVersion);

struct Field {
    std::string text;
    std::size_t column;  // 1-based character column
};

struct Row {
    std::size_t line;
    std::vector<Field> fields;
};

struct Table {
    std::string file;
    std::vector<Row> rows;

    [[noreturn]] void fail(const Row& row, std::size_t field, const std::string& what) const {
        throw ParseError(file, row.line, row.fields[field].column, what);
    }

    double number(const Row& row, std::size_t field) const {
        const auto v = parse_number(row.fields[field].text);
        if (!v) fail(row, field, "expected a number, got '" + row.fields[field].text + "'");
        return *v;
    }

    Date date(const Row& row, std::size_t field) const {
        try {
            return parse_date(row.fields[field].text);
        } catch (const InputError& e) {
            fail(row, field, e.what());
        }
    }
};

std::vector<Field> split(const std::string& line) {
    std::vector<Field> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto end = comma == std::string::npos ? line.size() : comma;
        out.push_back({line.substr(start, end - start), start + 1});
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

Table read_table(const fs::path& path, const std::vector<std::string>& header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    Table table{path.string(), {}};

    std::string line;
    std::size_t number = 0;
    bool have_version = false;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_version) {
            if (line != kVersionLine)
                throw ParseError(table.file, number, 1, "expected '" + kVersionLine + "'");
            have_version = true;
            continue;
        }
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line);
        if (!have_header) {
            std::vector<std::string> names;
            for (const auto& f : fields) names.push_back(f.text);
            if (names != header) {
                std::string expected;
                for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
                throw ParseError(table.file, number, 1, "expected header '" + expected + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != header.size())
            throw ParseError(table.file, number, 1,
                             "expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        for (const auto& f : fields)
            if (f.text.empty()) throw ParseError(table.file, number, f.column, "empty field");
        table.rows.push_back({number, std::move(fields)});
    }
    if (!have_version) throw ParseError(table.file, 1, 1, "empty file; expected '" + kVersionLine + "'");
    if (!have_header) throw ParseError(table.file, number + 1, 1, "missing header row");
    return table;
}

const std::vector<std::string> kHoldingsHeader{"date", "bank_id", "asset_id", "shares"};
const std::vector<std::string> kSecuritiesHeader{"date", "asset_id", "outstanding", "price"};
const std::vector<std::string> kExposuresHeader{"date", "layer", "debtor_id", "creditor_id", "amount"};
const std::vector<std::string> kCapitalHeader{"date", "bank_id", "equity"};
const std::vector<std::string> kProbabilitiesHeader{"bank_id", "p"};

class TableCache {
public:
    const Table& get(const fs::path& path, const std::vector<std::string>& header) {
        const auto key = path.lexically_normal().string();
        auto it = tables_.find(key);
        if (it == tables_.end()) it = tables_.emplace(key, read_table(path, header)).first;
        return it->second;
    }

private:
    std::map<std::string, Table> tables_;
};

SystemSnapshot assemble(const DatasetManifest& manifest, const ManifestEntry& entry, TableCache& cache) {
    const auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : manifest.base_dir / p; };
    SystemSnapshot snap;
    snap.date = entry.date;
    if (manifest.currency) snap.metadata["currency"] = *manifest.currency;
    if (manifest.exposure_basis) snap.metadata["exposure_basis"] = *manifest.exposure_basis;

    auto& reg = snap.registry;
    std::unordered_map<std::string, std::size_t> bank_index;
    {
        const auto& t = cache.get(resolve(entry.capital), kCapitalHeader);
        for (const auto& row : t.rows) {
            if (t.date(row, 0) != entry.date) continue;
            const auto& id = row.fields[1].text;
            if (!bank_index.emplace(id, reg.size()).second) t.fail(row, 1, "duplicate bank '" + id + "'");
            const double equity = t.number(row, 2);
            if (!(equity > 0.0)) t.fail(row, 2, "equity of bank '" + id + "' must be strictly positive");
            reg.bank_ids.push_back(id);
            reg.equity.push_back(equity);
        }
        if (reg.size() == 0)
            throw InputError(t.file + ": no banks listed for date " + format_date(entry.date));
    }
    {
        const auto& t = cache.get(resolve(entry.probabilities), kProbabilitiesHeader);
        std::vector<bool> seen(reg.size(), false);
        reg.default_probability.assign(reg.size(), 0.0);
        std::set<std::string> rows_seen;
        for (const auto& row : t.rows) {
            const auto& id = row.fields[0].text;
            if (!rows_seen.insert(id).second) t.fail(row, 0, "duplicate bank '" + id + "'");
            const double p = t.number(row, 1);
            if (!(p >= 0.0 && p <= 1.0)) t.fail(row, 1, "default probability must lie in [0,1]");
            const auto it = bank_index.find(id);
            // Banks not active on this date are ignored.
            if (it == bank_index.end()) continue;
            reg.default_probability[it->second] = p;
            seen[it->second] = true;
        }
        for (std::size_t i = 0; i < reg.size(); ++i)
            if (!seen[i]) throw InputError(t.file + ": no default probability for bank '" + reg.bank_ids[i] + "'");
    }

    if (entry.holdings.has_value() != entry.securities.has_value())
        throw InputError("manifest entry " + format_date(entry.date) +
                         ": holdings and securities must be given together");
    if (entry.securities) {
        HoldingsSnapshot h;
        std::unordered_map<std::string, std::size_t> asset_index;
        const auto& st = cache.get(resolve(*entry.securities), kSecuritiesHeader);
        for (const auto& row : st.rows) {
            if (st.date(row, 0) != entry.date) continue;
            const auto& id = row.fields[1].text;
            if (!asset_index.emplace(id, h.asset_ids.size()).second)
                st.fail(row, 1, "duplicate asset '" + id + "'");
            const double n = st.number(row, 2);
            const double p = st.number(row, 3);
            if (!(n > 0.0)) st.fail(row, 2, "outstanding shares must be positive");
            if (!(p > 0.0)) st.fail(row, 3, "price must be positive");
            h.asset_ids.push_back(id);
            h.outstanding.push_back(n);
            h.price.push_back(p);
        }
        h.shares = Matrix(reg.size(), h.asset_ids.size());
        const auto& ht = cache.get(resolve(*entry.holdings), kHoldingsHeader);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& row : ht.rows) {
            if (ht.date(row, 0) != entry.date) continue;
            const auto bank = bank_index.find(row.fields[1].text);
            if (bank == bank_index.end()) ht.fail(row, 1, "unknown bank '" + row.fields[1].text + "'");
            const auto asset = asset_index.find(row.fields[2].text);
            if (asset == asset_index.end()) ht.fail(row, 2, "unknown asset '" + row.fields[2].text + "'");
            if (!seen.emplace(bank->second, asset->second).second)
                ht.fail(row, 1, "duplicate holding of asset '" + row.fields[2].text + "' by bank '" +
                                    row.fields[1].text + "'");
            const double s = ht.number(row, 3);
            if (!(s >= 0.0)) ht.fail(row, 3, "shares must be nonnegative");
            h.shares(bank->second, asset->second) = s;
        }
        snap.holdings = std::move(h);
    }

    if (entry.layers) {
        for (const auto& name : *entry.layers) snap.direct_layers.push_back({name, Matrix(reg.size(), reg.size())});
    }
    if (entry.exposures) {
        const auto& t = cache.get(resolve(*entry.exposures), kExposuresHeader);
        std::set<std::tuple<std::string, std::size_t, std::size_t>> seen;
        for (const auto& row : t.rows) {
            if (t.date(row, 0) != entry.date) continue;
            const auto& name = row.fields[1].text;
            if (name == kOverlapLayer || name == kCombinedLayer)
                t.fail(row, 1, "layer name '" + name + "' is reserved for derived layers");
            auto layer = std::find_if(snap.direct_layers.begin(), snap.direct_layers.end(),
                                      [&](const ExposureLayer& l) { return l.name == name; });
            if (layer == snap.direct_layers.end()) {
                if (entry.layers) t.fail(row, 1, "layer '" + name + "' is not declared in the manifest");
                snap.direct_layers.push_back({name, Matrix(reg.size(), reg.size())});
                layer = std::prev(snap.direct_layers.end());
            }
            const auto debtor = bank_index.find(row.fields[2].text);
            if (debtor == bank_index.end()) t.fail(row, 2, "unknown bank '" + row.fields[2].text + "'");
            const auto creditor = bank_index.find(row.fields[3].text);
            if (creditor == bank_index.end()) t.fail(row, 3, "unknown bank '" + row.fields[3].text + "'");
            if (debtor->second == creditor->second) t.fail(row, 3, "direct exposure of a bank to itself");
            if (!seen.emplace(name, debtor->second, creditor->second).second)
                t.fail(row, 2, "duplicate exposure row");
            const double amount = t.number(row, 4);
            if (!(amount >= 0.0)) t.fail(row, 4, "amount must be nonnegative");
            layer->matrix(debtor->second, creditor->second) = amount;
        }
    }

    require_valid(snap);
    return snap;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << kVersionLine << '\n';
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string optional_path(const json& j, const char* key) {
    if (!j.contains(key)) return {};
    if (!j[key].is_string()) throw InputError(std::string("manifest: '") + key + "' must be a string");
    return j[key].get<std::string>();
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
    double v = 0.0;
    if (text.empty()) return std::nullopt;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

const ManifestEntry* DatasetManifest::find(const Date& date) const {
    for (const auto& e : entries)
        if (e.date == date) return &e;
    return nullptr;
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("manifest '" + path.string() + "': " + e.what());
    }

    DatasetManifest m;
    m.base_dir = path.parent_path();
    try {
        if (!j.is_object() || !j.contains("format_version"))
            throw InputError("missing 'format_version'");
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != kFormatVersion)
            throw InputError("unsupported format_version " + std::to_string(m.format_version));
        if (j.contains("currency")) m.currency = j["currency"].get<std::string>();
        if (j.contains("exposure_basis")) m.exposure_basis = j["exposure_basis"].get<std::string>();
        if (!j.contains("dates") || !j["dates"].is_array()) throw InputError("missing 'dates' array");
        for (const auto& d : j["dates"]) {
            ManifestEntry e;
            e.date = parse_date(d.at("date").get<std::string>());
            e.capital = optional_path(d, "capital");
            e.probabilities = optional_path(d, "probabilities");
            if (e.capital.empty() || e.probabilities.empty())
                throw InputError("entry " + format_date(e.date) + " needs 'capital' and 'probabilities'");
            if (auto p = optional_path(d, "holdings"); !p.empty()) e.holdings = p;
            if (auto p = optional_path(d, "securities"); !p.empty()) e.securities = p;
            if (auto p = optional_path(d, "exposures"); !p.empty()) e.exposures = p;
            if (d.contains("layers")) e.layers = d["layers"].get<std::vector<std::string>>();
            if (!m.entries.empty() && !(m.entries.back().date < e.date))
                throw InputError("dates must be unique and sorted (at " + format_date(e.date) + ")");
            m.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw InputError("manifest '" + path.string() + "': " + e.what());
    } catch (const ParseError&) {
        throw;
    } catch (const InputError& e) {
        throw InputError("manifest '" + path.string() + "': " + e.what());
    }
    return m;
}

SystemSnapshot load_snapshot(const DatasetManifest& manifest, const ManifestEntry& entry) {
    TableCache cache;
    return assemble(manifest, entry, cache);
}

std::vector<SystemSnapshot> load_dataset(const DatasetManifest& manifest) {
    TableCache cache;
    std::vector<SystemSnapshot> out;
    out.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) out.push_back(assemble(manifest, entry, cache));
    return out;
}

void write_dataset(const std::vector<SystemSnapshot>& snapshots, const fs::path& dir) {
    if (snapshots.empty()) throw InputError("write_dataset: nothing to write");
    std::error_code ec;
    fs::create_directories(dir, ec);

    // Probabilities are undated; require one value per bank across dates.
    std::vector<std::string> prob_order;
    std::unordered_map<std::string, double> prob;
    bool any_holdings = false;
    bool any_exposures = false;
    for (const auto& s : snapshots) {
        require_valid(s);
        any_holdings = any_holdings || s.holdings.has_value();
        any_exposures = any_exposures || !s.direct_layers.empty();
        for (std::size_t i = 0; i < s.registry.size(); ++i) {
            if (s.registry.is_absent(i)) continue;
            const auto& id = s.registry.bank_ids[i];
            const double p = s.registry.default_probability[i];
            const auto [it, inserted] = prob.emplace(id, p);
            if (inserted) prob_order.push_back(id);
            else if (it->second != p)
                throw InputError("write_dataset: bank '" + id + "' has differing default probabilities");
        }
    }
    for (std::size_t k = 1; k < snapshots.size(); ++k)
        if (!(snapshots[k - 1].date < snapshots[k].date))
            throw InputError("write_dataset: dates must be unique and sorted");

    const auto capital_path = dir / "capital.csv";
    const auto prob_path = dir / "probabilities.csv";
    const auto holdings_path = dir / "holdings.csv";
    const auto securities_path = dir / "securities.csv";
    const auto exposures_path = dir / "exposures.csv";

    {
        auto out = open_output(capital_path);
        out << "date,bank_id,equity\n";
        for (const auto& s : snapshots) {
            const auto date = format_date(s.date);
            for (std::size_t i = 0; i < s.registry.size(); ++i)
                if (!s.registry.is_absent(i))
                    out << date << ',' << s.registry.bank_ids[i] << ',' << format_number(s.registry.equity[i]) << '\n';
        }
        finish(out, capital_path);
    }
    {
        auto out = open_output(prob_path);
        out << "bank_id,p\n";
        for (const auto& id : prob_order) out << id << ',' << format_number(prob.at(id)) << '\n';
        finish(out, prob_path);
    }
    if (any_holdings) {
        auto sec = open_output(securities_path);
        auto hold = open_output(holdings_path);
        sec << "date,asset_id,outstanding,price\n";
        hold << "date,bank_id,asset_id,shares\n";
        for (const auto& s : snapshots) {
            if (!s.holdings) continue;
            const auto date = format_date(s.date);
            const auto& h = *s.holdings;
            for (std::size_t a = 0; a < h.assets(); ++a)
                sec << date << ',' << h.asset_ids[a] << ',' << format_number(h.outstanding[a]) << ','
                    << format_number(h.price[a]) << '\n';
            for (std::size_t i = 0; i < h.banks(); ++i)
                for (std::size_t a = 0; a < h.assets(); ++a)
                    if (h.shares(i, a) != 0.0)
                        hold << date << ',' << s.registry.bank_ids[i] << ',' << h.asset_ids[a] << ','
                             << format_number(h.shares(i, a)) << '\n';
        }
        finish(sec, securities_path);
        finish(hold, holdings_path);
    }
    if (any_exposures) {
        auto out = open_output(exposures_path);
        out << "date,layer,debtor_id,creditor_id,amount\n";
        for (const auto& s : snapshots) {
            const auto date = format_date(s.date);
            for (const auto& layer : s.direct_layers)
                for (std::size_t i = 0; i < layer.matrix.rows(); ++i)
                    for (std::size_t j = 0; j < layer.matrix.cols(); ++j)
                        if (layer.matrix(i, j) != 0.0)
                            out << date << ',' << layer.name << ',' << s.registry.bank_ids[i] << ','
                                << s.registry.bank_ids[j] << ',' << format_number(layer.matrix(i, j)) << '\n';
        }
        finish(out, exposures_path);
    }

    json manifest;
    manifest["format_version"] = kFormatVersion;
    const auto& meta = snapshots.front().metadata;
    if (auto it = meta.find("currency"); it != meta.end()) manifest["currency"] = it->second;
    if (auto it = meta.find("exposure_basis"); it != meta.end()) manifest["exposure_basis"] = it->second;
    manifest["dates"] = json::array();
    for (const auto& s : snapshots) {
        json e;
        e["date"] = format_date(s.date);
        e["capital"] = "capital.csv";
        e["probabilities"] = "probabilities.csv";
        if (s.holdings) {
            e["holdings"] = "holdings.csv";
            e["securities"] = "securities.csv";
        }
        if (!s.direct_layers.empty()) {
            e["exposures"] = "exposures.csv";
            json names = json::array();
            for (const auto& l : s.direct_layers) names.push_back(l.name);
            e["layers"] = std::move(names);
        }
        manifest["dates"].push_back(std::move(e));
    }
    const auto manifest_path = dir / "manifest.json";
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + manifest_path.string() + "'");
    out << manifest.dump(2) << '\n';
    finish(out, manifest_path);
}

void write_profile_table(const SRProfile& profile, const fs::path& path) {
    auto out = open_output(path);
    out << "rank,bank_id,R_comb";
    for (const auto& name : profile.layer_names) out << ",R_hat_" << name;
    out << ",R_comb_excl";
    for (const auto& name : profile.layer_names) out << ",R_hat_excl_" << name;
    out << '\n';
    std::size_t rank = 1;
    for (const auto& row : profile.rows) {
        out << rank++ << ',' << row.bank_id << ',' << format_number(row.r_comb);
        for (double r : row.r_hat) out << ',' << format_number(r);
        out << ',' << format_number(row.r_comb_excl);
        for (double r : row.r_hat_excl) out << ',' << format_number(r);
        out << '\n';
    }
    finish(out, path);
}

void write_timeseries_table(const std::vector<std::string>& layer_names,
                            const std::vector<AverageDebtRank>& rows, const fs::path& path) {
    auto out = open_output(path);
    out << "date";
    for (const auto& name : layer_names) out << ",R_bar_" << name;
    out << ",R_bar_comb\n";
    for (const auto& row : rows) {
        out << format_date(row.date);
        for (double r : row.per_layer) out << ',' << format_number(r);
        out << ',' << format_number(row.combined) << '\n';
    }
    finish(out, path);
}

void write_marginal_table(const std::vector<MarginalExposureRecord>& records, const fs::path& path) {
    auto out = open_output(path);
    out << "from_bank,to_bank,layer,kind,size,delta_el\n";
    for (const auto& r : records)
        out << r.from_bank << ',' << r.to_bank << ',' << r.layer << ',' << (r.self_impact ? "self-impact" : "exposure")
            << ',' << format_number(r.exposure_size) << ',' << format_number(r.delta_el) << '\n';
    finish(out, path);
}

void write_report(const ReportBundle& bundle, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
    if (bundle.profile) write_profile_table(*bundle.profile, dir / "profile.csv");
    if (bundle.timeseries) write_timeseries_table(bundle.timeseries_layers, *bundle.timeseries, dir / "timeseries.csv");
    if (bundle.marginal) write_marginal_table(*bundle.marginal, dir / "marginal.csv");
    if (!bundle.metadata_json.empty()) {
        const auto path = dir / "run.json";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + path.string() + "'");
        out << bundle.metadata_json;
        finish(out, path);
    }
}

}  // namespace sysrisk
