#include "sysrisk/cli.hpp"

#include <ostream>

#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "sysrisk/error.hpp"

namespace sysrisk::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const char* impact_name(ImpactMode mode) { return mode == ImpactMode::Linear ? "linear" : "absorption"; }

const char* loss_name(LossReport r) {
    switch (r) {
        case LossReport::None: return "none";
        case LossReport::Approximate: return "approximate";
        case LossReport::Exact: return "exact";
    }
    return "?";
}

DatasetManifest open_manifest(const RunConfig& config) {
    if (config.manifest.empty()) throw InputError("no manifest given");
    if (!fs::exists(config.manifest)) throw InputError("manifest '" + config.manifest.string() + "' does not exist");
    auto manifest = load_manifest(config.manifest);
    if (manifest.entries.empty()) throw InputError("manifest lists no dates");
    return manifest;
}

const ManifestEntry& pick_entry(const DatasetManifest& manifest, const RunConfig& config) {
    if (!config.date) return manifest.entries.back();
    const auto* entry = manifest.find(parse_date(*config.date));
    if (!entry) throw InputError("date " + *config.date + " is not in the manifest");
    return *entry;
}

json base_metadata(const RunConfig& config, const NetworkOptions& options, const DatasetManifest& manifest) {
    json meta;
    meta["format_version"] = kFormatVersion;
    meta["tool_version"] = kToolVersion;
    meta["command"] = config.command;
    meta["manifest"] = config.manifest.generic_string();
    meta["currency"] = manifest.currency ? json(*manifest.currency) : json(nullptr);
    meta["exposure_basis"] = manifest.exposure_basis ? json(*manifest.exposure_basis) : json(nullptr);
    meta["psi"] = config.psi;
    meta["impact_mode"] = impact_name(options.impact);
    meta["alpha"] = options.impact == ImpactMode::Absorption ? json(options.alpha) : json(nullptr);
    meta["calibration"] = config.calibration
                              ? json::array({config.calibration->first, config.calibration->second})
                              : json(nullptr);
    meta["layers"] = options.layers;
    meta["orientation"] = "X[i][j] = loss of bank j if bank i defaults";
    return meta;
}

std::string finish_metadata(const json& meta) { return meta.dump(2) + "\n"; }

void check_out_dir(const RunConfig& config) {
    if (config.out_dir.empty()) throw InputError("no output directory given");
}

}  // namespace

NetworkOptions network_options(const RunConfig& config) {
    if (!(config.psi >= 0.0 && config.psi <= 1.0)) throw InputError("psi must lie in [0,1]");
    if (config.alpha && config.calibration) throw InputError("alpha and calibration are mutually exclusive");

    NetworkOptions options;
    options.impact = config.impact;
    options.layers = config.layers;
    if (config.impact == ImpactMode::Absorption) {
        if (config.alpha) {
            if (!(*config.alpha > 0.0)) throw InputError("alpha must be positive");
            options.alpha = *config.alpha;
        } else if (config.calibration) {
            options.alpha = calibrate_alpha(config.calibration->first, config.calibration->second);
        } else {
            throw InputError("absorption impact needs alpha or a calibration pair");
        }
    } else if (config.alpha || config.calibration) {
        throw InputError("alpha/calibration apply to absorption impact only");
    }
    return options;
}

ReportBundle run_profile(const RunConfig& config) {
    const auto options = network_options(config);
    const auto manifest = open_manifest(config);
    const auto& entry = pick_entry(manifest, config);
    const auto snapshot = load_snapshot(manifest, entry);
    const auto network = build_network(snapshot, options);

    ReportBundle bundle;
    auto profile = sr_profile(network, snapshot.registry, config.psi);
    profile.date = snapshot.date;

    auto meta = base_metadata(config, options, manifest);
    meta["date"] = format_date(snapshot.date);
    meta["banks"] = snapshot.registry.size();
    const auto avg = average_profile(profile, snapshot.registry);
    json averages;
    for (std::size_t k = 0; k < profile.layer_names.size(); ++k) averages[profile.layer_names[k]] = avg.per_layer[k];
    averages[std::string(kCombinedLayer)] = avg.combined;
    meta["average_debtrank"] = averages;

    if (config.expected_loss != LossReport::None) {
        const auto el = config.expected_loss == LossReport::Exact
                            ? expected_loss_exact(network.combined, snapshot.registry, config.psi, config.exact_limit)
                            : expected_loss_approx(network.combined, snapshot.registry, config.psi);
        meta["expected_loss"] = {{"method", loss_name(config.expected_loss)},
                                 {"value", el.value},
                                 {"total_value", el.total_value},
                                 {"terms_evaluated", el.terms_evaluated},
                                 {"exact_limit", config.exact_limit}};
    }
    bundle.profile = std::move(profile);
    bundle.metadata_json = finish_metadata(meta);
    return bundle;
}

ReportBundle run_timeseries(const RunConfig& config) {
    const auto options = network_options(config);
    const auto manifest = open_manifest(config);
    const auto snapshots = align_banks(load_dataset(manifest));

    std::vector<AverageDebtRank> rows(snapshots.size());
    detail::parallel_for(snapshots.size(), config.threads, [&](std::size_t t) {
        const auto network = build_network(snapshots[t], options);
        auto profile = sr_profile(network, snapshots[t].registry, config.psi);
        profile.date = snapshots[t].date;
        rows[t] = average_profile(profile, snapshots[t].registry);
    });

    auto meta = base_metadata(config, options, manifest);
    json dates = json::array();
    for (const auto& s : snapshots) dates.push_back(format_date(s.date));
    meta["dates"] = dates;
    meta["banks_aligned"] = snapshots.empty() ? 0 : snapshots.front().registry.size();

    ReportBundle bundle;
    bundle.timeseries = std::move(rows);
    bundle.timeseries_layers = options.layers;
    bundle.metadata_json = finish_metadata(meta);
    return bundle;
}

ReportBundle run_marginal(const RunConfig& config) {
    const auto options = network_options(config);
    const auto manifest = open_manifest(config);
    const auto& entry = pick_entry(manifest, config);
    const auto snapshot = load_snapshot(manifest, entry);
    const auto network = build_network(snapshot, options);

    auto meta = base_metadata(config, options, manifest);
    meta["date"] = format_date(snapshot.date);
    meta["banks"] = snapshot.registry.size();
    meta["expected_loss_method"] = "approximate";

    ReportBundle bundle;
    bundle.marginal = marginal_scan(network, snapshot.registry, config.psi, config.threads);
    bundle.metadata_json = finish_metadata(meta);
    return bundle;
}

void cmd_profile(const RunConfig& config) {
    check_out_dir(config);
    write_report(run_profile(config), config.out_dir);
}

void cmd_timeseries(const RunConfig& config) {
    check_out_dir(config);
    write_report(run_timeseries(config), config.out_dir);
}

void cmd_marginal(const RunConfig& config) {
    check_out_dir(config);
    write_report(run_marginal(config), config.out_dir);
}

void cmd_generate(const RunConfig& config) {
    check_out_dir(config);
    const auto& g = config.generator;
    const auto series = generate_series(g);
    write_dataset(series, config.out_dir);

    json meta;
    meta["format_version"] = kFormatVersion;
    meta["tool_version"] = kToolVersion;
    meta["command"] = "generate";
    meta["banks"] = g.banks;
    meta["assets"] = g.assets;
    meta["seed"] = g.seed;
    meta["holdings_density"] = g.holdings_density;
    meta["tail_exponent"] = g.tail_exponent;
    json densities;
    for (const auto& [name, d] : g.direct_density) densities[name] = d;
    meta["direct_density"] = densities;
    meta["direct_scale"] = g.direct_scale;
    meta["equity_scale"] = g.equity_scale;
    meta["p_min"] = g.p_min;
    meta["p_max"] = g.p_max;
    meta["dates"] = g.dates;
    meta["start_date"] = format_date(g.start_date);
    meta["step_days"] = g.step_days;
    meta["currency"] = g.currency;
    ReportBundle bundle;
    bundle.metadata_json = finish_metadata(meta);
    write_report(bundle, config.out_dir);
}

std::size_t cmd_validate(const RunConfig& config, std::ostream& out) {
    const auto manifest = open_manifest(config);
    std::size_t failures = 0;
    for (const auto& entry : manifest.entries) {
        const auto date = format_date(entry.date);
        try {
            const auto snapshot = load_snapshot(manifest, entry);
            const auto report = validate_snapshot(snapshot);
            out << date << ": ok (" << snapshot.registry.size() << " banks";
            if (snapshot.holdings) out << ", " << snapshot.holdings->assets() << " assets";
            out << ", " << snapshot.direct_layers.size() << " direct layers)\n";
            for (const auto& f : report.flags) out << "  flag: " << f.invariant << " (" << f.location << ")\n";
        } catch (const InputError& e) {
            ++failures;
            out << date << ": FAILED\n  " << e.what() << '\n';
        }
    }
    return failures;
}

}  // namespace sysrisk::cli
