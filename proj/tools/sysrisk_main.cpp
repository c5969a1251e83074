// Command-line front end: profile | timeseries | marginal | generate | validate.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sysrisk/cli.hpp"
#include "sysrisk/error.hpp"

namespace {

using sysrisk::cli::RunConfig;

struct Flags {
    std::string manifest;
    std::string date;
    std::string out;
    std::string impact = "linear";
    double alpha = 0.0;
    std::vector<double> calibration;
    std::string layers = "direct,OP";
    std::string expected_loss = "approx";
    std::string start_date;
    std::vector<std::string> layer_density;
    std::optional<double> direct_density;
};

double parse_density(const std::string& text) {
    const auto v = sysrisk::parse_number(text);
    if (!v) throw sysrisk::InputError("--layer-density: bad value '" + text + "'");
    return *v;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    for (char c : text) {
        if (c == ',') {
            out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    out.push_back(item);
    return out;
}

void add_analysis_flags(CLI::App* cmd, RunConfig& config, Flags& flags, bool dated) {
    cmd->add_option("-m,--manifest", flags.manifest, "Dataset manifest (JSON)")->required();
    cmd->add_option("-o,--out", flags.out, "Output directory")->required();
    if (dated) cmd->add_option("--date", flags.date, "Date to analyze (YYYY-MM-DD); default: last date");
    cmd->add_option("--psi", config.psi, "Initial distress of seed banks, in [0,1]")->capture_default_str();
    cmd->add_option("--impact", flags.impact, "Market impact: linear | absorption")
        ->check(CLI::IsMember({"linear", "absorption"}))
        ->capture_default_str();
    auto* alpha = cmd->add_option("--alpha", flags.alpha, "Absorption impact parameter");
    auto* calib = cmd->add_option("--calibrate", flags.calibration,
                                  "Calibrate alpha: SOLD_FRACTION PRICE_DROP")
                      ->expected(2);
    alpha->excludes(calib);
    cmd->add_option("--layers", flags.layers,
                    "Comma-separated layers: direct, OP, or direct sub-layers (DL, deri, secu, FX, ...)")
        ->capture_default_str();
    cmd->add_option("--threads", config.threads, "Worker threads (0: all cores)");
}

RunConfig finish(RunConfig config, const Flags& flags, CLI::App* cmd) {
    config.manifest = flags.manifest;
    config.out_dir = flags.out;
    if (!flags.date.empty()) config.date = flags.date;
    config.impact = flags.impact == "absorption" ? sysrisk::ImpactMode::Absorption : sysrisk::ImpactMode::Linear;
    if (cmd->count("--alpha")) config.alpha = flags.alpha;
    if (flags.calibration.size() == 2) config.calibration = std::make_pair(flags.calibration[0], flags.calibration[1]);
    config.layers = split_list(flags.layers);
    if (flags.expected_loss == "none") config.expected_loss = sysrisk::cli::LossReport::None;
    if (flags.expected_loss == "exact") config.expected_loss = sysrisk::cli::LossReport::Exact;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Systemic risk of direct and overlapping-portfolio exposures"};
    app.require_subcommand(1);
    app.set_version_flag("--version", sysrisk::cli::kToolVersion);

    RunConfig config;
    Flags flags;

    auto* profile = app.add_subcommand("profile", "Systemic-risk profile for one date");
    add_analysis_flags(profile, config, flags, true);
    profile->add_option("--expected-loss", flags.expected_loss, "Expected systemic loss: none | approx | exact")
        ->check(CLI::IsMember({"none", "approx", "exact"}))
        ->capture_default_str();
    profile->add_option("--exact-limit", config.exact_limit, "Largest bank count for exact expected loss")
        ->capture_default_str();

    auto* timeseries = app.add_subcommand("timeseries", "Average DebtRank per layer for every date");
    add_analysis_flags(timeseries, config, flags, false);

    auto* marginal = app.add_subcommand("marginal", "Marginal expected loss of every exposure");
    add_analysis_flags(marginal, config, flags, true);

    auto* validate = app.add_subcommand("validate", "Load and validate every date of a dataset");
    validate->add_option("-m,--manifest", flags.manifest, "Dataset manifest (JSON)")->required();

    auto* generate = app.add_subcommand("generate", "Write a synthetic dataset");
    auto& g = config.generator;
    generate->add_option("-o,--out", flags.out, "Output directory")->required();
    generate->add_option("--banks", g.banks, "Number of banks")->capture_default_str();
    generate->add_option("--assets", g.assets, "Number of assets")->capture_default_str();
    generate->add_option("--seed", g.seed, "Random seed")->capture_default_str();
    generate->add_option("--holdings-density", g.holdings_density, "Fraction of bank-asset cells held")
        ->capture_default_str();
    generate->add_option("--tail-exponent", g.tail_exponent, "Pareto exponent of bank sizes")->capture_default_str();
    generate->add_option("--layer-density", flags.layer_density,
                         "Direct layer density NAME=VALUE (repeatable; replaces the default layers)");
    generate->add_option("--direct-density", flags.direct_density, "Set every direct layer to this density");
    generate->add_option("--direct-scale", g.direct_scale, "Direct exposure size relative to portfolios")
        ->capture_default_str();
    generate->add_option("--equity-scale", g.equity_scale, "Equity as a fraction of total assets")
        ->capture_default_str();
    generate->add_option("--p-min", g.p_min, "Smallest default probability")->capture_default_str();
    generate->add_option("--p-max", g.p_max, "Largest default probability")->capture_default_str();
    generate->add_option("--dates", g.dates, "Number of dates")->capture_default_str();
    generate->add_option("--start-date", flags.start_date, "First date (YYYY-MM-DD)");
    generate->add_option("--step-days", g.step_days, "Days between dates")->capture_default_str();
    generate->add_option("--currency", g.currency, "Currency label")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sysrisk::cli::kInputError;
    }

    try {
        if (*profile) {
            config.command = "profile";
            sysrisk::cli::cmd_profile(finish(config, flags, profile));
        } else if (*timeseries) {
            config.command = "timeseries";
            sysrisk::cli::cmd_timeseries(finish(config, flags, timeseries));
        } else if (*marginal) {
            config.command = "marginal";
            sysrisk::cli::cmd_marginal(finish(config, flags, marginal));
        } else if (*validate) {
            config.command = "validate";
            config.manifest = flags.manifest;
            const auto failures = sysrisk::cli::cmd_validate(config, std::cout);
            return failures == 0 ? sysrisk::cli::kOk : sysrisk::cli::kInputError;
        } else if (*generate) {
            config.command = "generate";
            config.out_dir = flags.out;
            if (!flags.start_date.empty()) g.start_date = sysrisk::parse_date(flags.start_date);
            if (flags.layer_density.size() && flags.direct_density)
                throw sysrisk::InputError("--layer-density and --direct-density are exclusive");
            if (flags.direct_density)
                for (auto& entry : g.direct_density) entry.second = *flags.direct_density;
            if (!flags.layer_density.empty()) {
                g.direct_density.clear();
                for (const auto& item : flags.layer_density) {
                    const auto eq = item.find('=');
                    if (eq == std::string::npos) throw sysrisk::InputError("--layer-density expects NAME=VALUE");
                    g.direct_density.emplace_back(item.substr(0, eq), parse_density(item.substr(eq + 1)));
                }
            }
            sysrisk::cli::cmd_generate(config);
        }
    } catch (const sysrisk::LimitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sysrisk::cli::kLimitError;
    } catch (const sysrisk::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sysrisk::cli::kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad numeric argument: " << e.what() << '\n';
        return sysrisk::cli::kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sysrisk::cli::kFailure;
    }
    return sysrisk::cli::kOk;
}
