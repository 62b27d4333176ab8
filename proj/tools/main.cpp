#include "tvme/bootstrap.hpp"
#include "tvme/csv.hpp"
#include "tvme/error.hpp"
#include "tvme/impute.hpp"
#include "tvme/pipeline.hpp"
#include "tvme/synthetic.hpp"
#include "tvme/version.hpp"

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using tvme::RunConfig;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

// Every subcommand flag maps onto a config key, so a flat key=value config
// file and the command line describe the same thing; explicit flags win.
struct ConfigCli {
    std::string config_file;
    std::vector<std::pair<std::string, CLI::Option*>> overrides;
    std::vector<std::shared_ptr<std::string>> storage;

    void attach(CLI::App* app, const std::vector<std::string>& keys) {
        app->add_option("--config", config_file, "flat key=value config file");
        for (const std::string& key : keys) {
            std::string flag = "--" + key;
            for (auto& ch : flag)
                if (ch == '_') ch = '-';
            auto value = std::make_shared<std::string>();
            storage.push_back(value);
            CLI::Option* opt = app->add_option(flag, *value, "config key " + key);
            overrides.emplace_back(key, opt);
        }
    }

    RunConfig resolve() const {
        RunConfig config;
        if (!config_file.empty()) config = tvme::load_config(config_file);
        for (std::size_t i = 0; i < overrides.size(); ++i) {
            const auto& [key, opt] = overrides[i];
            if (opt->count() > 0) tvme::apply_config_entry(config, key, *storage[i]);
        }
        return config;
    }
};

tvme::AlignedSample load_sample(const RunConfig& config) {
    tvme::PriceSeries spot = tvme::read_price_csv(config.spot_file);
    tvme::PriceSeries futures = tvme::read_price_csv(config.futures_file);
    if (config.imputation) {
        if (spot.has_gaps()) spot = tvme::impute_missing(spot);
        if (futures.has_gaps()) futures = tvme::impute_missing(futures);
    }
    return tvme::align(spot, futures, config.k);
}

void require_inputs(const RunConfig& config) {
    if (config.spot_file.empty() || config.futures_file.empty()) {
        throw tvme::ValidationError("--spot and --futures (or config keys "
                                    "spot_file/futures_file) are required");
    }
}

tvme::LambdaChoice lambda_choice(const RunConfig& config) {
    if (config.lambda == "auto") return tvme::LambdaChoice::auto_select();
    return tvme::LambdaChoice::fixed(std::stod(config.lambda));
}

tvme::PriorChoice prior_choice(const RunConfig& config) {
    if (config.prior == "ols") return tvme::PriorChoice::ols();
    if (config.prior == "gls") return tvme::PriorChoice::gls();
    return tvme::PriorChoice::fixed(std::stod(config.prior));
}

int cmd_simulate(const std::string& beta_spec, std::size_t n, int k, double alpha, double sigma_u,
                 double premium_rho, double premium_sigma, std::uint64_t seed,
                 const std::string& start, const std::string& out_dir) {
    tvme::ScenarioSpec spec;
    spec.n = n;
    spec.k = k;
    spec.alpha_true = alpha;
    spec.sigma_u = sigma_u;
    spec.premium = tvme::Ar1Spec{premium_rho, premium_sigma};
    spec.seed = seed;
    spec.start = tvme::Month::parse(start);

    // beta path grammar: constant:C | step:C1:C2:BREAK | sine:CENTER:AMP:PERIOD
    // | rw:SIGMA[:START]
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : beta_spec) {
        if (ch == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    const std::string& kind = parts[0];
    auto num = [&](std::size_t i) { return std::stod(parts.at(i)); };
    if (kind == "constant" && parts.size() == 2) {
        spec.beta_path = tvme::BetaPathSpec::constant(num(1));
    } else if (kind == "step" && parts.size() == 4) {
        spec.beta_path =
            tvme::BetaPathSpec::step(num(1), num(2), static_cast<std::size_t>(std::stoul(parts[3])));
    } else if (kind == "sine" && parts.size() == 4) {
        spec.beta_path = tvme::BetaPathSpec::sine(num(1), num(2), num(3));
    } else if (kind == "rw" && (parts.size() == 2 || parts.size() == 3)) {
        spec.beta_path =
            tvme::BetaPathSpec::random_walk(num(1), parts.size() == 3 ? num(2) : 1.0);
    } else {
        throw tvme::ValidationError("bad --beta spec '" + beta_spec +
                                    "' (constant:C | step:C1:C2:BREAK | sine:C:A:P | "
                                    "rw:SIGMA[:START])");
    }

    const tvme::SimulatedMarket market = tvme::simulate_market(spec);
    fs::create_directories(out_dir);
    tvme::write_price_csv(fs::path(out_dir) / "spot.csv", market.spot);
    tvme::write_price_csv(fs::path(out_dir) / "futures.csv", market.futures);

    tvme::CsvTable truth;
    truth.header = {"date", "beta_true"};
    for (std::size_t t = 0; t < market.beta_true.size(); ++t) {
        truth.rows.push_back(
            {spec.start.plus(static_cast<int>(t)).str(), tvme::format_double(market.beta_true[t])});
    }
    tvme::write_csv(fs::path(out_dir) / "truth.csv", truth);
    std::cout << "wrote spot.csv, futures.csv, truth.csv to " << out_dir << "\n";
    return kExitOk;
}

int cmd_describe(const RunConfig& config) {
    require_inputs(config);
    const tvme::AlignedSample sample = load_sample(config);
    const tvme::SampleStats st = tvme::describe(sample);
    std::cout << "n=" << st.n << "\n"
              << "spot_return:     mean=" << tvme::format_double(st.mean_x)
              << " sd=" << tvme::format_double(st.sd_x)
              << " min=" << tvme::format_double(st.min_x)
              << " max=" << tvme::format_double(st.max_x) << "\n"
              << "futures_premium: mean=" << tvme::format_double(st.mean_y)
              << " sd=" << tvme::format_double(st.sd_y)
              << " min=" << tvme::format_double(st.min_y)
              << " max=" << tvme::format_double(st.max_y) << "\n";
    return kExitOk;
}

int cmd_unitroot(const RunConfig& config) {
    require_inputs(config);
    const tvme::AlignedSample sample = load_sample(config);
    const auto rx = tvme::adf_gls(sample.x, config.unitroot_mode, config.unitroot_kmax);
    const auto ry = tvme::adf_gls(sample.y, config.unitroot_mode, config.unitroot_kmax);
    std::cout << "series,statistic,lags,phi_hat\n";
    std::cout << "spot_return," << tvme::format_double(rx.statistic) << ',' << rx.lags << ','
              << tvme::format_double(rx.phi_hat) << "\n";
    std::cout << "futures_premium," << tvme::format_double(ry.statistic) << ',' << ry.lags << ','
              << tvme::format_double(ry.phi_hat) << "\n";
    return kExitOk;
}

int cmd_fit_static(const RunConfig& config) {
    require_inputs(config);
    const tvme::AlignedSample sample = load_sample(config);
    const tvme::StaticFit fit = tvme::ols_fit(sample);
    const tvme::HansenLc lc = tvme::hansen_lc(fit, sample);
    std::cout << "alpha,se_alpha,beta,se_beta,r2_adj,lc,decision\n";
    std::cout << tvme::format_double(fit.alpha) << ',' << tvme::format_double(fit.se_alpha) << ','
              << tvme::format_double(fit.beta) << ',' << tvme::format_double(fit.se_beta) << ','
              << tvme::format_double(fit.r2_adj) << ',' << tvme::format_double(lc.lc_stat) << ','
              << (lc.reject_5pct ? "reject-constancy" : "constancy-not-rejected") << "\n";
    return kExitOk;
}

int cmd_fit_tvp(const RunConfig& config) {
    require_inputs(config);
    const tvme::AlignedSample sample = load_sample(config);
    const tvme::TvpFit fit = tvme::tvp_fit(sample, lambda_choice(config), prior_choice(config));

    fs::create_directories(config.output_dir);
    tvme::CsvTable path;
    path.header = {"date", "beta_hat"};
    for (std::size_t t = 0; t < fit.beta_path.size(); ++t) {
        path.rows.push_back(
            {sample.start.plus(static_cast<int>(t)).str(), tvme::format_double(fit.beta_path[t])});
    }
    tvme::write_csv(fs::path(config.output_dir) / "tvp.csv", path);
    nlohmann::json header{{"alpha", fit.alpha},
                          {"lambda", fit.lambda},
                          {"loglik", fit.loglik},
                          {"beta0", fit.beta0},
                          {"sigma_u", fit.sigma_u}};
    std::ofstream(fs::path(config.output_dir) / "tvp.json") << header.dump(2) << '\n';
    std::cout << "alpha=" << tvme::format_double(fit.alpha)
              << " lambda=" << tvme::format_double(fit.lambda)
              << " loglik=" << tvme::format_double(fit.loglik) << "\n"
              << "wrote tvp.csv, tvp.json to " << config.output_dir << "\n";
    return kExitOk;
}

int cmd_band(const RunConfig& config) {
    require_inputs(config);
    const tvme::AlignedSample sample = load_sample(config);
    const tvme::TvpFit fit = tvme::tvp_fit(sample, lambda_choice(config), prior_choice(config));
    tvme::BandConfig band_config;
    band_config.n_boot = config.n_boot;
    band_config.level = config.level;
    band_config.seed = config.seed;
    band_config.lambda_policy = config.lambda_policy;
    band_config.threads = config.threads;
    const tvme::EfficiencyBand band = tvme::bootstrap_band(sample, band_config, fit);
    const tvme::EfficiencyTimeline timeline = tvme::detect(fit, band);

    fs::create_directories(config.output_dir);
    tvme::CsvTable table;
    table.header = {"date", "beta_hat", "lower", "upper", "flag"};
    for (std::size_t t = 0; t < fit.beta_path.size(); ++t) {
        table.rows.push_back({sample.start.plus(static_cast<int>(t)).str(),
                              tvme::format_double(fit.beta_path[t]),
                              tvme::format_double(band.lower[t]),
                              tvme::format_double(band.upper[t]),
                              timeline.inefficient[t] ? "inefficient" : "efficient"});
    }
    tvme::write_csv(fs::path(config.output_dir) / "band.csv", table);
    std::cout << "wrote band.csv to " << config.output_dir << " (" << timeline.episodes.size()
              << " inefficiency episodes)\n";
    return kExitOk;
}

int cmd_detect(const std::string& band_file, const std::string& out_dir) {
    const tvme::CsvTable table = tvme::read_csv(band_file);
    if (table.header.size() < 4 || table.header[0] != "date" || table.header[1] != "beta_hat" ||
        table.header[2] != "lower" || table.header[3] != "upper") {
        throw tvme::IoError(band_file + ": expected band CSV header date,beta_hat,lower,upper[,flag]");
    }
    if (table.rows.empty()) {
        throw tvme::IoError(band_file + ": no rows");
    }
    tvme::TvpFit fit;
    tvme::EfficiencyBand band;
    band.start = tvme::Month::parse(table.rows.front().at(0));
    for (const auto& row : table.rows) {
        fit.beta_path.push_back(std::stod(row.at(1)));
        band.lower.push_back(std::stod(row.at(2)));
        band.upper.push_back(std::stod(row.at(3)));
    }
    const tvme::EfficiencyTimeline timeline = tvme::detect(fit, band);

    fs::create_directories(out_dir);
    tvme::CsvTable ep;
    ep.header = {"start", "end", "months", "mean_excursion"};
    for (const tvme::Episode& e : timeline.episodes) {
        ep.rows.push_back({e.first_month.str(), e.last_month.str(), std::to_string(e.length()),
                           tvme::format_double(e.mean_excursion)});
    }
    tvme::write_csv(fs::path(out_dir) / "episodes.csv", ep);
    std::size_t flagged = 0;
    for (bool b : timeline.inefficient) flagged += b ? 1 : 0;
    std::cout << timeline.episodes.size() << " episodes, " << flagged << "/"
              << timeline.inefficient.size() << " months flagged inefficient; wrote episodes.csv"
              << " to " << out_dir << "\n";
    return kExitOk;
}

int cmd_run(const RunConfig& config) {
    const tvme::ReportBundle bundle = tvme::run_pipeline(config);
    tvme::render_tables(bundle, config);
    if (bundle.tvp_skipped_by_gate) {
        std::cout << "constancy not rejected; TVP stage skipped (override with --force-tvp)\n";
    } else if (bundle.timeline) {
        std::size_t flagged = 0;
        for (bool b : bundle.timeline->inefficient) flagged += b ? 1 : 0;
        std::cout << "TVP stage complete: " << bundle.timeline->episodes.size() << " episodes, "
                  << flagged << "/" << bundle.timeline->inefficient.size()
                  << " months flagged inefficient\n";
    }
    std::cout << "report written to " << config.output_dir << " (config hash "
              << tvme::config_hash(config) << ")\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spot/futures market efficiency analyzer: premium regressions, "
                 "time-varying slopes, bootstrap efficiency bands"};
    app.set_version_flag("--version", std::string(tvme::kToolName) + " " + tvme::kToolVersion);
    app.require_subcommand(1);

    const std::vector<std::string> data_keys = {"spot_file", "futures_file", "k", "imputation"};
    const std::vector<std::string> all_keys = {
        "spot_file", "futures_file", "k",      "imputation", "unitroot_mode",
        "unitroot_kmax", "n_boot",   "level",  "seed",       "lambda_policy",
        "lambda",    "prior",        "threads", "output_dir", "formats"};

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic spot/futures pair with a "
                                               "known slope path");
    std::string sim_beta = "constant:1";
    std::size_t sim_n = 500;
    int sim_k = 1;
    double sim_alpha = 0.0, sim_sigma_u = 0.05, sim_rho = 0.5, sim_premium_sigma = 0.05;
    std::uint64_t sim_seed = 1;
    std::string sim_start = "1900-01", sim_out = ".";
    sim->add_option("--beta", sim_beta, "constant:C | step:C1:C2:BREAK | sine:C:A:P | rw:S[:START]");
    sim->add_option("--n", sim_n, "regression sample length");
    sim->add_option("--k", sim_k, "contract horizon in months");
    sim->add_option("--alpha", sim_alpha, "true intercept");
    sim->add_option("--sigma-u", sim_sigma_u, "observation noise sd");
    sim->add_option("--premium-rho", sim_rho, "AR(1) coefficient of the premium");
    sim->add_option("--premium-sigma", sim_premium_sigma, "AR(1) innovation sd");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--start", sim_start, "first calendar month (YYYY-MM)");
    sim->add_option("--output-dir", sim_out, "output directory");

    auto add_config_cmd = [&](const char* name, const char* help,
                              const std::vector<std::string>& keys) {
        auto* cmd = app.add_subcommand(name, help);
        auto cli = std::make_shared<ConfigCli>();
        cli->attach(cmd, keys);
        return std::make_pair(cmd, cli);
    };

    auto [describe_cmd, describe_cli] =
        add_config_cmd("describe", "descriptive statistics of the aligned sample", data_keys);
    auto [unitroot_cmd, unitroot_cli] = add_config_cmd(
        "unitroot", "ADF-GLS unit root screening of spot return and futures premium",
        {"spot_file", "futures_file", "k", "imputation", "unitroot_mode", "unitroot_kmax"});
    std::string ur_mode;
    std::string ur_kmax;
    unitroot_cmd->add_option("--mode", ur_mode, "detrending: c | ct (alias of --unitroot-mode)");
    unitroot_cmd->add_option("--kmax", ur_kmax, "max augmentation order (alias of --unitroot-kmax)");
    auto [static_cmd, static_cli] =
        add_config_cmd("fit-static", "time-invariant fit with HAC errors and the constancy test",
                       data_keys);
    auto [tvp_cmd, tvp_cli] =
        add_config_cmd("fit-tvp", "time-varying slope path fit",
                       {"spot_file", "futures_file", "k", "imputation", "lambda", "prior",
                        "output_dir"});
    auto [band_cmd, band_cli] = add_config_cmd(
        "band", "bootstrap efficiency band under the unbiasedness null",
        {"spot_file", "futures_file", "k", "imputation", "lambda", "prior", "n_boot", "level",
         "seed", "lambda_policy", "threads", "output_dir"});
    auto [run_cmd, run_cli] = add_config_cmd("run", "full pipeline with report artifacts",
                                             all_keys);
    run_cmd->add_flag("--force-tvp", "run the TVP stage even when constancy is not rejected");

    auto* detect_cmd =
        app.add_subcommand("detect", "episode detection from an existing band CSV");
    std::string detect_band_file, detect_out = ".";
    detect_cmd->add_option("--band", detect_band_file, "band CSV (date,beta_hat,lower,upper)")
        ->required();
    detect_cmd->add_option("--output-dir", detect_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(sim_beta, sim_n, sim_k, sim_alpha, sim_sigma_u, sim_rho,
                                sim_premium_sigma, sim_seed, sim_start, sim_out);
        }
        if (describe_cmd->parsed()) return cmd_describe(describe_cli->resolve());
        if (unitroot_cmd->parsed()) {
            RunConfig config = unitroot_cli->resolve();
            if (!ur_mode.empty()) tvme::apply_config_entry(config, "unitroot_mode", ur_mode);
            if (!ur_kmax.empty()) tvme::apply_config_entry(config, "unitroot_kmax", ur_kmax);
            return cmd_unitroot(config);
        }
        if (static_cmd->parsed()) return cmd_fit_static(static_cli->resolve());
        if (tvp_cmd->parsed()) return cmd_fit_tvp(tvp_cli->resolve());
        if (band_cmd->parsed()) return cmd_band(band_cli->resolve());
        if (detect_cmd->parsed()) return cmd_detect(detect_band_file, detect_out);
        if (run_cmd->parsed()) {
            RunConfig config = run_cli->resolve();
            if (run_cmd->count("--force-tvp") > 0) {
                tvme::apply_config_entry(config, "force_tvp", "true");
            }
            return cmd_run(config);
        }
    } catch (const tvme::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const tvme::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const tvme::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
