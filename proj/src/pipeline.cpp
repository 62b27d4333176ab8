#include "tvme/pipeline.hpp"

#include "tvme/csv.hpp"
#include "tvme/error.hpp"
#include "tvme/impute.hpp"
#include "tvme/version.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tvme {

namespace {

using nlohmann::json;

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw ValidationError("config: expected boolean, got '" + v + "'");
}

long long parse_int(const std::string& v) {
    long long out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ValidationError("config: expected integer, got '" + v + "'");
    }
    return out;
}

double parse_double(const std::string& v) {
    double out = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ValidationError("config: expected number, got '" + v + "'");
    }
    return out;
}

template <typename F>
auto run_stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError("[stage " + std::string(name) + "] " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError("[stage " + std::string(name) + "] " + e.what());
    } catch (const IoError& e) {
        throw IoError("[stage " + std::string(name) + "] " + e.what());
    }
}

}  // namespace

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "spot_file") {
        config.spot_file = value;
    } else if (key == "futures_file") {
        config.futures_file = value;
    } else if (key == "k") {
        config.k = static_cast<int>(parse_int(value));
    } else if (key == "imputation") {
        config.imputation = parse_bool(value);
    } else if (key == "unitroot_mode") {
        if (value == "c") {
            config.unitroot_mode = Detrend::Constant;
        } else if (value == "ct") {
            config.unitroot_mode = Detrend::ConstantTrend;
        } else {
            throw ValidationError("config: unitroot_mode must be 'c' or 'ct', got '" + value +
                                  "'");
        }
    } else if (key == "unitroot_kmax") {
        if (value == "auto" || value.empty()) {
            config.unitroot_kmax.reset();
        } else {
            config.unitroot_kmax = static_cast<int>(parse_int(value));
        }
    } else if (key == "n_boot") {
        config.n_boot = static_cast<int>(parse_int(value));
    } else if (key == "level") {
        config.level = parse_double(value);
    } else if (key == "seed") {
        config.seed = static_cast<std::uint64_t>(parse_int(value));
    } else if (key == "lambda_policy") {
        if (value == "fixed") {
            config.lambda_policy = BandConfig::LambdaPolicy::Fixed;
        } else if (value == "per-replication") {
            config.lambda_policy = BandConfig::LambdaPolicy::PerReplication;
        } else {
            throw ValidationError(
                "config: lambda_policy must be 'fixed' or 'per-replication', got '" + value + "'");
        }
    } else if (key == "lambda") {
        if (value != "auto") parse_double(value);  // validate now, fail fast
        config.lambda = value;
    } else if (key == "prior") {
        if (value != "ols" && value != "gls") parse_double(value);
        config.prior = value;
    } else if (key == "force_tvp") {
        config.force_tvp = parse_bool(value);
    } else if (key == "threads") {
        config.threads = static_cast<int>(parse_int(value));
    } else if (key == "output_dir") {
        config.output_dir = value;
    } else if (key == "formats") {
        config.write_csv_files = value.find("csv") != std::string::npos;
        config.write_json_files = value.find("json") != std::string::npos;
        if (!config.write_csv_files && !config.write_json_files) {
            throw ValidationError("config: formats must mention 'csv' and/or 'json', got '" +
                                  value + "'");
        }
    } else {
        throw ValidationError("config: unknown key '" + key + "'");
    }
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open config file '" + file.string() + "'");
    }
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        const auto a = line.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = line.find_last_not_of(" \t");
        line = line.substr(a, b - a + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                                  ": expected key=value, got '" + line + "'");
        }
        auto strip_ws = [](std::string s) {
            const auto x = s.find_first_not_of(" \t");
            if (x == std::string::npos) return std::string{};
            const auto y = s.find_last_not_of(" \t");
            return s.substr(x, y - x + 1);
        };
        try {
            apply_config_entry(config, strip_ws(line.substr(0, eq)), strip_ws(line.substr(eq + 1)));
        } catch (const ValidationError& e) {
            throw ValidationError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

std::vector<std::pair<std::string, std::string>> serialize_config(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("spot_file", c.spot_file);
    out.emplace_back("futures_file", c.futures_file);
    out.emplace_back("k", std::to_string(c.k));
    out.emplace_back("imputation", c.imputation ? "true" : "false");
    out.emplace_back("unitroot_mode", c.unitroot_mode == Detrend::Constant ? "c" : "ct");
    out.emplace_back("unitroot_kmax",
                     c.unitroot_kmax ? std::to_string(*c.unitroot_kmax) : "auto");
    out.emplace_back("n_boot", std::to_string(c.n_boot));
    out.emplace_back("level", format_double(c.level));
    out.emplace_back("seed", std::to_string(c.seed));
    out.emplace_back("lambda_policy",
                     c.lambda_policy == BandConfig::LambdaPolicy::Fixed ? "fixed"
                                                                        : "per-replication");
    out.emplace_back("lambda", c.lambda);
    out.emplace_back("prior", c.prior);
    out.emplace_back("force_tvp", c.force_tvp ? "true" : "false");
    out.emplace_back("threads", std::to_string(c.threads));
    out.emplace_back("output_dir", c.output_dir);
    std::string formats;
    if (c.write_csv_files) formats += "csv";
    if (c.write_json_files) formats += formats.empty() ? "json" : ",json";
    out.emplace_back("formats", formats);
    return out;
}

std::string config_hash(const RunConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [key, value] : serialize_config(config)) {
        mix(key);
        mix("=");
        mix(value);
        mix("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

LambdaChoice lambda_from_config(const RunConfig& config) {
    if (config.lambda == "auto") return LambdaChoice::auto_select();
    return LambdaChoice::fixed(parse_double(config.lambda));
}

PriorChoice prior_from_config(const RunConfig& config) {
    if (config.prior == "ols") return PriorChoice::ols();
    if (config.prior == "gls") return PriorChoice::gls();
    return PriorChoice::fixed(parse_double(config.prior));
}

void validate_config(const RunConfig& config) {
    if (config.spot_file.empty() || config.futures_file.empty()) {
        throw ValidationError("config: spot_file and futures_file are required");
    }
    for (const auto& f : {config.spot_file, config.futures_file}) {
        if (!std::filesystem::exists(f)) {
            throw ValidationError("config: input file '" + f + "' does not exist");
        }
    }
    if (config.k < 1) {
        throw ValidationError("config: k must be >= 1, got " + std::to_string(config.k));
    }
    if (!(config.level > 0.0 && config.level < 1.0)) {
        throw ValidationError("config: level must lie in (0,1)");
    }
    if (config.n_boot < 200) {
        throw ValidationError("config: n_boot must be >= 200, got " +
                              std::to_string(config.n_boot));
    }
    lambda_from_config(config);
    prior_from_config(config);
}

}  // namespace

ReportBundle run_pipeline(const RunConfig& config) {
    // Fail fast: everything the run needs must exist and parse before any
    // computation or output happens.
    validate_config(config);
    PriceSeries spot = run_stage("ingest", [&] { return read_price_csv(config.spot_file); });
    PriceSeries futures =
        run_stage("ingest", [&] { return read_price_csv(config.futures_file); });

    ReportBundle bundle;
    if (config.imputation) {
        const std::size_t spot_gaps = spot.gap_count();
        const std::size_t fut_gaps = futures.gap_count();
        if (spot_gaps > 0) {
            spot = run_stage("impute", [&] { return impute_missing(spot); });
            bundle.imputed_spot = spot_gaps;
        }
        if (fut_gaps > 0) {
            futures = run_stage("impute", [&] { return impute_missing(futures); });
            bundle.imputed_futures = fut_gaps;
        }
    }

    bundle.sample = run_stage("align", [&] { return align(spot, futures, config.k); });
    bundle.stats = run_stage("describe", [&] { return describe(bundle.sample); });
    bundle.unitroot_x = run_stage("unitroot", [&] {
        return adf_gls(bundle.sample.x, config.unitroot_mode, config.unitroot_kmax);
    });
    bundle.unitroot_y = run_stage("unitroot", [&] {
        return adf_gls(bundle.sample.y, config.unitroot_mode, config.unitroot_kmax);
    });
    bundle.static_fit = run_stage("fit-static", [&] { return ols_fit(bundle.sample); });
    bundle.lc = run_stage("constancy-test",
                          [&] { return hansen_lc(*bundle.static_fit, bundle.sample); });
    bundle.static_fit->lc_stat = bundle.lc->lc_stat;

    if (bundle.lc->reject_5pct || config.force_tvp) {
        bundle.tvp = run_stage("fit-tvp", [&] {
            return tvp_fit(bundle.sample, lambda_from_config(config), prior_from_config(config));
        });
        BandConfig band_config;
        band_config.n_boot = config.n_boot;
        band_config.level = config.level;
        band_config.seed = config.seed;
        band_config.lambda_policy = config.lambda_policy;
        band_config.threads = config.threads;
        bundle.band = run_stage(
            "band", [&] { return bootstrap_band(bundle.sample, band_config, *bundle.tvp); });
        bundle.timeline = run_stage("detect", [&] { return detect(*bundle.tvp, *bundle.band); });
        bundle.tvp_ran = true;
    } else {
        bundle.tvp_skipped_by_gate = true;
    }
    return bundle;
}

namespace {

json unitroot_json(const AdfGlsResult& r) {
    return json{{"statistic", r.statistic},
                {"lags", r.lags},
                {"phi_hat", r.phi_hat},
                {"adf_coef", r.adf_coef},
                {"mode", r.detrending == Detrend::Constant ? "c" : "ct"},
                {"n", r.n}};
}

}  // namespace

void render_tables(const ReportBundle& bundle, const RunConfig& config) {
    std::vector<std::string> missing;
    if (!bundle.stats) missing.push_back("describe");
    if (!bundle.unitroot_x || !bundle.unitroot_y) missing.push_back("unitroot");
    if (!bundle.static_fit) missing.push_back("fit-static");
    if (!bundle.lc) missing.push_back("constancy-test");
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) {
            if (!list.empty()) list += ", ";
            list += m;
        }
        throw ValidationError("render_tables: bundle is missing stages: " + list);
    }

    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);

    const SampleStats& st = *bundle.stats;
    const AdfGlsResult& ux = *bundle.unitroot_x;
    const AdfGlsResult& uy = *bundle.unitroot_y;

    if (config.write_csv_files) {
        CsvTable t1;
        t1.header = {"quantity", "spot_return", "futures_premium"};
        t1.rows = {
            {"mean", format_double(st.mean_x), format_double(st.mean_y)},
            {"sd", format_double(st.sd_x), format_double(st.sd_y)},
            {"min", format_double(st.min_x), format_double(st.min_y)},
            {"max", format_double(st.max_x), format_double(st.max_y)},
            {"adf_gls", format_double(ux.statistic), format_double(uy.statistic)},
            {"lags", std::to_string(ux.lags), std::to_string(uy.lags)},
            {"phi_hat", format_double(ux.phi_hat), format_double(uy.phi_hat)},
            {"n", std::to_string(st.n), std::to_string(st.n)},
        };
        write_csv(dir / "table1.csv", t1);

        const StaticFit& f = *bundle.static_fit;
        CsvTable t2;
        t2.header = {"alpha", "se_alpha", "beta", "se_beta", "r2_adj", "lc", "decision"};
        t2.rows = {{format_double(f.alpha), format_double(f.se_alpha), format_double(f.beta),
                    format_double(f.se_beta), format_double(f.r2_adj),
                    format_double(bundle.lc->lc_stat),
                    bundle.lc->reject_5pct ? "reject-constancy" : "constancy-not-rejected"}};
        write_csv(dir / "table2.csv", t2);
    }

    if (config.write_json_files) {
        json j1{{"n", st.n},
                {"spot_return",
                 {{"mean", st.mean_x}, {"sd", st.sd_x}, {"min", st.min_x}, {"max", st.max_x}}},
                {"futures_premium",
                 {{"mean", st.mean_y}, {"sd", st.sd_y}, {"min", st.min_y}, {"max", st.max_y}}},
                {"unitroot",
                 {{"spot_return", unitroot_json(ux)}, {"futures_premium", unitroot_json(uy)}}}};
        std::ofstream(dir / "table1.json") << j1.dump(2) << '\n';

        const StaticFit& f = *bundle.static_fit;
        json j2{{"alpha", f.alpha},
                {"se_alpha", f.se_alpha},
                {"beta", f.beta},
                {"se_beta", f.se_beta},
                {"r2_adj", f.r2_adj},
                {"hac_bandwidth", f.hac_bandwidth},
                {"lc", bundle.lc->lc_stat},
                {"lc_critical_value_5pct", bundle.lc->critical_value},
                {"reject_constancy_5pct", bundle.lc->reject_5pct}};
        std::ofstream(dir / "table2.json") << j2.dump(2) << '\n';
    }

    if (bundle.tvp_ran) {
        const TvpFit& fit = *bundle.tvp;
        const EfficiencyBand& band = *bundle.band;
        const EfficiencyTimeline& timeline = *bundle.timeline;

        if (config.write_csv_files) {
            CsvTable tvp_table;
            tvp_table.header = {"date", "beta_hat"};
            for (std::size_t t = 0; t < fit.beta_path.size(); ++t) {
                tvp_table.rows.push_back({bundle.sample.start.plus(static_cast<int>(t)).str(),
                                          format_double(fit.beta_path[t])});
            }
            write_csv(dir / "tvp.csv", tvp_table);

            CsvTable band_table;
            band_table.header = {"date", "beta_hat", "lower", "upper", "flag"};
            for (std::size_t t = 0; t < fit.beta_path.size(); ++t) {
                band_table.rows.push_back(
                    {bundle.sample.start.plus(static_cast<int>(t)).str(),
                     format_double(fit.beta_path[t]), format_double(band.lower[t]),
                     format_double(band.upper[t]),
                     timeline.inefficient[t] ? "inefficient" : "efficient"});
            }
            write_csv(dir / "band.csv", band_table);

            CsvTable ep;
            ep.header = {"start", "end", "months", "mean_excursion"};
            for (const Episode& e : timeline.episodes) {
                ep.rows.push_back({e.first_month.str(), e.last_month.str(),
                                   std::to_string(e.length()),
                                   format_double(e.mean_excursion)});
            }
            write_csv(dir / "episodes.csv", ep);
        }

        if (config.write_json_files) {
            json jt{{"alpha", fit.alpha},
                    {"lambda", fit.lambda},
                    {"loglik", fit.loglik},
                    {"beta0", fit.beta0},
                    {"sigma_u", fit.sigma_u}};
            std::ofstream(dir / "tvp.json") << jt.dump(2) << '\n';
        }
    }

    // Manifest: enough to re-run and to check reproducibility.
    json manifest{{"tool", kToolName},
                  {"version", kToolVersion},
                  {"seed", config.seed},
                  {"config_hash", config_hash(config)},
                  {"config", json::object()}};
    for (const auto& [key, value] : serialize_config(config)) {
        manifest["config"][key] = value;
    }
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

}  // namespace tvme
