// Acceptance suite: every release-gating behavior as one labeled check.
// Run with no arguments for the whole list, or --criterion N for one.
// Prints one [PASS]/[FAIL]/[SKIP] line per criterion; exit code is the
// number of failures.

#include "tvme/bootstrap.hpp"
#include "tvme/csv.hpp"
#include "tvme/error.hpp"
#include "tvme/impute.hpp"
#include "tvme/parallel.hpp"
#include "tvme/pipeline.hpp"
#include "tvme/rng.hpp"
#include "tvme/static_regression.hpp"
#include "tvme/synthetic.hpp"
#include "tvme/tvp.hpp"
#include "tvme/unitroot.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using tvme::AlignedSample;
using tvme::BandConfig;
using tvme::LambdaChoice;
namespace fs = std::filesystem;

struct Result {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << std::fixed << v;
    return ss.str();
}

AlignedSample scenario_sample(const tvme::ScenarioSpec& spec) {
    const auto m = tvme::simulate_market(spec);
    return tvme::align(m.spot, m.futures, spec.k);
}

// ---------------------------------------------------------------------------
// 1. Smoother equivalence: stacked GLS path == fixed-interval smoother path.
Result criterion_smoother_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    const double lambdas[] = {0.1, 1.0, 10.0, 100.0};
    std::atomic<double> worst{0.0};
    tvme::parallel_for(50, 0, [&](std::size_t i) {
        tvme::ScenarioSpec spec;
        spec.n = 200;
        spec.beta_path = i % 2 == 0 ? tvme::BetaPathSpec::random_walk(0.05, 1.0)
                                    : tvme::BetaPathSpec::step(0.4, 1.1, 100);
        spec.sigma_u = 0.05;
        spec.premium = tvme::Ar1Spec{0.6, 0.06};
        spec.seed = tvme::derive_seed(101, i);
        const auto sample = scenario_sample(spec);
        for (double lambda : lambdas) {
            const auto fit = tvme::tvp_fit(sample, LambdaChoice::fixed(lambda));
            const auto smoothed =
                tvme::kalman_smoother_path(sample, lambda, fit.beta0, fit.alpha);
            double local = 0.0;
            for (std::size_t t = 0; t < sample.n(); ++t) {
                local = std::max(local, std::abs(fit.beta_path[t] - smoothed[t]));
            }
            double cur = worst.load();
            while (local > cur && !worst.compare_exchange_weak(cur, local)) {
            }
        }
    });
    const double elapsed = seconds_since(start);
    Result r;
    r.pass = worst.load() < 1e-8 && elapsed < 30.0;
    r.detail = "max |stacked - smoother| = " + fmt(worst.load(), 12) + " (< 1e-8), " +
               fmt(elapsed, 1) + " s (< 30 s)";
    return r;
}

// ---------------------------------------------------------------------------
// 2. Flat limit: lambda = 1e12 path equals the static OLS slope.
Result criterion_flat_limit() {
    std::atomic<double> worst{0.0};
    tvme::parallel_for(20, 0, [&](std::size_t i) {
        tvme::ScenarioSpec spec;
        spec.n = 200;
        spec.beta_path = tvme::BetaPathSpec::random_walk(0.04, 0.8);
        spec.sigma_u = 0.05;
        spec.premium = tvme::Ar1Spec{0.5, 0.06};
        spec.seed = tvme::derive_seed(202, i);
        const auto sample = scenario_sample(spec);
        const auto fit = tvme::tvp_fit(sample, LambdaChoice::fixed(1e12));
        const double slope = tvme::ols_fit(sample).beta;
        double local = 0.0;
        for (double b : fit.beta_path) local = std::max(local, std::abs(b - slope));
        double cur = worst.load();
        while (local > cur && !worst.compare_exchange_weak(cur, local)) {
        }
    });
    Result r;
    r.pass = worst.load() < 1e-6;
    r.detail = "max |path - OLS slope| = " + fmt(worst.load(), 10) + " (< 1e-6), 20 samples";
    return r;
}

// ---------------------------------------------------------------------------
// 3. Band coverage under the null: the fitted path stays inside its own
// null band at roughly the nominal rate.
Result criterion_band_coverage() {
    const auto start = std::chrono::steady_clock::now();
    const int outer = 200;
    std::atomic<long> covered{0}, months{0};
    tvme::parallel_for(outer, 0, [&](std::size_t rep) {
        tvme::ScenarioSpec spec;
        spec.n = 500;
        spec.alpha_true = 0.0;
        spec.beta_path = tvme::BetaPathSpec::constant(1.0);
        spec.sigma_u = 0.05;
        spec.premium = tvme::Ar1Spec{0.5, 0.05};
        spec.seed = tvme::derive_seed(303, rep);
        const auto sample = scenario_sample(spec);
        const auto fit = tvme::tvp_fit(sample, LambdaChoice::auto_select());
        BandConfig config;
        config.n_boot = 1000;
        config.level = 0.95;
        config.seed = tvme::derive_seed(304, rep);
        config.threads = 1;  // the outer loop is already parallel
        const auto band = tvme::bootstrap_band(sample, config, fit);
        long local = 0;
        for (std::size_t t = 0; t < sample.n(); ++t) {
            if (fit.beta_path[t] >= band.lower[t] && fit.beta_path[t] <= band.upper[t]) ++local;
        }
        covered += local;
        months += static_cast<long>(sample.n());
    });
    const double rate = static_cast<double>(covered.load()) / static_cast<double>(months.load());
    Result r;
    r.pass = rate >= 0.92 && rate <= 0.98;
    r.detail = "average pointwise coverage = " + fmt(rate) + " (in [0.92, 0.98]), 200 x N=1000, " +
               fmt(seconds_since(start), 1) + " s";
    return r;
}

// ---------------------------------------------------------------------------
// 4. Detection power on a step path, with a bounded false-flag rate.
Result criterion_detection_power() {
    const int reps = 50;
    std::atomic<long> low_flagged{0}, low_total{0}, high_flagged{0}, high_total{0};
    tvme::parallel_for(reps, 0, [&](std::size_t rep) {
        tvme::ScenarioSpec spec;
        spec.n = 400;
        spec.beta_path = tvme::BetaPathSpec::step(0.2, 1.0, 200);
        spec.sigma_u = 0.05;
        spec.premium = tvme::Ar1Spec{0.7, 0.06};
        spec.seed = tvme::derive_seed(404, rep);
        const auto sample = scenario_sample(spec);
        const auto fit = tvme::tvp_fit(sample, LambdaChoice::auto_select());
        BandConfig config;
        config.n_boot = 1000;
        config.seed = tvme::derive_seed(405, rep);
        config.threads = 1;
        const auto band = tvme::bootstrap_band(sample, config, fit);
        const auto timeline = tvme::detect(fit, band);
        long low = 0, high = 0;
        for (std::size_t t = 0; t < 200; ++t) low += timeline.inefficient[t] ? 1 : 0;
        for (std::size_t t = 200; t < 400; ++t) high += timeline.inefficient[t] ? 1 : 0;
        low_flagged += low;
        low_total += 200;
        high_flagged += high;
        high_total += 200;
    });
    const double power =
        static_cast<double>(low_flagged.load()) / static_cast<double>(low_total.load());
    const double false_rate =
        static_cast<double>(high_flagged.load()) / static_cast<double>(high_total.load());
    Result r;
    r.pass = power >= 0.80 && false_rate <= 0.10;
    r.detail = "low-beta months flagged = " + fmt(power) + " (>= 0.80), false flags = " +
               fmt(false_rate) + " (<= 0.10), 50 replications";
    return r;
}

// ---------------------------------------------------------------------------
// 5. Hansen L_C calibration: size near 5% under the null, power under a
// random-walk slope.
Result criterion_hansen_calibration() {
    const int draws = 1000;
    std::atomic<int> null_rejects{0}, alt_rejects{0};
    tvme::parallel_for(draws, 0, [&](std::size_t i) {
        tvme::ScenarioSpec null_spec;
        null_spec.n = 500;
        null_spec.beta_path = tvme::BetaPathSpec::constant(1.0);
        null_spec.sigma_u = 0.05;
        null_spec.premium = tvme::Ar1Spec{0.5, 0.05};
        null_spec.seed = tvme::derive_seed(505, i);
        const auto null_sample = scenario_sample(null_spec);
        if (tvme::hansen_lc(tvme::ols_fit(null_sample), null_sample).reject_5pct) ++null_rejects;

        tvme::ScenarioSpec alt_spec = null_spec;
        alt_spec.beta_path = tvme::BetaPathSpec::random_walk(0.05, 1.0);
        alt_spec.seed = tvme::derive_seed(506, i);
        const auto alt_sample = scenario_sample(alt_spec);
        if (tvme::hansen_lc(tvme::ols_fit(alt_sample), alt_sample).reject_5pct) ++alt_rejects;
    });
    const double size = static_cast<double>(null_rejects.load()) / draws;
    const double power = static_cast<double>(alt_rejects.load()) / draws;
    Result r;
    r.pass = size >= 0.03 && size <= 0.07 && power >= 0.80;
    r.detail = "null rejection = " + fmt(size) + " (in [0.03, 0.07]), random-walk power = " +
               fmt(power) + " (>= 0.80), 1000 draws each";
    return r;
}

// ---------------------------------------------------------------------------
// 6. ADF-GLS behavior on white noise and a driftless random walk.
Result criterion_adf_gls() {
    const int draws = 1000;
    const std::size_t n = 500;
    std::atomic<int> wn_rejects{0}, rw_rejects{0}, wn_lag0{0};
    tvme::parallel_for(draws, 0, [&](std::size_t i) {
        tvme::Rng rng(tvme::derive_seed(606, i));
        std::vector<double> wn(n), rw(n);
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            wn[t] = rng.normal();
            acc += rng.normal();
            rw[t] = acc;
        }
        const auto r_wn = tvme::adf_gls(wn, tvme::Detrend::ConstantTrend, std::nullopt);
        const auto r_rw = tvme::adf_gls(rw, tvme::Detrend::ConstantTrend, std::nullopt);
        if (r_wn.statistic < tvme::kAdfGlsTrendCrit1pct) ++wn_rejects;
        if (r_rw.statistic < tvme::kAdfGlsTrendCrit1pct) ++rw_rejects;
        if (r_wn.lags == 0) ++wn_lag0;
    });
    const double wn_rate = static_cast<double>(wn_rejects.load()) / draws;
    const double rw_rate = static_cast<double>(rw_rejects.load()) / draws;
    const double lag0_rate = static_cast<double>(wn_lag0.load()) / draws;
    Result r;
    r.pass = wn_rate >= 0.99 && rw_rate >= 0.003 && rw_rate <= 0.03 && lag0_rate >= 0.80;
    r.detail = "white-noise rejection = " + fmt(wn_rate, 3) + " (>= 0.99), random-walk = " +
               fmt(rw_rate, 3) + " (in [0.003, 0.03]), lag-0 selection = " + fmt(lag0_rate, 3) +
               " (>= 0.80), 1000 draws, T=500";
    return r;
}

// ---------------------------------------------------------------------------
// 7. Determinism: identical configs give byte-identical CSV artifacts,
// independent of the parallelism degree.
Result criterion_determinism() {
    const fs::path root =
        fs::temp_directory_path() /
        ("tvme_acceptance_det_" +
         std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(root);

    tvme::ScenarioSpec spec;
    spec.n = 400;
    spec.beta_path = tvme::BetaPathSpec::step(0.2, 1.0, 200);
    spec.sigma_u = 0.05;
    spec.premium = tvme::Ar1Spec{0.7, 0.06};
    spec.seed = 4242;
    const auto m = tvme::simulate_market(spec);
    tvme::write_price_csv(root / "spot.csv", m.spot);
    tvme::write_price_csv(root / "futures.csv", m.futures);

    auto run_once = [&](const std::string& name, int threads) {
        tvme::RunConfig config;
        config.spot_file = (root / "spot.csv").string();
        config.futures_file = (root / "futures.csv").string();
        config.k = 1;
        config.n_boot = 1000;
        config.seed = 99;
        config.threads = threads;
        config.force_tvp = true;
        config.output_dir = (root / name).string();
        tvme::render_tables(tvme::run_pipeline(config), config);
        return config.output_dir;
    };
    const std::string a = run_once("a", 1);
    const std::string b = run_once("b", 2);
    const std::string c = run_once("c", 4);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool ok = true;
    std::string bad;
    for (const char* name :
         {"table1.csv", "table2.csv", "tvp.csv", "band.csv", "episodes.csv"}) {
        const std::string fa = slurp(fs::path(a) / name);
        if (fa.empty() || fa != slurp(fs::path(b) / name) || fa != slurp(fs::path(c) / name)) {
            ok = false;
            bad = name;
            break;
        }
    }
    fs::remove_all(root);
    Result r;
    r.pass = ok;
    r.detail = ok ? "all CSV artifacts byte-identical across runs at threads 1/2/4"
                  : ("mismatch in " + bad);
    return r;
}

// ---------------------------------------------------------------------------
// 8. Performance envelope: full pipeline, n ~ 620 months, N = 5000.
Result criterion_performance() {
    const fs::path root =
        fs::temp_directory_path() /
        ("tvme_acceptance_perf_" +
         std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(root);

    tvme::ScenarioSpec spec;
    spec.n = 620;
    spec.k = 3;
    spec.beta_path = tvme::BetaPathSpec::step(0.3, 1.0, 310);
    spec.sigma_u = 0.05;
    spec.premium = tvme::Ar1Spec{0.7, 0.06};
    spec.seed = 888;
    const auto m = tvme::simulate_market(spec);
    tvme::write_price_csv(root / "spot.csv", m.spot);
    tvme::write_price_csv(root / "futures.csv", m.futures);

    tvme::RunConfig config;
    config.spot_file = (root / "spot.csv").string();
    config.futures_file = (root / "futures.csv").string();
    config.k = 3;
    config.n_boot = 5000;
    config.seed = 11;
    config.force_tvp = true;
    config.output_dir = (root / "out").string();

    const auto start = std::chrono::steady_clock::now();
    const auto bundle = tvme::run_pipeline(config);
    tvme::render_tables(bundle, config);
    const double elapsed = seconds_since(start);

    const bool artifacts = fs::exists(fs::path(config.output_dir) / "band.csv") &&
                           bundle.band.has_value() &&
                           bundle.band->replications == 5000;
    fs::remove_all(root);
    Result r;
    r.pass = elapsed < 60.0 && artifacts;
    r.detail = "n=620, N=5000 pipeline in " + fmt(elapsed, 2) + " s (< 60 s)";
    return r;
}

// ---------------------------------------------------------------------------
// 9. Optional reproduction against a user-supplied reference dataset.
// Layout: $TVME_REFERENCE_DIR/expected.json with entries
//   [{"label": ..., "spot": <csv>, "futures": <csv>, "k": <months>,
//     "table1": {"sr_mean": ..., "sr_sd": ..., "n": ...,
//                "sr_adf": ..., "fp_adf": ...},
//     "table2": {"alpha": ..., "se_alpha": ..., "beta": ..., "se_beta": ...,
//                "r2_adj": ..., "lc": ...}}]
// Paths are relative to the directory. Absent variable or file => SKIP.
Result criterion_reference_reproduction() {
    const char* dir_env = std::getenv("TVME_REFERENCE_DIR");
    Result r;
    if (dir_env == nullptr || !fs::exists(fs::path(dir_env) / "expected.json")) {
        r.skipped = true;
        r.pass = true;
        r.detail = "no reference dataset supplied (set TVME_REFERENCE_DIR to enable)";
        return r;
    }
    const fs::path dir(dir_env);
    nlohmann::json expected;
    std::ifstream(dir / "expected.json") >> expected;

    // Published-precision tolerances, fixed here.
    const double tol_stats = 0.5e-4;   // descriptive statistics: exact to 4 decimals
    const double tol_adf = 0.05;       // ADF-GLS statistic
    const double tol_coef = 0.5e-4;    // alpha, beta to published precision
    const double tol_se = 0.002;       // HAC standard errors
    const double tol_loose = 0.02;     // adjusted R^2 / L_C, bandwidth-sensitive

    bool all_ok = true;
    std::string detail;
    for (const auto& entry : expected) {
        const std::string label = entry.value("label", "entry");
        tvme::PriceSeries spot =
            tvme::read_price_csv(dir / entry.at("spot").get<std::string>());
        tvme::PriceSeries futures =
            tvme::read_price_csv(dir / entry.at("futures").get<std::string>());
        if (spot.has_gaps()) spot = tvme::impute_missing(spot);
        if (futures.has_gaps()) futures = tvme::impute_missing(futures);
        const auto sample = tvme::align(spot, futures, entry.at("k").get<int>());
        const auto stats = tvme::describe(sample);
        const auto fit = tvme::ols_fit(sample);
        const auto lc = tvme::hansen_lc(fit, sample);

        auto check = [&](const char* what, double got, double want, double tol) {
            if (std::abs(got - want) > tol) {
                all_ok = false;
                detail += label + "." + what + ": got " + fmt(got, 4) + ", want " +
                          fmt(want, 4) + "; ";
            }
        };
        if (entry.contains("table1")) {
            const auto& t1 = entry["table1"];
            if (t1.contains("sr_mean")) check("sr_mean", stats.mean_x, t1["sr_mean"], tol_stats);
            if (t1.contains("sr_sd")) check("sr_sd", stats.sd_x, t1["sr_sd"], tol_stats);
            if (t1.contains("fp_mean")) check("fp_mean", stats.mean_y, t1["fp_mean"], tol_stats);
            if (t1.contains("fp_sd")) check("fp_sd", stats.sd_y, t1["fp_sd"], tol_stats);
            if (t1.contains("n") && stats.n != t1["n"].get<std::size_t>()) {
                all_ok = false;
                detail += label + ".n: got " + std::to_string(stats.n) + "; ";
            }
            if (t1.contains("sr_adf")) {
                const auto ur = tvme::adf_gls(sample.x, tvme::Detrend::ConstantTrend, {});
                check("sr_adf", ur.statistic, t1["sr_adf"], tol_adf);
            }
            if (t1.contains("fp_adf")) {
                const auto ur = tvme::adf_gls(sample.y, tvme::Detrend::ConstantTrend, {});
                check("fp_adf", ur.statistic, t1["fp_adf"], tol_adf);
            }
        }
        if (entry.contains("table2")) {
            const auto& t2 = entry["table2"];
            if (t2.contains("alpha")) check("alpha", fit.alpha, t2["alpha"], tol_coef);
            if (t2.contains("beta")) check("beta", fit.beta, t2["beta"], tol_coef);
            if (t2.contains("se_alpha")) check("se_alpha", fit.se_alpha, t2["se_alpha"], tol_se);
            if (t2.contains("se_beta")) check("se_beta", fit.se_beta, t2["se_beta"], tol_se);
            if (t2.contains("r2_adj")) check("r2_adj", fit.r2_adj, t2["r2_adj"], tol_loose);
            if (t2.contains("lc")) check("lc", lc.lc_stat, t2["lc"], tol_loose);
        }
    }
    r.pass = all_ok;
    r.detail = all_ok ? "reference values reproduced within pinned tolerances"
                      : detail.substr(0, 400);
    return r;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Result()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "smoother equivalence", criterion_smoother_equivalence},
        {2, "flat limit matches static OLS", criterion_flat_limit},
        {3, "band coverage under the null", criterion_band_coverage},
        {4, "step-path detection power", criterion_detection_power},
        {5, "Hansen L_C calibration", criterion_hansen_calibration},
        {6, "ADF-GLS size, power, lag selection", criterion_adf_gls},
        {7, "pipeline determinism", criterion_determinism},
        {8, "performance envelope", criterion_performance},
        {9, "reference dataset reproduction (conditional)", criterion_reference_reproduction},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            wanted.push_back(std::atoi(argv[++i]));
        } else if (std::strcmp(argv[i], "--list") == 0) {
            for (const auto& c : criteria) std::cout << c.id << ": " << c.name << "\n";
            return 0;
        } else {
            std::cerr << "usage: acceptance [--list] [--criterion N]...\n";
            return 2;
        }
    }

    int failures = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) {
            continue;
        }
        Result result;
        try {
            result = c.fn();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("exception: ") + e.what();
        }
        const char* tag = result.skipped ? "SKIP" : (result.pass ? "PASS" : "FAIL");
        std::cout << "[" << tag << "] criterion " << c.id << ": " << c.name << " — "
                  << result.detail << "\n";
        if (!result.pass) ++failures;
    }
    return failures;
}
