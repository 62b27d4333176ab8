#pragma once

#include "tvme/bootstrap.hpp"
#include "tvme/series.hpp"
#include "tvme/static_regression.hpp"
#include "tvme/tvp.hpp"
#include "tvme/unitroot.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tvme {

/// Everything one batch run needs. Loadable from a flat key=value file with
/// every key overridable by a CLI flag.
struct RunConfig {
    std::string spot_file;
    std::string futures_file;
    int k = 1;
    bool imputation = true;
    Detrend unitroot_mode = Detrend::ConstantTrend;
    std::optional<int> unitroot_kmax;
    int n_boot = 5000;
    double level = 0.95;
    std::uint64_t seed = 0;
    BandConfig::LambdaPolicy lambda_policy = BandConfig::LambdaPolicy::Fixed;
    std::string lambda = "auto";  // "auto" or a positive number
    std::string prior = "ols";    // "ols", "gls", or a number
    bool force_tvp = false;
    int threads = 0;
    std::string output_dir = ".";
    bool write_csv_files = true;
    bool write_json_files = true;
};

/// Parse a flat key=value config file (one pair per line, '#' comments).
RunConfig load_config(const std::filesystem::path& file);

/// Apply a single "key=value" override; throws ValidationError for unknown
/// keys or bad values.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

/// Canonical (key, value) serialization of the effective config; the
/// manifest hash is computed over exactly these lines.
std::vector<std::pair<std::string, std::string>> serialize_config(const RunConfig& config);

/// FNV-1a 64-bit over the canonical serialization, hex-encoded.
std::string config_hash(const RunConfig& config);

struct ReportBundle {
    AlignedSample sample;
    std::optional<SampleStats> stats;
    std::optional<AdfGlsResult> unitroot_x;  // spot return
    std::optional<AdfGlsResult> unitroot_y;  // futures premium
    std::optional<StaticFit> static_fit;
    std::optional<HansenLc> lc;
    bool tvp_ran = false;
    bool tvp_skipped_by_gate = false;
    std::optional<TvpFit> tvp;
    std::optional<EfficiencyBand> band;
    std::optional<EfficiencyTimeline> timeline;
    std::size_t imputed_spot = 0;
    std::size_t imputed_futures = 0;
};

/// Execute ingest -> impute -> align -> descriptive + unit-root block ->
/// static fit + constancy test -> (if constancy rejected at 5% or forced)
/// time-varying fit + bootstrap band + episode detection. Inputs are
/// validated before any computation starts; stage errors carry the stage
/// name.
ReportBundle run_pipeline(const RunConfig& config);

/// Write the report artifacts (table1/table2 blocks, slope path, band,
/// episodes, manifest) to config.output_dir in the configured formats.
/// Throws ValidationError listing the missing stages when the bundle lacks
/// the core blocks.
void render_tables(const ReportBundle& bundle, const RunConfig& config);

}  // namespace tvme
