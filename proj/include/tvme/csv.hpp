#pragma once

#include "tvme/series.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tvme {

/// Render a double with 15 significant digits (general format), enough to
/// reconstruct the value and stable across runs.
std::string format_double(double v);

/// Read the standard series schema: header "date,price", one row per month,
/// date as YYYY-MM, price decimal or empty (= missing). Months must be
/// contiguous; a skipped row is an error, not an implicit gap.
PriceSeries read_price_csv(const std::filesystem::path& file, std::string label = {});

void write_price_csv(const std::filesystem::path& file, const PriceSeries& series);

/// Minimal string table for report output.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& file, const CsvTable& table);

CsvTable read_csv(const std::filesystem::path& file);

}  // namespace tvme
