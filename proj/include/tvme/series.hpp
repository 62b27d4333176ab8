#pragma once

#include "tvme/calendar.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tvme {

/// A monthly price series. The index is contiguous: values[i] belongs to
/// start.plus(i), and a month with no observation holds an explicit nullopt
/// rather than being skipped. Present values are strictly positive and
/// finite; construct through create() to get that checked.
struct PriceSeries {
    Month start;
    std::vector<std::optional<double>> values;
    std::string label;

    static PriceSeries create(Month start, std::vector<std::optional<double>> values,
                              std::string label = {});

    std::size_t size() const { return values.size(); }
    Month month_at(std::size_t i) const { return start.plus(static_cast<int>(i)); }
    bool has_gaps() const;
    std::size_t gap_count() const;
};

/// Paired (spot-return, futures-premium) observations for a k-month contract.
/// x[t] = log S_{t+k} - log S_t and y[t] = log F_t - log S_t, both in log
/// units, with no missing values; `start` is the month of t=0.
struct AlignedSample {
    int horizon_k = 1;
    std::vector<double> x;
    std::vector<double> y;
    Month start;

    std::size_t n() const { return x.size(); }
};

/// k-month log returns of a gap-free spot series: out[t] = log(spot[t+k]) -
/// log(spot[t]), length size()-k.
std::vector<double> spot_return(const PriceSeries& spot, int k);

/// Log premium of the k-month contract quote over spot on a shared calendar:
/// out[t] = log(futures[t]) - log(spot[t]), truncated to the same length as
/// spot_return (the last k months are dropped from both).
std::vector<double> futures_premium(const PriceSeries& spot, const PriceSeries& futures, int k);

/// Intersect the two calendars and build the aligned regression sample.
AlignedSample align(const PriceSeries& spot, const PriceSeries& futures, int k);

/// Sample moments of an aligned sample (sd uses the n-1 denominator).
struct SampleStats {
    double mean_x = 0, sd_x = 0, min_x = 0, max_x = 0;
    double mean_y = 0, sd_y = 0, min_y = 0, max_y = 0;
    std::size_t n = 0;
};

SampleStats describe(const AlignedSample& sample);

}  // namespace tvme
