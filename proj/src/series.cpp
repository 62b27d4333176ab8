#include "tvme/series.hpp"

#include "tvme/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvme {

namespace {

std::string positions_of_gaps(const PriceSeries& s, std::size_t limit = 8) {
    std::string out;
    std::size_t shown = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.values[i].has_value()) continue;
        if (shown == limit) {
            out += ", ...";
            break;
        }
        if (shown > 0) out += ", ";
        out += s.month_at(i).str();
        ++shown;
    }
    return out;
}

void require_gap_free(const PriceSeries& s, const char* op) {
    if (s.has_gaps()) {
        throw ValidationError(std::string(op) + ": series '" + s.label +
                              "' has missing values (" + positions_of_gaps(s) +
                              "); run imputation first");
    }
}

void require_horizon(int k, std::size_t len, const char* op) {
    if (k < 1) {
        throw ValidationError(std::string(op) + ": horizon k must be >= 1, got " +
                              std::to_string(k));
    }
    if (static_cast<std::size_t>(k) >= len) {
        throw ValidationError(std::string(op) + ": horizon k=" + std::to_string(k) +
                              " too large for series of length " + std::to_string(len));
    }
}

}  // namespace

PriceSeries PriceSeries::create(Month start, std::vector<std::optional<double>> values,
                                std::string label) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].has_value()) continue;
        double v = *values[i];
        if (!(std::isfinite(v) && v > 0.0)) {
            throw ValidationError("price series '" + label + "': value at " +
                                  start.plus(static_cast<int>(i)).str() +
                                  " must be a finite positive price, got " + std::to_string(v));
        }
    }
    return PriceSeries{start, std::move(values), std::move(label)};
}

bool PriceSeries::has_gaps() const {
    return std::any_of(values.begin(), values.end(),
                       [](const auto& v) { return !v.has_value(); });
}

std::size_t PriceSeries::gap_count() const {
    return static_cast<std::size_t>(std::count_if(
        values.begin(), values.end(), [](const auto& v) { return !v.has_value(); }));
}

std::vector<double> spot_return(const PriceSeries& spot, int k) {
    require_gap_free(spot, "spot_return");
    require_horizon(k, spot.size(), "spot_return");
    const std::size_t n = spot.size() - static_cast<std::size_t>(k);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        out[t] = std::log(*spot.values[t + k]) - std::log(*spot.values[t]);
    }
    return out;
}

std::vector<double> futures_premium(const PriceSeries& spot, const PriceSeries& futures, int k) {
    if (spot.start != futures.start) {
        throw ValidationError("futures_premium: series start at " + spot.start.str() + " vs " +
                              futures.start.str() + "; align calendars first");
    }
    require_gap_free(spot, "futures_premium");
    require_gap_free(futures, "futures_premium");
    const std::size_t len = std::min(spot.size(), futures.size());
    require_horizon(k, len, "futures_premium");
    const std::size_t n = len - static_cast<std::size_t>(k);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        out[t] = std::log(*futures.values[t]) - std::log(*spot.values[t]);
    }
    return out;
}

namespace {

PriceSeries window(const PriceSeries& s, std::size_t from, std::size_t count) {
    PriceSeries out;
    out.start = s.month_at(from);
    out.label = s.label;
    out.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(from),
                      s.values.begin() + static_cast<std::ptrdiff_t>(from + count));
    return out;
}

}  // namespace

AlignedSample align(const PriceSeries& spot, const PriceSeries& futures, int k) {
    if (k < 1) {
        throw ValidationError("align: horizon k must be >= 1, got " + std::to_string(k));
    }
    const Month lo = std::max(spot.start, futures.start);
    const Month spot_end = spot.start.plus(static_cast<int>(spot.size()));
    const Month fut_end = futures.start.plus(static_cast<int>(futures.size()));
    const Month hi = std::min(spot_end, fut_end);  // exclusive
    const int overlap = months_between(lo, hi);
    if (overlap <= 0) {
        throw ValidationError("align: series calendars do not overlap (spot " + spot.start.str() +
                              ".." + spot_end.plus(-1).str() + ", futures " + futures.start.str() +
                              ".." + fut_end.plus(-1).str() + ")");
    }
    if (overlap < k + 2) {
        throw ValidationError("align: overlap of " + std::to_string(overlap) +
                              " months is too short for horizon k=" + std::to_string(k));
    }
    const PriceSeries s = window(spot, static_cast<std::size_t>(months_between(spot.start, lo)),
                                 static_cast<std::size_t>(overlap));
    const PriceSeries f =
        window(futures, static_cast<std::size_t>(months_between(futures.start, lo)),
               static_cast<std::size_t>(overlap));
    require_gap_free(s, "align");
    require_gap_free(f, "align");

    AlignedSample sample;
    sample.horizon_k = k;
    sample.start = lo;
    sample.x = spot_return(s, k);
    sample.y = futures_premium(s, f, k);
    return sample;
}

namespace {

struct Moments {
    double mean, sd, min, max;
};

Moments moments(const std::vector<double>& v) {
    Moments m{0, 0, v[0], v[0]};
    for (double val : v) {
        m.mean += val;
        m.min = std::min(m.min, val);
        m.max = std::max(m.max, val);
    }
    m.mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double val : v) ss += (val - m.mean) * (val - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return m;
}

}  // namespace

SampleStats describe(const AlignedSample& sample) {
    if (sample.n() < 2) {
        throw ValidationError("describe: need at least 2 observations, got " +
                              std::to_string(sample.n()));
    }
    const Moments mx = moments(sample.x);
    const Moments my = moments(sample.y);
    return SampleStats{mx.mean, mx.sd, mx.min, mx.max, my.mean, my.sd, my.min, my.max, sample.n()};
}

}  // namespace tvme
