#pragma once

#include "tvme/series.hpp"

namespace tvme {

/// Fill the gaps of a monthly price series with smoothed means from a
/// structural state-space model (local level + 11-dummy monthly seasonal),
/// fit by maximum likelihood on the log scale and exponentiated back.
/// Present values are returned unchanged; a gap-free series is returned as
/// is.
///
/// Requirements: at least 24 present values, first and last months present,
/// and no gap run of 12 or more consecutive months (longer runs would be
/// extrapolation, not interpolation). Violations raise ValidationError with
/// the offending positions.
PriceSeries impute_missing(const PriceSeries& series);

}  // namespace tvme
