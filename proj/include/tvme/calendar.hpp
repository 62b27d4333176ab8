#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace tvme {

/// A calendar month (year, month). Arithmetic is month-granular; there is no
/// day component anywhere in the pipeline.
struct Month {
    int year = 1900;
    int month = 1;  // 1..12

    /// Parse "YYYY-MM". Throws ValidationError on malformed input.
    static Month parse(std::string_view text);

    /// Format as "YYYY-MM" (zero-padded month).
    std::string str() const;

    /// The month `count` steps ahead (negative counts step back).
    Month plus(int count) const;

    friend auto operator<=>(const Month&, const Month&) = default;
};

/// Signed number of months from `from` to `to` (to - from).
int months_between(Month from, Month to);

}  // namespace tvme
