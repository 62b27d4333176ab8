#include "tvme/calendar.hpp"

#include "tvme/error.hpp"

#include <charconv>
#include <cstdio>

namespace tvme {

Month Month::parse(std::string_view text) {
    // Strict "YYYY-MM": 4 digits, dash, 2 digits.
    if (text.size() != 7 || text[4] != '-') {
        throw ValidationError("bad month '" + std::string(text) + "': expected YYYY-MM");
    }
    int y = 0;
    int m = 0;
    auto ry = std::from_chars(text.data(), text.data() + 4, y);
    auto rm = std::from_chars(text.data() + 5, text.data() + 7, m);
    if (ry.ec != std::errc{} || ry.ptr != text.data() + 4 || rm.ec != std::errc{} ||
        rm.ptr != text.data() + 7 || m < 1 || m > 12) {
        throw ValidationError("bad month '" + std::string(text) + "': expected YYYY-MM");
    }
    return Month{y, m};
}

std::string Month::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

Month Month::plus(int count) const {
    int idx = year * 12 + (month - 1) + count;
    int y = idx / 12;
    int m = idx % 12;
    if (m < 0) {
        y -= 1;
        m += 12;
    }
    return Month{y, m + 1};
}

int months_between(Month from, Month to) {
    return (to.year - from.year) * 12 + (to.month - from.month);
}

}  // namespace tvme
