#include "tvme/csv.hpp"

#include "tvme/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tvme {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 15);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open '" + file.string() + "'");
    }
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (first) {
            table.header = fields;
            first = false;
        } else {
            table.rows.push_back(fields);
        }
    }
    return table;
}

PriceSeries read_price_csv(const std::filesystem::path& file, std::string label) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open series file '" + file.string() + "'");
    }
    if (label.empty()) label = file.stem().string();

    std::string line;
    std::size_t line_no = 0;
    Month start{};
    std::vector<std::optional<double>> values;
    bool have_header = false;

    auto fail = [&](const std::string& what) -> void {
        throw IoError(file.string() + ":" + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;
        auto fields = split_line(line);
        if (!have_header) {
            if (fields.size() < 2 || strip(fields[0]) != "date" || strip(fields[1]) != "price") {
                fail("expected header 'date,price', got '" + line + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() < 1 || fields.size() > 2) {
            fail("expected 'YYYY-MM,price' row, got '" + line + "'");
        }
        Month m{};
        try {
            m = Month::parse(strip(fields[0]));
        } catch (const ValidationError& e) {
            fail(e.what());
        }
        if (values.empty()) {
            start = m;
        } else {
            const Month expected = start.plus(static_cast<int>(values.size()));
            if (m != expected) {
                fail("months must be contiguous: expected " + expected.str() + ", got " +
                     m.str() + " (mark missing months with an empty price instead of "
                     "skipping rows)");
            }
        }
        const std::string price = fields.size() == 2 ? strip(fields[1]) : std::string{};
        if (price.empty()) {
            values.emplace_back(std::nullopt);
        } else {
            double v = 0.0;
            auto res = std::from_chars(price.data(), price.data() + price.size(), v);
            if (res.ec != std::errc{} || res.ptr != price.data() + price.size()) {
                fail("bad price '" + price + "'");
            }
            values.emplace_back(v);
        }
    }
    if (!have_header) {
        throw IoError(file.string() + ": empty file (expected 'date,price' header)");
    }
    if (values.empty()) {
        throw IoError(file.string() + ": no data rows");
    }
    try {
        return PriceSeries::create(start, std::move(values), std::move(label));
    } catch (const ValidationError& e) {
        throw IoError(file.string() + ": " + e.what());
    }
}

void write_price_csv(const std::filesystem::path& file, const PriceSeries& series) {
    std::ofstream out(file);
    if (!out) {
        throw IoError("cannot write '" + file.string() + "'");
    }
    out << "date,price\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.month_at(i).str() << ',';
        if (series.values[i].has_value()) out << format_double(*series.values[i]);
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed for '" + file.string() + "'");
    }
}

void write_csv(const std::filesystem::path& file, const CsvTable& table) {
    std::ofstream out(file);
    if (!out) {
        throw IoError("cannot write '" + file.string() + "'");
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed for '" + file.string() + "'");
    }
}

}  // namespace tvme
