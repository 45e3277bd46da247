#pragma once

#include <charconv>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace divstat::csv {

// Minimal strict CSV: comma-separated, no quoting (field values here never
// contain commas), '#' lines are comments, blank lines ignored. Row numbers
// are 1-based over the raw text so error messages match what an editor shows.
struct table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_numbers; // source line of each data row
};

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline table parse(std::string_view text) {
    table t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view raw = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') {
            if (pos > text.size()) break;
            continue;
        }
        auto fields = split_line(line);
        for (auto& f : fields) f = std::string(trim(f));
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
        } else {
            if (fields.size() != t.header.size())
                throw validation_error("csv row " + std::to_string(line_no) + ": expected " +
                                       std::to_string(t.header.size()) + " fields, got " +
                                       std::to_string(fields.size()));
            t.rows.push_back(std::move(fields));
            t.row_numbers.push_back(line_no);
        }
        if (pos > text.size()) break;
    }
    if (!have_header) throw validation_error("csv: missing header line");
    return t;
}

inline std::size_t column_index(const table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == name) return i;
    throw validation_error("csv: missing required column '" + name + "'");
}

inline std::optional<std::size_t> find_column(const table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == name) return i;
    return std::nullopt;
}

inline double parse_real(std::string_view field, std::size_t row, const std::string& col) {
    // std::from_chars<double> handles decimal and scientific notation, no locale.
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw validation_error("csv row " + std::to_string(row) + ": column '" + col +
                               "': not a number: '" + std::string(field) + "'");
    return v;
}

// 17 significant digits round-trips any IEEE double through text exactly.
inline std::string format_real17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace divstat::csv
