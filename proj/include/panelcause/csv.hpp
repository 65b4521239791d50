#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "panelcause/errors.hpp"

namespace panelcause::csv {

// Plain comma-separated values, no quoting. All toolkit schemas are
// quote-free by construction (identifiers and names carry no commas).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // rows[i] pairs with data line i+2
};

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

inline Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        raise(errc::io_error, "cannot open " + path.string());
    }
    Table table;
    std::string line;
    if (!std::getline(in, line)) {
        raise(errc::schema_error, path.string() + ": empty file");
    }
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != table.header.size()) {
            raise(errc::schema_error,
                  path.string() + ": line " + std::to_string(table.rows.size() + 2) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

inline void expect_header(const Table& table, const std::vector<std::string>& expected,
                          const std::string& context) {
    if (table.header != expected) {
        std::string want;
        for (size_t i = 0; i < expected.size(); ++i) {
            if (i) want += ',';
            want += expected[i];
        }
        raise(errc::schema_error, context + ": header must be exactly `" + want + "`");
    }
}

[[noreturn]] inline void bad_field(const std::string& context, size_t line, size_t column,
                                   const std::string& detail) {
    raise(errc::schema_error, context + ": line " + std::to_string(line) + " column " +
                                  std::to_string(column) + ": " + detail);
}

inline int parse_int(const std::string& field, const std::string& context, size_t line,
                     size_t column) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        bad_field(context, line, column, "expected integer, got `" + field + "`");
    }
    return value;
}

inline double parse_double(const std::string& field, const std::string& context, size_t line,
                           size_t column) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        bad_field(context, line, column, "expected number, got `" + field + "`");
    }
    return value;
}

// Shortest decimal string that round-trips to the exact double. Keeps report
// files byte-stable across runs.
inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace panelcause::csv
