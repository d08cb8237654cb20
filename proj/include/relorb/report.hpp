#pragma once

#include "relorb/rational.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace relorb {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form; locale-free and bit-deterministic.
inline std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string fmt_rational(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

// A flat table with named columns; the common shape of every report this tool
// emits. CSV and JSON renderings are byte-deterministic for identical content.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != columns.size())
            throw std::logic_error("Table: row width does not match columns");
        rows.push_back(std::move(row));
    }

    std::string to_csv() const {
        std::ostringstream out;
        for (size_t i = 0; i < columns.size(); ++i)
            out << columns[i] << (i + 1 < columns.size() ? "," : "");
        out << '\n';
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) out << r[i] << (i + 1 < r.size() ? "," : "");
            out << '\n';
        }
        return out.str();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["columns"] = columns;
        auto& rws = j["rows"] = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json obj;
            for (size_t i = 0; i < r.size(); ++i) obj[columns[i]] = r[i];
            rws.push_back(obj);
        }
        return j;
    }

    static Table from_csv(std::istream& in) {
        Table t;
        std::string line;
        if (!std::getline(in, line)) throw IoError("Table::from_csv: empty input");
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> row;
            std::stringstream rs(line);
            for (size_t i = 0; i < t.columns.size(); ++i) {
                if (!std::getline(rs, cell, ',')) cell.clear();
                row.push_back(cell);
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    }
};

// Writes to the path, or to the given stream when the path is empty ("stdout").
inline void emit_text(const std::string& text, const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        if (!fallback) throw IoError("emit_text: stream write failed");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_text: cannot open " + path);
    out << text;
    if (!out) throw IoError("emit_text: write to " + path + " failed");
}

inline void emit_report(const Table& table, const std::string& format, const std::string& path,
                        std::ostream& fallback = std::cout) {
    if (format == "csv") {
        emit_text(table.to_csv(), path, fallback);
    } else if (format == "json") {
        emit_text(table.to_json().dump(2) + "\n", path, fallback);
    } else {
        throw std::invalid_argument("emit_report: unknown format '" + format + "'");
    }
}

}  // namespace relorb
