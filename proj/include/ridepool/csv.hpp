#pragma once

#include "ridepool/core.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ridepool {

// Minimal reader for the delimited text inputs (nodes, edges, requests,
// rates). Comma separated, first non-comment line is the header. Lines
// starting with '#' are ignored so generated files can embed their
// provenance as a comment.
class CsvTable {
public:
    static CsvTable from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open file: " + path);
        std::stringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str(), path);
    }

    static CsvTable from_string(const std::string& text, const std::string& name = "<string>") {
        CsvTable t;
        t.name_ = name;
        std::istringstream in(text);
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            std::vector<std::string> fields = split(line);
            if (t.header_.empty()) {
                t.header_ = std::move(fields);
            } else {
                if (fields.size() != t.header_.size())
                    throw MalformedRecordError(name + ":" + std::to_string(lineno) +
                                               ": expected " + std::to_string(t.header_.size()) +
                                               " fields, got " + std::to_string(fields.size()));
                t.rows_.push_back(std::move(fields));
                t.linenos_.push_back(lineno);
            }
        }
        if (t.header_.empty()) throw MalformedRecordError(name + ": missing header");
        return t;
    }

    size_t row_count() const { return rows_.size(); }
    size_t line_of(size_t row) const { return linenos_[row]; }

    bool has_column(const std::string& col) const {
        for (const auto& h : header_)
            if (h == col) return true;
        return false;
    }

    int column(const std::string& col) const {
        for (size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == col) return static_cast<int>(i);
        throw MalformedRecordError(name_ + ": missing column '" + col + "'");
    }

    const std::string& cell(size_t row, int col) const { return rows_[row][col]; }

    double number(size_t row, int col) const {
        const std::string& s = rows_[row][col];
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw MalformedRecordError(where(row) + ": not a number: '" + s + "'");
        return v;
    }

    int64_t integer(size_t row, int col) const {
        double v = number(row, col);
        int64_t r = static_cast<int64_t>(v >= 0 ? v + 0.5 : v - 0.5);
        if (std::abs(v - static_cast<double>(r)) > 1e-9)
            throw MalformedRecordError(where(row) + ": not an integer: '" + rows_[row][col] + "'");
        return r;
    }

    std::string where(size_t row) const { return name_ + ":" + std::to_string(linenos_[row]); }

private:
    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        out.push_back(cur);
        for (auto& f : out) {
            size_t a = f.find_first_not_of(" \t");
            size_t b = f.find_last_not_of(" \t");
            f = (a == std::string::npos) ? std::string() : f.substr(a, b - a + 1);
        }
        return out;
    }

    std::string name_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<size_t> linenos_;
};

}  // namespace ridepool
