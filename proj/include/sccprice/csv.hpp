#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sccprice/common.hpp"

namespace sccprice {

/// Minimal CSV writer with deterministic formatting. No quoting: field values
/// in this project never contain commas or newlines.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw ParseError("cannot open for writing: " + path);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    void flush() { out_.flush(); }

private:
    std::ofstream out_;
};

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) fields.push_back(cell);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(std::move(fields));
    }
    return rows;
}

inline double csv_to_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw ParseError("trailing characters in number: " + s);
        return v;
    } catch (const std::invalid_argument&) {
        throw ParseError("not a number: " + s);
    }
}

}  // namespace sccprice
