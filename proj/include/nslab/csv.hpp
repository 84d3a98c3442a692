#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "nslab/errors.hpp"

namespace nslab {

// Shortest decimal form that round-trips to the same double. Locale-free.
inline std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw RuntimeError("format_double: conversion failed");
    return std::string(buf, p);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw RuntimeError("parse_double: bad numeric token '" + std::string(s) + "'");
    return v;
}

/** Minimal CSV table with a fixed header; numeric payload is lossless. */
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : os_(path, std::ios::trunc) {
        if (!os_) throw RuntimeError("csv: cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) os_ << ',';
            os_ << header[i];
        }
        os_ << '\n';
        ncols_ = header.size();
    }

    void row(const std::vector<double>& vals) {
        if (vals.size() != ncols_) throw RuntimeError("csv: row width mismatch");
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) os_ << ',';
            os_ << format_double(vals[i]);
        }
        os_ << '\n';
    }

    void flush() { os_.flush(); }

private:
    std::ofstream os_;
    std::size_t ncols_ = 0;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw RuntimeError("csv: no column named " + name);
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw RuntimeError("csv: cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> toks;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            toks.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            t.header = toks;
            first = false;
        } else {
            std::vector<double> vals;
            vals.reserve(toks.size());
            for (const std::string& s : toks) vals.push_back(parse_double(s));
            t.rows.push_back(std::move(vals));
        }
    }
    return t;
}

} // namespace nslab
