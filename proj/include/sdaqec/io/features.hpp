// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "sdaqec/core/error.hpp"

namespace sdaqec {

/// Portable feature table: one label and one D-dimensional row per sample.
struct FeatureTable {
    std::size_t dim = 0;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;

    std::size_t size() const { return rows.size(); }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/**
 * Write features as CSV: header `D=<dim>,N=<rows>`, then one
 * `label,f_0,...,f_{D-1}` line per sample. Doubles are printed with 17
 * significant digits so a load of the written file is bit-identical.
 */
inline void export_features(const std::string &path, const FeatureTable &table) {
    if (table.rows.size() != table.labels.size()) {
        throw DataError("feature export: row/label count mismatch");
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open feature file for writing: " + path);
    }
    out << "D=" << table.dim << ",N=" << table.rows.size() << "\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto &row = table.rows[r];
        if (row.size() != table.dim) {
            throw DataError("row " + std::to_string(r + 1) + ": expected " +
                            std::to_string(table.dim) + " features");
        }
        out << table.labels[r];
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw DataError("row " + std::to_string(r + 1) + ": non-finite value");
            }
            out << ',' << detail::format_double(v);
        }
        out << '\n';
    }
    if (!out) {
        throw DataError("write failed: " + path);
    }
}

/// Read a feature CSV written by `export_features` (or produced externally
/// with the same header). Validates the declared dimension on every row.
inline FeatureTable import_features(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open feature file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("feature file is empty: " + path);
    }
    std::size_t dim = 0, declared_rows = 0;
    if (std::sscanf(line.c_str(), "D=%zu,N=%zu", &dim, &declared_rows) != 2 || dim == 0) {
        throw DataError("bad feature file header: '" + line + "'");
    }

    FeatureTable table;
    table.dim = dim;
    std::size_t row_index = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        ++row_index;
        std::vector<double> row;
        row.reserve(dim);
        const char *p = line.c_str();
        char *end = nullptr;
        const long label = std::strtol(p, &end, 10);
        if (end == p || (label != 0 && label != 1)) {
            throw DataError("row " + std::to_string(row_index) + ": bad label");
        }
        p = end;
        while (*p == ',') {
            ++p;
            const double v = std::strtod(p, &end);
            if (end == p) {
                throw DataError("row " + std::to_string(row_index) + ": bad feature value");
            }
            if (!std::isfinite(v)) {
                throw DataError("row " + std::to_string(row_index) + ": non-finite value");
            }
            row.push_back(v);
            p = end;
        }
        if (*p != '\0' && *p != '\r') {
            throw DataError("row " + std::to_string(row_index) + ": trailing garbage");
        }
        if (row.size() != dim) {
            throw DataError("row " + std::to_string(row_index) + ": expected " +
                            std::to_string(dim) + " features");
        }
        table.labels.push_back(static_cast<int>(label));
        table.rows.push_back(std::move(row));
    }
    if (declared_rows != table.rows.size()) {
        throw DataError("feature file declares N=" + std::to_string(declared_rows) + " but has " +
                        std::to_string(table.rows.size()) + " rows");
    }
    return table;
}

} // namespace sdaqec
