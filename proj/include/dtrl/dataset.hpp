#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dtrl/errors.hpp"

namespace dtrl {

// A classification dataset as read from disk: raw feature values, string labels.
struct RawDataset {
    struct Row {
        std::vector<double> features;
        std::string label;
    };
    std::vector<Row> rows;
    std::vector<std::string> feature_names;
    std::string label_name;
    std::string name; // file stem, used for metadata only

    int feature_count() const { return static_cast<int>(feature_names.size()); }
};

// A normalized dataset: all features min-max scaled into [0,1], labels as
// class indices in first-occurrence order.
struct Dataset {
    std::size_t n = 0;
    int d = 0;
    std::vector<double> samples; // row-major n*d, all in [0,1]
    std::vector<int> labels;     // n entries in 0..K-1
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
    std::vector<std::pair<double, double>> scaler; // per-feature (min, max) before scaling
    std::string name;

    int class_count() const { return static_cast<int>(class_names.size()); }
    double at(std::size_t i, int k) const { return samples[i * d + k]; }

    double denormalize(int k, double v) const {
        auto [lo, hi] = scaler[k];
        return lo + v * (hi - lo);
    }

    // Class histogram over an index subset.
    std::vector<std::uint32_t> class_histogram(const std::vector<std::uint32_t>& idx) const {
        std::vector<std::uint32_t> h(class_names.size(), 0);
        for (auto i : idx) ++h[labels[i]];
        return h;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view sv, double& out) {
    const char* first = sv.data();
    const char* last = first + sv.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

} // namespace detail

// Loads a CSV classification file: UTF-8, comma separated, one header row,
// decimal-point reals; every non-label column must be numeric.
inline RawDataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file, expected a header row");

    RawDataset raw;
    auto header = detail::split_csv_line(line);
    int label_idx = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string h = detail::trim(header[c]);
        if (h == label_column) {
            label_idx = static_cast<int>(c);
        } else {
            raw.feature_names.push_back(h);
        }
    }
    if (label_idx < 0) throw FormatError(path + ": label column '" + label_column + "' not found in header");
    if (raw.feature_names.empty()) throw FormatError(path + ": no feature columns besides the label");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        RawDataset::Row row;
        row.features.reserve(raw.feature_names.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<int>(c) == label_idx) {
                row.label = detail::trim(cells[c]);
                continue;
            }
            double v = 0.0;
            if (!detail::parse_double(detail::trim(cells[c]), v))
                throw FormatError(path + ":" + std::to_string(lineno) + ": non-numeric feature cell '" +
                                  cells[c] + "' in column '" + header[c] + "'");
            row.features.push_back(v);
        }
        raw.rows.push_back(std::move(row));
    }
    if (raw.rows.empty()) throw FormatError(path + ": no data rows");

    std::unordered_map<std::string, int> distinct;
    for (const auto& r : raw.rows) distinct.emplace(r.label, 1);
    if (distinct.size() < 2) throw FormatError(path + ": needs at least 2 distinct labels, found " +
                                               std::to_string(distinct.size()));

    auto slash = path.find_last_of("/\\");
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = stem.find_last_of('.');
    raw.name = dot == std::string::npos ? stem : stem.substr(0, dot);
    raw.label_name = label_column;
    return raw;
}

// Min-max scales each feature so the dataset minimum maps to 0 and the maximum
// to 1. Constant features map to 0 everywhere (their scaler still records the
// constant so denormalization round-trips). Class indices follow first
// occurrence order in the file.
inline Dataset normalize(const RawDataset& raw) {
    Dataset ds;
    ds.n = raw.rows.size();
    ds.d = raw.feature_count();
    ds.feature_names = raw.feature_names;
    ds.name = raw.name;
    ds.scaler.resize(ds.d);

    for (int k = 0; k < ds.d; ++k) {
        double lo = raw.rows[0].features[k], hi = lo;
        for (const auto& r : raw.rows) {
            lo = std::min(lo, r.features[k]);
            hi = std::max(hi, r.features[k]);
        }
        ds.scaler[k] = {lo, hi};
    }

    std::unordered_map<std::string, int> class_index;
    ds.samples.resize(ds.n * ds.d);
    ds.labels.resize(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) {
        const auto& row = raw.rows[i];
        for (int k = 0; k < ds.d; ++k) {
            auto [lo, hi] = ds.scaler[k];
            double v = hi > lo ? (row.features[k] - lo) / (hi - lo) : 0.0;
            ds.samples[i * ds.d + k] = std::clamp(v, 0.0, 1.0);
        }
        auto it = class_index.find(row.label);
        if (it == class_index.end()) {
            it = class_index.emplace(row.label, static_cast<int>(ds.class_names.size())).first;
            ds.class_names.push_back(row.label);
        }
        ds.labels[i] = it->second;
    }
    return ds;
}

// Writes a dataset back out as CSV with its class names as labels.
// Values are printed with enough digits to round-trip exactly.
inline void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file: " + path);
    for (int k = 0; k < ds.d; ++k) out << ds.feature_names[k] << ",";
    out << "label\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (int k = 0; k < ds.d; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.at(i, k));
            out << buf << ",";
        }
        out << ds.class_names[ds.labels[i]] << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace dtrl
