#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "calibkit/errors.hpp"
#include "calibkit/simplex.hpp"

namespace calibkit {

/// Dataset plus the label dictionary: empty class_names means the file
/// carried integer labels; otherwise index i maps to the i-th distinct
/// label string in order of first appearance.
struct ParsedDataset {
    LabeledDataset data;
    std::vector<std::string> class_names;
};

namespace detail {

inline std::string trimmed(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

inline bool is_integer_token(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        fields.push_back(trimmed(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

inline ParsedDataset finalize_labels(std::vector<SimplexVector> predictions,
                                     const std::vector<std::string>& raw_labels,
                                     const std::vector<long>& line_numbers) {
    const std::size_t m = predictions.front().size();
    if (m < 2) {
        throw ParseError("dataset needs at least two classes");
    }
    bool all_integers = true;
    for (const std::string& s : raw_labels) {
        if (!is_integer_token(s)) {
            all_integers = false;
            break;
        }
    }
    ParsedDataset out;
    out.data.predictions = std::move(predictions);
    out.data.labels.reserve(raw_labels.size());
    if (all_integers) {
        for (std::size_t i = 0; i < raw_labels.size(); ++i) {
            const long y = std::stol(raw_labels[i]);
            if (y < 0 || static_cast<std::size_t>(y) >= m) {
                throw ParseError("line " + std::to_string(line_numbers[i]) + ": label " +
                                 raw_labels[i] + " outside [0," + std::to_string(m) + ")");
            }
            out.data.labels.push_back(static_cast<int>(y));
        }
        return out;
    }
    // class names map to indices by first appearance
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        const auto found =
            std::find(out.class_names.begin(), out.class_names.end(), raw_labels[i]);
        std::size_t index;
        if (found == out.class_names.end()) {
            index = out.class_names.size();
            if (index >= m) {
                throw ParseError("line " + std::to_string(line_numbers[i]) + ": more than " +
                                 std::to_string(m) + " distinct class names");
            }
            out.class_names.push_back(raw_labels[i]);
        } else {
            index = static_cast<std::size_t>(found - out.class_names.begin());
        }
        out.data.labels.push_back(static_cast<int>(index));
    }
    return out;
}

}  // namespace detail

/// CSV with header `p0,p1,...,p{m-1},label`; labels are integers or class
/// names (first-appearance mapping). Every prediction goes through
/// validate_simplex with the given tolerance.
inline ParsedDataset parse_dataset_csv(std::istream& in,
                                       double tolerance = SimplexVector::kDefaultTolerance) {
    std::string line;
    long line_number = 0;
    if (!std::getline(in, line)) {
        throw ParseError("line 1: missing header");
    }
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = detail::split_csv_line(line);
    if (header.size() < 3 || header.back() != "label") {
        throw ParseError("line 1: expected header p0,...,p{m-1},label");
    }
    const std::size_t m = header.size() - 1;
    for (std::size_t c = 0; c < m; ++c) {
        if (header[c] != "p" + std::to_string(c)) {
            throw ParseError("line 1: expected column p" + std::to_string(c) + ", found '" +
                             header[c] + "'");
        }
    }

    std::vector<SimplexVector> predictions;
    std::vector<std::string> raw_labels;
    std::vector<long> line_numbers;
    std::vector<double> row(m);
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trimmed(line).empty()) {
            continue;
        }
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != m + 1) {
            throw InconsistentWidth("line " + std::to_string(line_number) + ": expected " +
                                    std::to_string(m + 1) + " fields, found " +
                                    std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < m; ++c) {
            try {
                std::size_t used = 0;
                row[c] = std::stod(fields[c], &used);
                if (used != fields[c].size()) {
                    throw std::invalid_argument("trailing characters");
                }
            } catch (const std::logic_error&) {
                throw ParseError("line " + std::to_string(line_number) + ": field p" +
                                 std::to_string(c) + " is not a number: '" + fields[c] + "'");
            }
        }
        try {
            predictions.push_back(SimplexVector::validated(row, tolerance));
        } catch (const RejectedVector& e) {
            throw RejectedVector("line " + std::to_string(line_number) + ": " + e.what());
        }
        raw_labels.push_back(fields[m]);
        line_numbers.push_back(line_number);
    }
    if (predictions.empty()) {
        throw ParseError("no data rows");
    }
    return detail::finalize_labels(std::move(predictions), raw_labels, line_numbers);
}

/// JSON lines, one object per row: {"p": [...], "y": int-or-string}.
inline ParsedDataset parse_dataset_jsonl(std::istream& in,
                                         double tolerance = SimplexVector::kDefaultTolerance) {
    std::vector<SimplexVector> predictions;
    std::vector<std::string> raw_labels;
    std::vector<long> line_numbers;
    std::string line;
    long line_number = 0;
    std::size_t m = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::trimmed(line).empty()) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(line_number) + ": " + e.what());
        }
        if (!obj.is_object() || !obj.contains("p") || !obj.contains("y") ||
            !obj["p"].is_array()) {
            throw ParseError("line " + std::to_string(line_number) +
                             ": expected {\"p\": [...], \"y\": ...}");
        }
        std::vector<double> row;
        for (const auto& v : obj["p"]) {
            if (!v.is_number()) {
                throw ParseError("line " + std::to_string(line_number) +
                                 ": non-numeric entry in \"p\"");
            }
            row.push_back(v.get<double>());
        }
        if (m == 0) {
            m = row.size();
        } else if (row.size() != m) {
            throw InconsistentWidth("line " + std::to_string(line_number) + ": expected " +
                                    std::to_string(m) + " probabilities, found " +
                                    std::to_string(row.size()));
        }
        try {
            predictions.push_back(SimplexVector::validated(row, tolerance));
        } catch (const RejectedVector& e) {
            throw RejectedVector("line " + std::to_string(line_number) + ": " + e.what());
        }
        if (obj["y"].is_number_integer()) {
            raw_labels.push_back(std::to_string(obj["y"].get<long>()));
        } else if (obj["y"].is_string()) {
            raw_labels.push_back(obj["y"].get<std::string>());
        } else {
            throw ParseError("line " + std::to_string(line_number) +
                             ": \"y\" must be an integer or a string");
        }
        line_numbers.push_back(line_number);
    }
    if (predictions.empty()) {
        throw ParseError("no data rows");
    }
    return detail::finalize_labels(std::move(predictions), raw_labels, line_numbers);
}

inline ParsedDataset parse_dataset_file(const std::string& path, const std::string& format,
                                        double tolerance = SimplexVector::kDefaultTolerance) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    try {
        if (format == "csv") {
            return parse_dataset_csv(in, tolerance);
        }
        if (format == "jsonl") {
            return parse_dataset_jsonl(in, tolerance);
        }
    } catch (const RejectedVector& e) {
        throw RejectedVector(path + ": " + e.what());
    } catch (const InconsistentWidth& e) {
        throw InconsistentWidth(path + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
    throw ParseError("unknown format '" + format + "' (expected csv|jsonl)");
}

/// The standard CSV layout; numbers round-trip via %.17g.
inline void write_dataset_csv(std::ostream& out, const LabeledDataset& data) {
    const std::size_t m = data.num_classes();
    for (std::size_t c = 0; c < m; ++c) {
        out << 'p' << c << ',';
    }
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t c = 0; c < m; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data.predictions[i][c]);
            out << buf << ',';
        }
        out << data.labels[i] << '\n';
    }
}

}  // namespace calibkit
