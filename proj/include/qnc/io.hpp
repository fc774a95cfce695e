#pragma once
// Histogram ingestion (JSON / CSV) and deterministic text serialization.
//
// Input contracts:
//   JSON: array of [n_s, n_i, count] triples, counts nonnegative numbers.
//   CSV:  header "n_s,n_i,count" followed by triples, or a headerless dense
//         matrix whose row index is n_s and column index is n_i.

#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qnc/errors.hpp"
#include "qnc/pmf.hpp"

namespace qnc {

enum class HistFormat { json, csv, autodetect };

/// Raw (unnormalized) histogram as loaded; keeps counts for bootstrap use.
struct RawHistogram {
    std::vector<std::tuple<int, int, double>> counts;
    double total = 0.0;

    JointPMF to_pmf() const {
        if (total <= 0.0) throw ValidationError("histogram has zero total count");
        std::vector<std::tuple<int, int, double>> cells;
        cells.reserve(counts.size());
        for (const auto& [a, b, c] : counts) cells.emplace_back(a, b, c / total);
        return JointPMF::from_cells(cells);
    }
};

namespace detail {

inline RawHistogram load_json_counts(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), -1, long(e.byte));
    }
    if (!j.is_array()) throw ParseError("expected a top-level array of [n_s,n_i,count]");
    RawHistogram h;
    long idx = 0;
    for (const auto& rec : j) {
        ++idx;
        if (!rec.is_array() || rec.size() != 3)
            throw ParseError("record " + std::to_string(idx) + " is not a [n_s,n_i,count] triple");
        if (!rec[0].is_number_integer() && !rec[0].is_number_unsigned())
            throw ParseError("record " + std::to_string(idx) + ": n_s must be an integer");
        if (!rec[1].is_number_integer() && !rec[1].is_number_unsigned())
            throw ParseError("record " + std::to_string(idx) + ": n_i must be an integer");
        if (!rec[2].is_number())
            throw ParseError("record " + std::to_string(idx) + ": count must be a number");
        long long a = rec[0].get<long long>(), b = rec[1].get<long long>();
        double c = rec[2].get<double>();
        if (a < 0 || b < 0)
            throw ValidationError("record " + std::to_string(idx) + ": negative index");
        if (c < 0.0)
            throw ValidationError("record " + std::to_string(idx) + ": negative count");
        h.counts.emplace_back(int(a), int(b), c);
        h.total += c;
    }
    return h;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline bool numeric_field(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline RawHistogram load_csv_counts(std::istream& in) {
    RawHistogram h;
    std::string line;
    long lineno = 0;
    bool triplet_mode = false, decided = false;
    int dense_row = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv(line);
        if (!decided) {
            double tmp;
            triplet_mode = !numeric_field(fields[0], tmp);  // header row => triples follow
            decided = true;
            if (triplet_mode) {
                if (fields.size() != 3)
                    throw ParseError("expected header n_s,n_i,count", lineno);
                continue;
            }
        }
        if (triplet_mode) {
            if (fields.size() != 3) throw ParseError("expected 3 fields", lineno);
            double a, b, c;
            if (!numeric_field(fields[0], a) || !numeric_field(fields[1], b) ||
                !numeric_field(fields[2], c))
                throw ParseError("non-numeric field", lineno);
            if (a < 0 || b < 0 || a != (long long)a || b != (long long)b)
                throw ValidationError("line " + std::to_string(lineno) +
                                      ": indices must be nonnegative integers");
            if (c < 0.0)
                throw ValidationError("line " + std::to_string(lineno) + ": negative count");
            h.counts.emplace_back(int(a), int(b), c);
            h.total += c;
        } else {
            for (std::size_t col = 0; col < fields.size(); ++col) {
                double c;
                if (!numeric_field(fields[col], c))
                    throw ParseError("non-numeric field", lineno, long(col) + 1);
                if (c < 0.0)
                    throw ValidationError("line " + std::to_string(lineno) +
                                          ": negative count");
                h.counts.emplace_back(dense_row, int(col), c);
                h.total += c;
            }
            ++dense_row;
        }
    }
    if (h.counts.empty()) throw ValidationError("empty histogram");
    return h;
}

}  // namespace detail

/// Load raw counts in the declared format; autodetect peeks at the first
/// non-space character ('[' or '{' selects JSON).
inline RawHistogram load_counts(std::istream& in, HistFormat format) {
    if (format == HistFormat::autodetect) {
        int c = in.peek();
        while (c != EOF && std::isspace(c)) {
            in.get();
            c = in.peek();
        }
        format = (c == '[' || c == '{') ? HistFormat::json : HistFormat::csv;
    }
    return format == HistFormat::json ? detail::load_json_counts(in)
                                      : detail::load_csv_counts(in);
}

/// Load and normalize a histogram into a JointPMF (norm_deficit = 0).
inline JointPMF load_histogram(std::istream& in, HistFormat format) {
    return load_counts(in, format).to_pmf();
}

/// Shortest-width decimal rendering that round-trips a double, for stable CSV.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    // prefer the shortest representation that still round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char s[40];
        std::snprintf(s, sizeof s, "%.*g", prec, x);
        double back = 0.0;
        std::sscanf(s, "%lf", &back);
        if (back == x) return s;
    }
    return buf;
}

/// Serialize a pmf as histogram JSON (probabilities as counts).
inline void save_histogram_json(std::ostream& out, const JointPMF& pmf) {
    out << "[";
    bool first = true;
    pmf.for_each([&](int a, int b, double p) {
        if (!first) out << ",";
        first = false;
        out << "\n  [" << a << "," << b << "," << format_double(p) << "]";
    });
    out << "\n]\n";
}

/// Serialize a pmf as triplet CSV with header.
inline void save_histogram_csv(std::ostream& out, const JointPMF& pmf) {
    out << "n_s,n_i,count\n";
    pmf.for_each([&](int a, int b, double p) {
        out << a << "," << b << "," << format_double(p) << "\n";
    });
}

}  // namespace qnc
