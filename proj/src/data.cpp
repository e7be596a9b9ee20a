#include "cfx/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cfx/errors.hpp"
#include "json.hpp"

namespace cfx {

namespace {

int find_label(const std::vector<std::string>& labels, const std::string& label) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    return -1;
}

}  // namespace

int Dataset::index_of(const std::string& label) const { return find_label(labels, label); }

int DiscretizedDataset::index_of(const std::string& label) const {
    return find_label(labels, label);
}

std::vector<int> DiscretizedDataset::observed_codes(int c) const {
    std::vector<int> out(cols.at(c).codes);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Discretization

DiscretizedColumn discretize_equal_width(const std::vector<double>& values, int k) {
    if (k < 2) throw Error("discretize_equal_width: need at least 2 bins");
    if (values.empty()) throw Error("discretize_equal_width: empty column");
    auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    double mn = *mn_it, mx = *mx_it;

    DiscretizedColumn out;
    out.k = k;
    out.boundaries.resize(k + 1);
    for (int i = 0; i <= k; ++i) out.boundaries[i] = mn + (mx - mn) * i / k;
    out.codes.resize(values.size());

    if (mx == mn) {
        out.degenerate = true;
        std::fill(out.codes.begin(), out.codes.end(), 0);
        return out;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        // the nudge keeps values landing exactly on an edge (up to rounding
        // of (v - mn) / (mx - mn)) in the upper interval
        int code = static_cast<int>(std::floor((values[i] - mn) / (mx - mn) * k + 1e-9));
        out.codes[i] = std::clamp(code, 0, k - 1);
    }
    return out;
}

DiscretizedColumn discretize_equal_frequency(const std::vector<double>& values, int k) {
    if (k < 2) throw Error("discretize_equal_frequency: need at least 2 bins");
    if (values.empty()) throw Error("discretize_equal_frequency: empty column");
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    int n = static_cast<int>(sorted.size());

    DiscretizedColumn out;
    out.k = k;
    out.boundaries.resize(k - 1);
    for (int j = 1; j < k; ++j) {
        int idx = std::max(0, static_cast<int>(static_cast<long long>(j) * n / k) - 1);
        out.boundaries[j - 1] = sorted[idx];
    }
    out.degenerate = sorted.front() == sorted.back();
    out.codes.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto below = std::lower_bound(out.boundaries.begin(), out.boundaries.end(), values[i]);
        out.codes[i] = static_cast<int>(below - out.boundaries.begin());
    }
    return out;
}

int code_for(const DiscretizedColumn& col, double value) {
    if (col.degenerate) return 0;
    if (static_cast<int>(col.boundaries.size()) == col.k + 1) {
        double mn = col.boundaries.front(), mx = col.boundaries.back();
        if (mx == mn) return 0;
        int code = static_cast<int>(std::floor((value - mn) / (mx - mn) * col.k + 1e-9));
        return std::clamp(code, 0, col.k - 1);
    }
    auto below = std::lower_bound(col.boundaries.begin(), col.boundaries.end(), value);
    return static_cast<int>(below - col.boundaries.begin());
}

DiscretizedDataset discretize_dataset(const Dataset& data, int k, BinScheme scheme) {
    DiscretizedDataset out;
    out.labels = data.labels;
    out.cols.reserve(data.columns.size());
    for (const auto& col : data.columns)
        out.cols.push_back(scheme == BinScheme::equal_width
                               ? discretize_equal_width(col, k)
                               : discretize_equal_frequency(col, k));
    return out;
}

std::vector<int> make_binary_target(const std::vector<double>& values) {
    DiscretizedColumn split = discretize_equal_width(values, 2);
    if (split.degenerate)
        throw DegenerateColumnError("make_binary_target: column is constant");
    return split.codes;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

struct CsvReader {
    const std::string& text;
    std::size_t pos = 0;
    std::size_t line = 1;

    explicit CsvReader(const std::string& t) : text(t) {}

    bool at_end() const { return pos >= text.size(); }

    // Reads one record; returns false at end of input. Fields are unescaped.
    bool next_record(std::vector<std::string>& fields) {
        fields.clear();
        if (at_end()) return false;
        std::size_t record_line = line;
        while (true) {
            fields.push_back(read_field(record_line, fields.size() + 1));
            if (at_end()) break;
            char c = text[pos];
            if (c == ',') {
                ++pos;
                continue;
            }
            consume_newline();
            break;
        }
        return true;
    }

  private:
    std::string read_field(std::size_t record_line, std::size_t col) {
        std::string out;
        if (!at_end() && text[pos] == '"') {
            ++pos;
            while (true) {
                if (at_end())
                    throw ParseError("unterminated quoted field", record_line, col);
                char c = text[pos++];
                if (c == '"') {
                    if (!at_end() && text[pos] == '"') {
                        out += '"';
                        ++pos;
                        continue;
                    }
                    break;
                }
                if (c == '\n') ++line;
                out += c;
            }
            if (!at_end() && text[pos] != ',' && text[pos] != '\r' && text[pos] != '\n')
                throw ParseError("garbage after closing quote", record_line, col);
        } else {
            while (!at_end() && text[pos] != ',' && text[pos] != '\r' && text[pos] != '\n')
                out += text[pos++];
        }
        return out;
    }

    void consume_newline() {
        if (!at_end() && text[pos] == '\r') ++pos;
        if (!at_end() && text[pos] == '\n') {
            ++pos;
            ++line;
        }
    }
};

double parse_number(const std::string& field, std::size_t row, std::size_t col) {
    if (field.empty()) throw ParseError("empty cell", row, col);
    const char* begin = field.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0'))
        throw ParseError("not a number: '" + field + "'", row, col);
    if (!std::isfinite(v)) throw ParseError("non-finite value", row, col);
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_csv: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    CsvReader reader(text);
    std::vector<std::string> fields;
    if (!reader.next_record(fields) || (fields.size() == 1 && fields[0].empty()))
        throw ParseError("missing header row", 1, 1);

    Dataset data;
    data.labels = fields;
    data.kinds.assign(fields.size(), ColumnKind::continuous);
    data.columns.assign(fields.size(), {});

    std::size_t row = 1;
    while (reader.next_record(fields)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank trailing line
        if (fields.size() != data.labels.size())
            throw ParseError("expected " + std::to_string(data.labels.size()) +
                                 " fields, found " + std::to_string(fields.size()),
                             row, fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            data.columns[c].push_back(parse_number(fields[c], row, c + 1));
    }
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("save_csv: cannot open " + path);
    for (int c = 0; c < data.num_cols(); ++c)
        out << (c ? "," : "") << quote_field(data.labels[c]);
    out << '\n';
    char buf[40];
    for (int r = 0; r < data.num_rows(); ++r) {
        for (int c = 0; c < data.num_cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data.columns[c][r]);
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw Error("save_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Kind sidecar

void load_kinds(Dataset& data, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_kinds: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatchError(std::string("kinds sidecar: ") + e.what());
    }
    if (!j.contains("kinds") || !j["kinds"].is_object())
        throw SchemaMismatchError("kinds sidecar: missing kinds object");
    for (auto& [label, kind] : j["kinds"].items()) {
        int c = data.index_of(label);
        if (c < 0) throw SchemaMismatchError("kinds sidecar: unknown column " + label);
        std::string s = kind.get<std::string>();
        if (s == "continuous") {
            data.kinds[c] = ColumnKind::continuous;
        } else if (s == "discrete") {
            for (double v : data.columns[c])
                if (std::floor(v) != v)
                    throw SchemaMismatchError("column " + label +
                                              " marked discrete but holds non-integers");
            data.kinds[c] = ColumnKind::discrete;
        } else {
            throw SchemaMismatchError("kinds sidecar: bad kind '" + s + "' for " + label);
        }
    }
}

void save_kinds(const Dataset& data, const std::string& path) {
    nlohmann::json kinds = nlohmann::json::object();
    for (int c = 0; c < data.num_cols(); ++c)
        kinds[data.labels[c]] =
            data.kinds[c] == ColumnKind::discrete ? "discrete" : "continuous";
    nlohmann::json j;
    j["kinds"] = kinds;
    std::ofstream out(path);
    if (!out) throw Error("save_kinds: cannot open " + path);
    out << j.dump(2) << '\n';
}

}  // namespace cfx
