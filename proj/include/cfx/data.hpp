#pragma once

#include <string>
#include <vector>

namespace cfx {

enum class ColumnKind { continuous, discrete };

// Column-major table of real values. Discrete columns hold integer-valued
// entries (validated when kinds are assigned); all columns share one length.
struct Dataset {
    std::vector<std::string> labels;
    std::vector<ColumnKind> kinds;
    std::vector<std::vector<double>> columns;

    int num_cols() const { return static_cast<int>(columns.size()); }
    int num_rows() const { return columns.empty() ? 0 : static_cast<int>(columns[0].size()); }
    int index_of(const std::string& label) const;  // -1 if absent
    const std::vector<double>& column(int c) const { return columns.at(c); }
};

enum class BinScheme { equal_width, equal_frequency };

// One discretized column: codes in [0, k-1] plus the boundaries that defined
// them. For equal width, boundaries holds the k+1 interval edges; for equal
// frequency, the k-1 quantile cut points (duplicates possible under ties).
struct DiscretizedColumn {
    std::vector<int> codes;
    int k = 0;
    std::vector<double> boundaries;
    bool degenerate = false;  // constant input, every code 0
};

struct DiscretizedDataset {
    std::vector<std::string> labels;
    std::vector<DiscretizedColumn> cols;

    int num_cols() const { return static_cast<int>(cols.size()); }
    int num_rows() const { return cols.empty() ? 0 : static_cast<int>(cols[0].codes.size()); }
    int index_of(const std::string& label) const;
    const std::vector<int>& codes(int c) const { return cols.at(c).codes; }
    // Distinct codes observed in column c, ascending.
    std::vector<int> observed_codes(int c) const;
};

// Split [min, max] into k equal intervals; code = interval index, with the
// maximum mapped to k-1. A constant column yields all-zero codes and the
// degenerate flag instead of an error.
DiscretizedColumn discretize_equal_width(const std::vector<double>& values, int k);

// Cut points at the j/k sample quantiles, j = 1..k-1; code = number of cut
// points strictly below the value, so ties land in the lower bin.
DiscretizedColumn discretize_equal_frequency(const std::vector<double>& values, int k);

DiscretizedDataset discretize_dataset(const Dataset& data, int k,
                                      BinScheme scheme = BinScheme::equal_width);

// Code the stored boundaries assign to a fresh value, so held-out samples can
// be pushed through an existing binning. Equal-width intervals clamp
// out-of-range values into the end bins; equal-frequency counts cut points
// strictly below. Degenerate columns code everything 0.
int code_for(const DiscretizedColumn& col, double value);

// Equal-width split with k = 2; 1 = upper half of the range (positive class),
// values exactly at the midpoint included. Throws DegenerateColumnError on a
// constant column.
std::vector<int> make_binary_target(const std::vector<double>& values);

// RFC-4180 CSV with a header row. Values are written with 17 significant
// digits so a round trip reproduces doubles exactly. Non-finite entries are
// rejected at load time.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

// Column-kind sidecar: {"kinds": {"label": "continuous"|"discrete"}}.
// Unlisted columns stay continuous; discrete columns must be integer-valued.
void load_kinds(Dataset& data, const std::string& path);
void save_kinds(const Dataset& data, const std::string& path);

}  // namespace cfx
