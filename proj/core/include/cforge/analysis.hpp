#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cforge/records.hpp"

namespace cforge {

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0, median = 0, stddev = 0;
    double min = 0, max = 0, q1 = 0, q3 = 0;
    double zero_fraction = 0;
};

// Mean/median/quartiles (linear interpolation, the common "type 7" rule),
// sample standard deviation (0 for a single value), zero share.
// Empty input throws std::invalid_argument.
SummaryStats summarize(const std::vector<double>& values);

struct PatternRow {
    std::vector<int> residues;  // ordered (p1, p2, p3) mod 35
    std::uint64_t count = 0;
    double share = 0;           // of all records
};

// Ordered residue triple frequencies, most common first (lexicographic
// tie-break), truncated to top_n (0 = all).
std::vector<PatternRow> pattern_table(const std::vector<CompositeRecord>& records,
                                      std::size_t top_n);

// r mod 35 -> (r mod 5, r mod 7); requires 0 <= r < 35.
std::pair<int, int> residue_decomposition(int r);

// Sample Pearson correlation; throws std::invalid_argument on size mismatch,
// fewer than two points, or zero variance on either side.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct Histogram {
    std::vector<std::int64_t> edges;       // bin start values, bin i = [edge, edge+width)
    std::vector<std::uint64_t> counts;     // same length, empty bins kept
};

// Integer histogram covering [min(values), max(values)]; empty input gives
// an empty histogram, bin_width < 1 throws.
Histogram histogram(const std::vector<int>& values, int bin_width = 1);

struct ReportPaths {
    std::string report_md;
    std::string delta_hist_csv, delta_hist_svg;
    std::string patterns_csv, patterns_svg;
    std::string scatter_k_csv, scatter_m_csv, scatter_bits_csv;
    std::string scatter_svg;
};

// Writes report.md plus the CSV/SVG bundle into out_dir (created if absent).
// Every record must already carry a Lucas measurement; records that ended in
// a gcd shortcut or a Lucas pseudoprime flag are excluded from delta stats
// and counted in the report. Throws std::invalid_argument naming the first
// offending record if one lacks a measurement.
ReportPaths emit_report(const std::vector<CompositeRecord>& records,
                        const std::string& out_dir);

// The textual summary alone (the "analyze" command output).
std::string render_summary(const std::vector<CompositeRecord>& records);

}  // namespace cforge
