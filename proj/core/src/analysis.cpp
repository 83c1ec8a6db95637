#include "cforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "svg.hpp"

namespace cforge {

namespace {

double quantile_type7(const std::vector<double>& sorted, double p) {
    // linear interpolation between order statistics
    double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct DeltaView {
    std::vector<int> deltas;             // measurable records only
    std::vector<double> dd, kk, mm, bb;  // parallel series for correlation
    std::size_t gcd_shortcuts = 0;
    std::size_t pseudoprimes = 0;
    int max_delta = 0;
    int max_delta_nbits = 0;
    int max_delta_ubits = 0;
};

DeltaView split_measurable(const std::vector<CompositeRecord>& records) {
    DeltaView v;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.lucas)
            throw std::invalid_argument("record " + std::to_string(i) + " (n=" +
                                        r.n.get_str() +
                                        ") lacks a collapse measurement; run probe first");
        const auto& m = *r.lucas;
        if (m.gcd_shortcut) {
            ++v.gcd_shortcuts;
            continue;
        }
        if (m.strong_lucas_pass || m.lucas_pseudoprime) {
            // either pass condition; keep these out of the delta statistics
            ++v.pseudoprimes;
            continue;
        }
        int d = m.delta.value();
        v.deltas.push_back(d);
        v.dd.push_back(d);
        v.kk.push_back(static_cast<double>(r.k));
        v.mm.push_back(static_cast<double>(r.M));
        v.bb.push_back(static_cast<double>(r.n_bits));
        if (d >= v.max_delta) {
            v.max_delta = d;
            v.max_delta_nbits = m.n_bits;
            v.max_delta_ubits = m.u_residue_bits.value_or(0);
        }
    }
    return v;
}

std::string corr_or_absent(const std::vector<double>& xs, const std::vector<double>& ys) {
    try {
        return fmt(pearson(xs, ys), "%.3f");
    } catch (const std::invalid_argument&) {
        return "absent (constant series)";
    }
}

}  // namespace

SummaryStats summarize(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty input");
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());

    SummaryStats s;
    s.count = sorted.size();
    double sum = 0;
    std::size_t zeros = 0;
    for (double v : sorted) {
        sum += v;
        if (v == 0.0) ++zeros;
    }
    s.mean = sum / static_cast<double>(s.count);
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = quantile_type7(sorted, 0.5);
    s.q1 = quantile_type7(sorted, 0.25);
    s.q3 = quantile_type7(sorted, 0.75);
    s.zero_fraction = static_cast<double>(zeros) / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0;
        for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
    } else {
        s.stddev = 0;  // singleton convention
    }
    return s;
}

std::vector<PatternRow> pattern_table(const std::vector<CompositeRecord>& records,
                                      std::size_t top_n) {
    std::map<std::vector<int>, std::uint64_t> counts;
    for (const auto& r : records) ++counts[r.residues_mod35];

    std::vector<PatternRow> rows;
    rows.reserve(counts.size());
    for (const auto& [pattern, count] : counts) {
        rows.push_back({pattern, count,
                        static_cast<double>(count) / static_cast<double>(records.size())});
    }
    std::sort(rows.begin(), rows.end(), [](const PatternRow& a, const PatternRow& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.residues < b.residues;
    });
    if (top_n > 0 && rows.size() > top_n) rows.resize(top_n);
    return rows;
}

std::pair<int, int> residue_decomposition(int r) {
    if (r < 0 || r >= 35)
        throw std::invalid_argument("residue_decomposition: r must be in [0, 35)");
    return {r % 5, r % 7};
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("pearson: need at least two points");
    double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0 || syy == 0)
        throw std::invalid_argument("pearson: correlation undefined for a constant series");
    return sxy / std::sqrt(sxx * syy);
}

Histogram histogram(const std::vector<int>& values, int bin_width) {
    if (bin_width < 1) throw std::invalid_argument("histogram: bin_width must be >= 1");
    Histogram h;
    if (values.empty()) return h;
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    std::int64_t lo = *mn;
    std::size_t bins =
        static_cast<std::size_t>((*mx - lo) / bin_width) + 1;
    h.edges.resize(bins);
    h.counts.assign(bins, 0);
    for (std::size_t i = 0; i < bins; ++i)
        h.edges[i] = lo + static_cast<std::int64_t>(i) * bin_width;
    for (int v : values) ++h.counts[static_cast<std::size_t>((v - lo) / bin_width)];
    return h;
}

std::string render_summary(const std::vector<CompositeRecord>& records) {
    if (records.empty()) throw std::invalid_argument("render_summary: no records");
    DeltaView v = split_measurable(records);
    std::ostringstream out;
    out << "records: " << records.size() << " (measured " << v.deltas.size()
        << ", gcd shortcuts " << v.gcd_shortcuts << ", lucas pseudoprimes "
        << v.pseudoprimes << ")\n";
    if (!v.deltas.empty()) {
        std::vector<double> dd(v.deltas.begin(), v.deltas.end());
        SummaryStats s = summarize(dd);
        out << "delta: mean " << fmt(s.mean) << ", median " << fmt(s.median) << ", std "
            << fmt(s.stddev) << ", q1 " << fmt(s.q1) << ", q3 " << fmt(s.q3) << ", min "
            << fmt(s.min, "%.0f") << ", max " << fmt(s.max, "%.0f") << ", zero-fraction "
            << fmt(s.zero_fraction) << "\n";
        out << "correlations: rho(k, delta) = " << corr_or_absent(v.kk, v.dd)
            << ", rho(M, delta) = " << corr_or_absent(v.mm, v.dd)
            << ", rho(n_bits, delta) = " << corr_or_absent(v.bb, v.dd) << "\n";
    } else {
        out << "delta: no measurable records\n";
    }
    auto top = pattern_table(records, 5);
    out << "top residue patterns (mod 35):";
    for (const auto& row : top) {
        out << " (" << row.residues[0] << "," << row.residues[1] << "," << row.residues[2]
            << ") x" << row.count;
    }
    out << "\n";
    return out.str();
}

ReportPaths emit_report(const std::vector<CompositeRecord>& records,
                        const std::string& out_dir) {
    if (records.empty()) throw std::invalid_argument("emit_report: no records");
    DeltaView v = split_measurable(records);
    std::filesystem::create_directories(out_dir);
    auto path = [&](const char* name) { return out_dir + "/" + name; };

    ReportPaths paths;
    paths.report_md = path("report.md");
    paths.delta_hist_csv = path("delta_hist.csv");
    paths.delta_hist_svg = path("delta_hist.svg");
    paths.patterns_csv = path("patterns_top15.csv");
    paths.patterns_svg = path("patterns_top15.svg");
    paths.scatter_k_csv = path("scatter_k.csv");
    paths.scatter_m_csv = path("scatter_M.csv");
    paths.scatter_bits_csv = path("scatter_bits.csv");
    paths.scatter_svg = path("scatter.svg");

    auto write_file = [](const std::string& p, const std::string& body) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("emit_report: cannot write " + p);
        f << body;
    };

    Histogram hist = histogram(v.deltas);
    {
        std::ostringstream csv;
        csv << "delta,count\n";
        for (std::size_t i = 0; i < hist.edges.size(); ++i)
            csv << hist.edges[i] << "," << hist.counts[i] << "\n";
        write_file(paths.delta_hist_csv, csv.str());
        std::vector<std::pair<std::string, double>> bars;
        for (std::size_t i = 0; i < hist.edges.size(); ++i)
            bars.emplace_back(std::to_string(hist.edges[i]),
                              static_cast<double>(hist.counts[i]));
        write_file(paths.delta_hist_svg,
                   svg_bar_chart("Distribution of U-bit collapse", "delta (bits)", "count",
                                 bars));
    }

    auto top15 = pattern_table(records, 15);
    {
        std::ostringstream csv;
        csv << "p1_mod35,p2_mod35,p3_mod35,count,share\n";
        for (const auto& row : top15)
            csv << row.residues[0] << "," << row.residues[1] << "," << row.residues[2]
                << "," << row.count << "," << fmt(row.share, "%.10g") << "\n";
        write_file(paths.patterns_csv, csv.str());
        std::vector<std::pair<std::string, double>> bars;
        for (const auto& row : top15)
            bars.emplace_back("(" + std::to_string(row.residues[0]) + "," +
                                  std::to_string(row.residues[1]) + "," +
                                  std::to_string(row.residues[2]) + ")",
                              static_cast<double>(row.count));
        write_file(paths.patterns_svg,
                   svg_bar_chart("Most common residue patterns (mod 35)", "pattern",
                                 "count", bars));
    }

    auto scatter_csv = [&](const std::string& p, const char* xname,
                           const std::vector<double>& xs) {
        std::ostringstream csv;
        csv << xname << ",delta\n";
        for (std::size_t i = 0; i < xs.size(); ++i)
            csv << fmt(xs[i], "%.10g") << "," << v.deltas[i] << "\n";
        write_file(p, csv.str());
    };
    scatter_csv(paths.scatter_k_csv, "k", v.kk);
    scatter_csv(paths.scatter_m_csv, "M", v.mm);
    scatter_csv(paths.scatter_bits_csv, "n_bits", v.bb);
    {
        std::vector<SvgScatterPanel> panels(3);
        panels[0].name = "k vs delta";
        panels[1].name = "M vs delta";
        panels[2].name = "n_bits vs delta";
        for (std::size_t i = 0; i < v.dd.size(); ++i) {
            panels[0].points.emplace_back(v.kk[i], v.dd[i]);
            panels[1].points.emplace_back(v.mm[i], v.dd[i]);
            panels[2].points.emplace_back(v.bb[i], v.dd[i]);
        }
        write_file(paths.scatter_svg,
                   svg_scatter_panels("U-bit collapse vs construction parameters", panels));
    }

    std::ostringstream md;
    md << "# Collapse report\n\n";
    md << "Records: " << records.size() << "\n\n";
    md << "- measured: " << v.deltas.size() << "\n";
    md << "- excluded, gcd shortcut: " << v.gcd_shortcuts << "\n";
    md << "- excluded, strong Lucas pseudoprime: " << v.pseudoprimes << "\n\n";
    if (v.pseudoprimes > 0)
        md << "**WARNING: " << v.pseudoprimes
           << " record(s) passed the strong Lucas test.** Inspect them before trusting "
              "this dataset.\n\n";

    if (!v.deltas.empty()) {
        std::vector<double> dd(v.deltas.begin(), v.deltas.end());
        SummaryStats s = summarize(dd);
        md << "## Delta statistics\n\n";
        md << "| stat | value |\n|---|---|\n";
        md << "| count | " << s.count << " |\n";
        md << "| mean | " << fmt(s.mean) << " |\n";
        md << "| median | " << fmt(s.median) << " |\n";
        md << "| std (sample) | " << fmt(s.stddev) << " |\n";
        md << "| q1 | " << fmt(s.q1) << " |\n";
        md << "| q3 | " << fmt(s.q3) << " |\n";
        md << "| min | " << fmt(s.min, "%.0f") << " |\n";
        md << "| max | " << fmt(s.max, "%.0f") << " |\n";
        md << "| zero fraction | " << fmt(s.zero_fraction) << " |\n\n";
        if (v.max_delta_nbits > 0) {
            double pct = 100.0 * static_cast<double>(v.max_delta) /
                         static_cast<double>(v.max_delta_nbits);
            md << "Maximum collapse: delta = " << v.max_delta << " on a "
               << v.max_delta_nbits << "-bit composite (U residue reduced to "
               << v.max_delta_ubits << " bits) -- " << fmt(pct, "%.1f")
               << "% of the full reduction a false pass would need.\n\n";
        }
        md << "## Geometric tail\n\n";
        md << "| t | fraction delta >= t | 2^-t |\n|---|---|---|\n";
        for (int t = 1; t <= 5; ++t) {
            std::size_t c = 0;
            for (int d : v.deltas)
                if (d >= t) ++c;
            md << "| " << t << " | "
               << fmt(static_cast<double>(c) / static_cast<double>(v.deltas.size()), "%.4f")
               << " | " << fmt(std::pow(2.0, -t), "%.4f") << " |\n";
        }
        md << "\n";
    }

    md << "## Top residue patterns (mod 35)\n\n";
    md << "| p1 | p2 | p3 | p1 (mod 5, mod 7) | count | share |\n|---|---|---|---|---|---|\n";
    for (const auto& row : top15) {
        auto [m5, m7] = residue_decomposition(row.residues[0]);
        md << "| " << row.residues[0] << " | " << row.residues[1] << " | "
           << row.residues[2] << " | (" << m5 << ", " << m7 << ") | " << row.count << " | "
           << fmt(row.share * 100, "%.1f") << "% |\n";
    }
    md << "\n";

    if (!v.deltas.empty()) {
        md << "## Correlations\n\n";
        md << "- rho(k, delta) = " << corr_or_absent(v.kk, v.dd) << "\n";
        md << "- rho(M, delta) = " << corr_or_absent(v.mm, v.dd) << "\n";
        md << "- rho(n_bits, delta) = " << corr_or_absent(v.bb, v.dd) << "\n\n";
    }

    md << "## Files\n\n";
    md << "- delta_hist.csv / delta_hist.svg\n";
    md << "- patterns_top15.csv / patterns_top15.svg\n";
    md << "- scatter_k.csv, scatter_M.csv, scatter_bits.csv / scatter.svg\n";

    write_file(paths.report_md, md.str());
    return paths;
}

}  // namespace cforge
