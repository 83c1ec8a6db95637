#include "cforge/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cforge/analysis.hpp"
#include "cforge/dataset.hpp"
#include "cforge/forge.hpp"
#include "cforge/pipeline.hpp"
#include "cforge/selfcheck.hpp"
#include "cforge/version.hpp"

namespace cforge {

namespace {

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text) {
    try {
        auto pos = text.find("..");
        if (pos == std::string::npos) {
            std::int64_t v = std::stoll(text);
            return {v, v};
        }
        return {std::stoll(text.substr(0, pos)), std::stoll(text.substr(pos + 2))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("range", "expected A..B or a single integer, got '" +
                                                text + "'");
    }
}

std::vector<int> parse_bases(const std::string& csv) {
    std::vector<int> bases;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        std::string tok = csv.substr(start, comma == std::string::npos ? comma : comma - start);
        if (!tok.empty()) {
            int b = 0;
            try {
                b = std::stoi(tok);
            } catch (const std::exception&) {
                throw CLI::ValidationError("bases", "'" + tok + "' is not an integer");
            }
            if (b < 2) throw CLI::ValidationError("bases", "bases must be >= 2");
            bases.push_back(b);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (bases.empty()) throw CLI::ValidationError("bases", "at least one base required");
    std::sort(bases.begin(), bases.end());
    bases.erase(std::unique(bases.begin(), bases.end()), bases.end());
    return bases;
}

std::string default_witness(const std::string& dataset_path) {
    std::filesystem::path p(dataset_path);
    p.replace_filename(p.stem().string() + "_witness.json");
    return p.string();
}

struct ForgeArgs {
    std::string k_text = "2..50";
    std::string M_text = "2..50";
    int bits = 60;
    std::string bases_csv = "2,3,5,7,11";
    std::optional<std::uint64_t> count;
    std::optional<double> seconds;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    bool no_bias = false;
    bool resistant = false;
    bool append = false;
    std::string out;
};

int do_forge(const ForgeArgs& a) {
    ConstructionParams params;
    std::tie(params.k_lo, params.k_hi) = parse_range(a.k_text);
    std::tie(params.M_lo, params.M_hi) = parse_range(a.M_text);
    params.target_bits = a.bits;
    params.bases = parse_bases(a.bases_csv);
    params.seed = a.seed;
    params.workers = a.workers;
    params.bias = !a.no_bias;
    params.budget.count = a.count;
    params.budget.seconds = a.seconds;
    params.validate();
    if (!a.count && !a.seconds)
        std::cerr << "note: no --count or --seconds budget; running until the sweep exhausts\n";

    ForgeMode mode = a.resistant ? ForgeMode::MrResistant : ForgeMode::AllCarmichael;
    ForgeResult res = forge_run(params, mode);

    DatasetFile ds;
    ds.meta = make_meta(params, mode);
    ds.records = std::move(res.records);
    ds.record_extras.assign(ds.records.size(), {});
    save_dataset(a.out, ds, a.append);

    const ThroughputStats& st = res.stats;
    std::cout << "forged " << ds.records.size() << " records to " << a.out << " ("
              << st.candidates_seen << " candidates, " << st.carmichaels
              << " carmichael triples, " << st.cells_visited << " cells) in "
              << st.elapsed_seconds << "s";
    if (st.elapsed_seconds > 0) std::cout << " = " << st.carmichaels_per_minute() << "/min";
    std::cout << "\n";
    return 0;
}

int do_probe(const std::string& in, const std::string& out, const std::string& witness,
             bool strict) {
    DatasetFile ds = load_dataset(in, strict ? LoadMode::Strict : LoadMode::Compat);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    std::string target = out.empty() ? in : out;
    std::string witness_path = witness.empty() ? default_witness(target) : witness;
    ProbeStats st = probe_records(ds.records, witness_path);
    save_dataset(target, ds, false);
    std::cout << "measured " << st.measured << " records to " << target << " ("
              << st.gcd_shortcuts << " gcd shortcuts, " << st.lucas_pseudoprimes
              << " strong Lucas passes)\n";
    return 0;
}

int do_analyze(const std::string& in, bool strict) {
    DatasetFile ds = load_dataset(in, strict ? LoadMode::Strict : LoadMode::Compat);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << render_summary(ds.records);
    return 0;
}

int do_report(const std::string& in, const std::string& out_dir, bool strict) {
    DatasetFile ds = load_dataset(in, strict ? LoadMode::Strict : LoadMode::Compat);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    ReportPaths paths = emit_report(ds.records, out_dir);
    std::cout << "wrote " << paths.report_md << " and 8 companion csv/svg files\n";
    return 0;
}

int do_verify() {
    bool all_pass = true;
    for (const CheckResult& r : run_selfchecks()) {
        std::cout << (r.pass ? "[pass] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "verification passed\n" : "verification FAILED\n");
    return all_pass ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"forge three-prime Carmichael composites tuned against fixed Miller-Rabin "
                 "bases and measure how far the strong Lucas U-sequence collapses on them"};
    app.name("collapse-forge");
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    ForgeArgs fa;
    CLI::App* forge = app.add_subcommand("forge", "generate composite records into a dataset");
    forge->add_option("--k", fa.k_text, "p2 multiplier range A..B (default 2..50)");
    forge->add_option("--M", fa.M_text, "p3 multiplier range A..B (default 2..50)");
    forge->add_option("--bits", fa.bits, "target bit length of n (window spans -8..+9)");
    forge->add_option("--bases", fa.bases_csv, "comma-separated Miller-Rabin bases");
    forge->add_option("--count", fa.count, "stop after this many records");
    forge->add_option("--seconds", fa.seconds, "stop after this many seconds");
    forge->add_option("--seed", fa.seed, "RNG seed")->envname("COLLAPSE_FORGE_SEED");
    forge->add_option("--workers", fa.workers, "worker thread count");
    forge->add_flag("--no-bias", fa.no_bias, "disable the witness-hostile residue bias on p1");
    forge->add_flag("--resistant", fa.resistant,
                    "keep only records that pass every requested base");
    forge->add_flag("--append", fa.append, "append to an existing dataset");
    forge->add_option("--out", fa.out, "output dataset path")->required();

    std::string probe_in, probe_out, probe_witness;
    bool probe_strict = false;
    CLI::App* probe =
        app.add_subcommand("probe", "fill strong Lucas measurements for unmeasured records");
    probe->add_option("--in", probe_in, "input dataset path")->required();
    probe->add_option("--out", probe_out, "output dataset path (default: rewrite input)");
    probe->add_option("--witness", probe_witness,
                      "where to write the alert record if a resistant composite passes");
    probe->add_flag("--strict", probe_strict, "reject unknown dataset fields");

    std::string analyze_in;
    bool analyze_strict = false;
    CLI::App* analyze = app.add_subcommand("analyze", "print collapse statistics for a dataset");
    analyze->add_option("--in", analyze_in, "input dataset path")->required();
    analyze->add_flag("--strict", analyze_strict, "reject unknown dataset fields");

    std::string report_in, report_out = "report";
    bool report_strict = false;
    CLI::App* report =
        app.add_subcommand("report", "emit the markdown report and csv/svg companions");
    report->add_option("--in", report_in, "input dataset path")->required();
    report->add_option("--out", report_out, "output directory (default: report/)");
    report->add_flag("--strict", report_strict, "reject unknown dataset fields");

    CLI::App* verify = app.add_subcommand("verify", "run the built-in oracle suites");

    std::vector<const char*> argv;
    argv.push_back("collapse-forge");
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (forge->parsed()) return do_forge(fa);
        if (probe->parsed()) return do_probe(probe_in, probe_out, probe_witness, probe_strict);
        if (analyze->parsed()) return do_analyze(analyze_in, analyze_strict);
        if (report->parsed()) return do_report(report_in, report_out, report_strict);
        if (verify->parsed()) return do_verify();
    } catch (const LucasPassAlarm& e) {
        std::cerr << "ALERT: " << e.what() << "\n";
        return 1;
    } catch (const DatasetError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return 2;
    } catch (const NoSolutionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace cforge
