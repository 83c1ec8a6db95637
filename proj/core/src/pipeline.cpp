#include "cforge/pipeline.hpp"

#include <sstream>

#include "cforge/lucas.hpp"
#include "cforge/version.hpp"

namespace cforge {

LucasPassAlarm::LucasPassAlarm(std::size_t record_index, std::string witness_path,
                               const std::string& n_decimal)
    : std::runtime_error("strong Lucas PASS on MR-resistant record #" +
                         std::to_string(record_index) + " (n = " + n_decimal +
                         "); witness written to " + witness_path),
      record_index_(record_index),
      witness_path_(std::move(witness_path)) {}

ProbeStats probe_records(std::vector<CompositeRecord>& records,
                         const std::string& witness_path) {
    ProbeStats stats;
    for (std::size_t i = 0; i < records.size(); ++i) {
        CompositeRecord& rec = records[i];
        if (rec.lucas) continue;
        CollapseMeasurement m = measure_collapse(rec);
        rec.lucas = m;
        ++stats.measured;
        if (m.gcd_shortcut) {
            ++stats.gcd_shortcuts;
            continue;
        }
        if (m.strong_lucas_pass) {
            bool mr_resistant = !rec.mr_first_fail.has_value();
            if (mr_resistant) {
                write_pseudoprime_witness(rec, witness_path);
                throw LucasPassAlarm(i, witness_path, rec.n.get_str());
            }
            ++stats.lucas_pseudoprimes;
        }
    }
    return stats;
}

DatasetMeta make_meta(const ConstructionParams& params, ForgeMode mode) {
    DatasetMeta meta;
    meta.format_version = kDatasetFormatVersion;
    meta.seed = params.seed;
    meta.bases = params.bases;
    meta.created_utc = utc_timestamp();
    std::ostringstream grid;
    grid << "k=" << params.k_lo << ".." << params.k_hi << " M=" << params.M_lo << ".."
         << params.M_hi << " bits=" << params.target_bits << " mode="
         << (mode == ForgeMode::AllCarmichael ? "all-carmichael" : "mr-resistant")
         << " bias=" << (params.bias ? "on" : "off") << " workers=" << params.workers;
    if (params.budget.count) grid << " count=" << *params.budget.count;
    if (params.budget.seconds) grid << " seconds=" << *params.budget.seconds;
    meta.params_grid = grid.str();
    return meta;
}

}  // namespace cforge
