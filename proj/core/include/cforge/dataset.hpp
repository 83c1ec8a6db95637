#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cforge/records.hpp"

namespace cforge {

class DatasetError : public std::runtime_error {
public:
    DatasetError(std::string field, std::optional<std::size_t> record_index,
                 const std::string& message);
    const std::string& field() const { return field_; }
    std::optional<std::size_t> record_index() const { return record_index_; }

private:
    std::string field_;
    std::optional<std::size_t> record_index_;
};

struct DatasetMeta {
    std::string format_version = "1";
    std::uint64_t seed = 0;
    std::vector<int> bases;
    std::string created_utc;   // ISO-8601 Z; honors SOURCE_DATE_EPOCH
    std::string params_grid;   // human-readable run parameters
    // unknown meta fields kept verbatim in compat mode (key -> raw JSON)
    std::map<std::string, std::string> extra;
};

struct DatasetFile {
    DatasetMeta meta;
    std::vector<CompositeRecord> records;
    // per-record unknown fields kept in compat mode; aligned with records
    std::vector<std::map<std::string, std::string>> record_extras;
    // unknown top-level fields kept in compat mode
    std::map<std::string, std::string> root_extra;
    std::vector<std::string> warnings;  // compat notes: aliases applied, unknowns kept
};

enum class LoadMode { Compat, Strict };

// Structural + arithmetic validation: triple shape, primality via the
// oracle, n = p1*p2*p3, bit length, residues, Lucas measurement coherence.
// Throws DatasetError naming the first offending record and field.
void validate_dataset(const DatasetFile& ds);

// Big integers travel as decimal strings. Strict mode rejects unknown
// fields; compat maps known aliases, keeps unknowns verbatim, and lists
// both in warnings.
DatasetFile load_dataset(const std::string& path, LoadMode mode);

// Validates, then writes canonical UTF-8 JSON (2-space indent, fixed key
// order). append=true loads the existing file first (keeping its meta) and
// extends its record list.
void save_dataset(const std::string& path, const DatasetFile& ds, bool append = false);

std::string utc_timestamp();  // now, or SOURCE_DATE_EPOCH when set

// Serialized record + measurement for the probe's loud-abort path.
void write_pseudoprime_witness(const CompositeRecord& record, const std::string& path);

}  // namespace cforge
