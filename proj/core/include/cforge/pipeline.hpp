#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "cforge/dataset.hpp"
#include "cforge/forge.hpp"

namespace cforge {

// Raised when a record that survived every MR base also passes the strong
// Lucas test. That breaks the property the whole pipeline exists to
// demonstrate, so the probe writes the offender to witness_path and aborts.
class LucasPassAlarm : public std::runtime_error {
public:
    LucasPassAlarm(std::size_t record_index, std::string witness_path,
                   const std::string& n_decimal);
    std::size_t record_index() const { return record_index_; }
    const std::string& witness_path() const { return witness_path_; }

private:
    std::size_t record_index_;
    std::string witness_path_;
};

struct ProbeStats {
    std::uint64_t measured = 0;
    std::uint64_t gcd_shortcuts = 0;
    std::uint64_t lucas_pseudoprimes = 0;  // non-MR-resistant records only
};

// Attaches a collapse measurement to every record lacking one. An
// MR-resistant record that passes strong Lucas triggers LucasPassAlarm
// (witness written first); a pass on a record some MR base already kills is
// only counted.
ProbeStats probe_records(std::vector<CompositeRecord>& records,
                         const std::string& witness_path);

DatasetMeta make_meta(const ConstructionParams& params, ForgeMode mode);

}  // namespace cforge
