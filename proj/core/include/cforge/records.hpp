#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cforge/ntheory.hpp"

namespace cforge {

// Result of running one composite through the strong Lucas test with
// Selfridge parameters. Exactly one of three shapes:
//   - gcd_shortcut set: a D in the search shared a factor with n, no test ran
//   - delta set, lucas_pseudoprime false: the normal case, U_d != 0 mod n
//   - delta set, lucas_pseudoprime true: U_d == 0, delta pinned to n_bits
struct CollapseMeasurement {
    std::optional<std::int64_t> D;
    std::optional<int> d_bits;               // bit length of the odd part d
    std::optional<unsigned long> s;          // n + 1 = d * 2^s
    std::optional<BigInt> u_residue;         // U_d mod n
    std::optional<int> u_residue_bits;
    int n_bits = 0;
    std::optional<int> delta;                // n_bits - u_residue_bits
    bool strong_lucas_pass = false;
    bool lucas_pseudoprime = false;
    std::optional<unsigned long> v_zero_round;  // first r with V_{d*2^r} == 0
    std::optional<BigInt> gcd_shortcut;
};

// One forged composite n = p1*p2*p3 with p2 = k(p1-1)+1, p3 = M(p1-1)+1.
struct CompositeRecord {
    BigInt p1, p2, p3, n;
    std::int64_t k = 0;
    std::int64_t M = 0;
    int n_bits = 0;
    std::vector<int> residues_mod35;         // p1, p2, p3 mod 35
    std::vector<int> mr_passed;              // bases from the run's list that n survives
    std::optional<int> mr_first_fail;        // first base that witnesses n composite
    std::optional<CollapseMeasurement> lucas;
};

struct Budget {
    std::optional<std::uint64_t> count;      // stop after this many emitted records
    std::optional<double> seconds;           // or after this much wall time
};

struct ConstructionParams {
    std::int64_t k_lo = 2, k_hi = 2;
    std::int64_t M_lo = 2, M_hi = 2;
    int target_bits = 60;
    std::vector<int> bases{2, 3, 5, 7, 11};
    std::uint64_t seed = 1;
    Budget budget;
    bool bias = true;                        // steer p1 into Jacobi classes that favor MR survival
    int workers = 1;

    void validate() const;                   // throws std::invalid_argument
};

enum class ForgeMode { AllCarmichael, MrResistant };

struct ThroughputStats {
    std::uint64_t candidates_seen = 0;       // p1 values drawn from streams
    std::uint64_t triples_prime = 0;         // candidates whose whole triple was prime
    std::uint64_t carmichaels = 0;           // Korselt-valid composites found
    std::uint64_t records_emitted = 0;
    std::uint64_t cells_visited = 0;
    std::uint64_t cells_exhausted = 0;
    double elapsed_seconds = 0.0;

    double carmichaels_per_minute() const {
        return elapsed_seconds > 0 ? 60.0 * static_cast<double>(carmichaels) / elapsed_seconds
                                   : 0.0;
    }
};

}  // namespace cforge
