#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cforge/records.hpp"

namespace cforge {

// No (k, M) cell in the requested grid admits a Korselt-compatible residue
// class (every cell has gcd(k, M) > 1 or k == M).
class NoSolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KorseltClass {
    std::uint64_t r;        // p1 must be = r (mod modulus)
    std::uint64_t modulus;  // k * M
};

// Solves { M*p1 = -1 (mod k), k*p1 = -1 (mod M) }, the reduction of
// Korselt's criterion to the triple shape. Empty when gcd(k, M) > 1.
// Requires 2 <= k, M and k != M.
std::optional<KorseltClass> korselt_congruence(std::int64_t k, std::int64_t M);

struct Triple {
    BigInt p2, p3, n;
};

// p2 = k(p1-1)+1, p3 = M(p1-1)+1, n = p1*p2*p3, for odd p1 >= 5.
Triple build_triple(const BigInt& p1, std::int64_t k, std::int64_t M);

// Full gate: p1, p2, p3 distinct primes (oracle) and p_i - 1 | n - 1 for all i.
bool korselt_check(const BigInt& p1, const BigInt& p2, const BigInt& p3);

struct MrFilterResult {
    std::vector<int> passed;
    std::optional<int> first_fail;
};

// Runs the strong test for each base in order, stopping at the first
// witness; bases >= n are skipped (out of range at that size). n must be
// odd composite >= 9.
MrFilterResult mr_filter(const BigInt& n, const std::vector<int>& bases);

// Deterministic generator of p1 candidates for one (k, M) cell: the unique
// Korselt residue class mod kM, intersected with the bias classes when
// enabled, enumerated in seeded random order over the p1 window that puts
// n within target_bits +- 8, with multiples of small primes (for p1 and for
// both derived forms) sieved out.
class CandidateStream {
public:
    CandidateStream(const ConstructionParams& params, std::int64_t k, std::int64_t M);
    ~CandidateStream();
    CandidateStream(CandidateStream&&) noexcept;
    CandidateStream& operator=(CandidateStream&&) noexcept;

    // false when the cell can never produce a candidate (congruences
    // infeasible, all candidates divisible by a fixed prime, empty window)
    bool viable() const;
    std::optional<BigInt> next();

    const KorseltClass& korselt_class() const;
    const BigInt& stream_modulus() const;   // kM times any bias moduli folded in
    const BigInt& window_lo() const;
    const BigInt& window_hi() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

CandidateStream candidate_stream(const ConstructionParams& params, std::int64_t k,
                                 std::int64_t M);

struct ForgeResult {
    std::vector<CompositeRecord> records;
    ThroughputStats stats;
};

// Sweeps the (k, M) grid in seeded order (odd k and M first), giving each
// viable cell a fixed candidate quota per visit and cycling until the budget
// is spent or every stream is exhausted. AllCarmichael emits every
// Korselt-valid triple; MrResistant emits only those passing every MR base.
// Both modes attach the MR filter outcome to each record. With workers > 1
// cells are sharded by grid index and each worker fills an equal share of a
// count budget, so count-budgeted output is identical for a given seed
// regardless of scheduling.
ForgeResult forge_run(const ConstructionParams& params, ForgeMode mode);

}  // namespace cforge
