#pragma once

#include <optional>

#include "cforge/ntheory.hpp"
#include "cforge/records.hpp"

namespace cforge {

// Bit length of x >= 0; bitlen(0) == 0.
int bitlen(const BigInt& x);

struct StrongLucasOutcome {
    bool pass = false;
    BigInt u_d;                                // U_d mod n (valid unless gcd_shortcut)
    std::optional<unsigned long> v_zero_round; // first r in [0, s) with V_{d*2^r} == 0
    std::optional<BigInt> gcd_shortcut;        // proper factor gcd(n, 2QD) when found
};

// Strong Lucas test for odd n >= 3 with precomputed Selfridge parameters:
// n + 1 = d * 2^s; pass iff U_d == 0 or V_{d*2^r} == 0 for some r < s.
StrongLucasOutcome strong_lucas(const BigInt& n, const LucasParams& params);

// Runs the full measurement on a forged composite: Selfridge parameters,
// strong Lucas, and the collapse depth delta = n_bits - bitlen(U_d mod n).
// U_d == 0 pins delta to n_bits and flags lucas_pseudoprime. Throws
// std::logic_error if record.n is prime or a perfect square (either means
// the forge emitted garbage, which must not be measured quietly).
CollapseMeasurement measure_collapse(const CompositeRecord& record);

}  // namespace cforge
