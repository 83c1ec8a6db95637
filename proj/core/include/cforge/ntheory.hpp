#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <variant>

namespace cforge {

using BigInt = mpz_class;

// b^e mod m for m >= 2, e >= 0; throws std::invalid_argument otherwise.
BigInt mod_pow(const BigInt& base, const BigInt& exp, const BigInt& mod);

// Jacobi symbol (a/n) in {-1, 0, 1} for odd n >= 1.
int jacobi(const BigInt& a, const BigInt& n);

enum class MrVerdict { ProbablePrime, CompositeWitnessed };

struct MrOutcome {
    MrVerdict verdict;
    std::int64_t base;
};

// One strong-probable-prime round to base a: with n-1 = m * 2^t (m odd),
// n passes iff a^m = +-1 or a^(m*2^r) = -1 (mod n) for some r < t.
// Requires odd n >= 3 and 2 <= a < n.
MrOutcome miller_rabin(const BigInt& n, std::int64_t a);

// Exact below 3317044064679887385961981 (~3.3e24): trial division by primes
// < 100, then the strong test to the 13 prime bases 2..41, which has no
// composite survivor under that bound. Larger n fall back to 20 prime bases
// plus one strong Lucas round, i.e. a Baillie-PSW-style battery with no
// known counterexample.
bool is_prime_oracle(const BigInt& n);

struct UvPair {
    BigInt u;
    BigInt v;
};

// k-th Lucas pair U_k(P,Q), V_k(P,Q) reduced mod n (n >= 2, k >= 0).
// Works for any modulus, even ones included.
UvPair lucas_uv(std::int64_t P, std::int64_t Q, const BigInt& k, const BigInt& n);

struct LucasParams {
    std::int64_t D;  // discriminant with (D/n) = -1
    std::int64_t P;  // always 1
    std::int64_t Q;  // (1 - D) / 4
    BigInt d;        // odd part of n + 1
    unsigned long s; // n + 1 = d * 2^s
};
struct PerfectSquare {};
struct CompositeByGcd {
    BigInt factor;
};
using SelfridgeResult = std::variant<LucasParams, PerfectSquare, CompositeByGcd>;

// Method-A parameter search over D = 5, -7, 9, -11, 13, ... for odd n >= 3.
// Declares perfect squares instead of looping forever; a D with
// 1 < gcd(n, D) < n short-circuits to an exhibited factor.
SelfridgeResult selfridge_d(const BigInt& n);

}  // namespace cforge
