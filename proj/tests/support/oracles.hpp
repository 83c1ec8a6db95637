// Independent naive reference implementations used as test-side ground truth.
// Everything here is deliberately schoolbook: trial division, O(k) recurrences,
// Jacobi via factoring + Euler's criterion. Slow but obviously correct.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

using u64 = std::uint64_t;
using i64 = std::int64_t;

u64 mulmod(u64 a, u64 b, u64 m);
u64 powmod(u64 a, u64 e, u64 m);

bool trial_prime(u64 n);
std::vector<std::pair<u64, int>> factorize(u64 n);

// strong probable-prime round; n odd >= 3, 2 <= a < n
bool mr_probable_prime(u64 n, u64 a);

// Legendre via Euler's criterion, Jacobi as product over prime factorization
int legendre(i64 a, u64 p);
int jacobi(i64 a, u64 n);

struct Selfridge {
    bool square = false;
    bool gcd_shortcut = false;
    i64 D = 0;
    u64 g = 0;
};
Selfridge selfridge(u64 n);

// U_k, V_k mod n by the O(k) recurrence
std::pair<u64, u64> lucas_uv(i64 P, i64 Q, u64 k, u64 n);

struct StrongLucas {
    bool applicable = false;  // false: square or shared-factor shortcut
    bool pass = false;
    u64 u_d = 0;
};
StrongLucas strong_lucas(u64 n);

// composites < limit passing the strong probable-prime test for one base
std::vector<u64> spsp_below(u64 limit, u64 base);
// composites < limit passing the strong Lucas test with Selfridge parameters
std::vector<u64> slpsp_below(u64 limit);
// Korselt scan over factorizations
std::vector<u64> carmichaels_below(u64 limit);

}  // namespace oracle
