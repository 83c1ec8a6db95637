#include "cforge/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "cforge/analysis.hpp"
#include "cforge/forge.hpp"
#include "cforge/lucas.hpp"
#include "cforge/ntheory.hpp"

namespace cforge {

namespace {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(u128(a) * b % m); }

u64 powmod(u64 b, u64 e, u64 m) {
    u64 r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

// smallest-prime-factor sieve; spf[n] == n marks primes
std::vector<u32> spf_sieve(u32 limit) {
    std::vector<u32> spf(limit + 1, 0);
    for (u32 i = 2; i <= limit; ++i) {
        if (spf[i] == 0) {
            for (u64 j = i; j <= limit; j += i)
                if (spf[j] == 0) spf[j] = i;
        }
    }
    return spf;
}

bool naive_mr_round(u64 n, u64 a) {
    u64 m = n - 1;
    int t = 0;
    while (m % 2 == 0) {
        m /= 2;
        ++t;
    }
    u64 x = powmod(a, m, n);
    if (x == 1 || x == n - 1) return true;
    for (int r = 1; r < t; ++r) {
        x = mulmod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

// strong Lucas with Selfridge parameters via the schoolbook O(d) recurrence;
// returns -1 when the test never runs (square or shared factor), else 0/1
int naive_strong_lucas(u64 n) {
    u64 root = static_cast<u64>(std::sqrt(static_cast<double>(n)));
    for (u64 r = root > 1 ? root - 1 : 1; r <= root + 1; ++r)
        if (r * r == n) return -1;

    i64 D = 0;
    for (i64 mag = 5;; mag += 2) {
        i64 cand = (mag % 4 == 1) ? mag : -mag;
        int j = jacobi(BigInt(static_cast<long>(cand)), BigInt(static_cast<unsigned long>(n)));
        if (j == -1) {
            D = cand;
            break;
        }
        if (j == 0) {
            u64 g = std::gcd(static_cast<u64>(mag), n);
            if (g > 1 && g < n) return -1;
        }
    }
    i64 Q = (1 - D) / 4;
    u64 g = std::gcd(static_cast<u64>(2 * std::abs(Q) * std::abs(D)) % n, n);
    if (g > 1 && g < n) return -1;

    u64 d = n + 1;
    unsigned s = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++s;
    }

    u64 qmod = Q >= 0 ? static_cast<u64>(Q) % n : n - (static_cast<u64>(-Q) % n) % n;
    qmod %= n;
    // U_0=0, U_1=1, V_0=2, V_1=P=1
    u64 u = 0, v = 2 % n, u1 = 1 % n, v1 = 1 % n;
    // advance to index d by plain iteration: next = P*cur - Q*prev
    for (u64 i = 1; i < d; ++i) {
        u64 nu = (u1 + n - mulmod(qmod, u, n)) % n;
        u64 nv = (v1 + n - mulmod(qmod, v, n)) % n;
        u = u1;
        v = v1;
        u1 = nu;
        v1 = nv;
    }
    u = u1;
    v = v1;  // U_d, V_d

    if (u == 0) return 1;
    u64 qm = powmod(qmod, d, n);
    for (unsigned r = 0; r < s; ++r) {
        if (v == 0) return 1;
        v = (mulmod(v, v, n) + 2 * n - 2 * qm % n) % n;
        qm = mulmod(qm, qm, n);
    }
    return 0;
}

struct Suite {
    std::vector<CheckResult> results;
    void add(const std::string& name, bool pass, const std::string& detail) {
        results.push_back({name, pass, detail});
    }
};

void check_jacobi_multiplicativity(Suite& s) {
    for (long n = 3; n < 200; n += 2) {
        BigInt nz(n);
        for (long a = -50; a <= 50; ++a) {
            for (long b = -50; b <= 50; ++b) {
                if (jacobi(BigInt(a) * BigInt(b), nz) !=
                    jacobi(BigInt(a), nz) * jacobi(BigInt(b), nz)) {
                    s.add("jacobi-multiplicativity", false,
                          "violated at n=" + std::to_string(n) + " a=" + std::to_string(a) +
                              " b=" + std::to_string(b));
                    return;
                }
            }
        }
    }
    s.add("jacobi-multiplicativity", true, "odd n < 200, a,b in [-50,50]");
}

void check_jacobi_euler(Suite& s, const std::vector<u32>& spf) {
    for (u64 p = 3; p < 10000; p += 2) {
        if (spf[p] != p) continue;
        for (u64 a = 1; a < p; ++a) {
            u64 e = powmod(a, (p - 1) / 2, p);
            int want = e == 1 ? 1 : (e == p - 1 ? -1 : 0);
            if (jacobi(BigInt(static_cast<unsigned long>(a)),
                       BigInt(static_cast<unsigned long>(p))) != want) {
                s.add("jacobi-euler-criterion", false,
                      "mismatch at p=" + std::to_string(p) + " a=" + std::to_string(a));
                return;
            }
        }
    }
    s.add("jacobi-euler-criterion", true, "all odd primes p < 10^4, all 1 <= a < p");
}

void check_mr_prime_soundness(Suite& s, const std::vector<u32>& spf) {
    const int bases[] = {2, 3, 5, 7, 11};
    for (u64 p = 3; p < 100000; p += 2) {
        if (spf[p] != p) continue;
        for (int a : bases) {
            if (static_cast<u64>(a) >= p) continue;
            if (miller_rabin(BigInt(static_cast<unsigned long>(p)), a).verdict !=
                MrVerdict::ProbablePrime) {
                s.add("mr-prime-soundness", false,
                      "prime " + std::to_string(p) + " witnessed by base " +
                          std::to_string(a));
                return;
            }
        }
    }
    s.add("mr-prime-soundness", true, "no prime < 10^5 is witnessed composite");
}

void check_mr_battery_vs_trial_division(Suite& s, const std::vector<u32>& spf) {
    // the smallest composite passing all of {2,3,5,7,11} is ~2.15e12, so the
    // battery and trial division must agree everywhere below 10^5
    const std::vector<int> bases = {2, 3, 5, 7, 11};
    for (u64 n = 9; n < 100000; n += 2) {
        bool composite = spf[n] != n;
        if (!composite) continue;
        MrFilterResult r = mr_filter(BigInt(static_cast<unsigned long>(n)), bases);
        if (!r.first_fail) {
            s.add("mr-battery-vs-trial-division", false,
                  "composite " + std::to_string(n) + " passed the whole battery");
            return;
        }
    }
    s.add("mr-battery-vs-trial-division", true,
          "every odd composite < 10^5 is witnessed; exception set empty as expected");
}

void check_lucas_ladder_vs_naive(Suite& s) {
    const u64 moduli[20] = {3,   9,    15,   21,  99,   101,  255,  341,  561,  703,
                            781, 1105, 1729, 201, 4913, 5459, 6601, 8911, 9881, 9999};
    const i64 qs[3] = {-1, -2, 3};
    for (u64 n : moduli) {
        for (i64 Q : qs) {
            u64 qmod = Q >= 0 ? static_cast<u64>(Q) % n : (n - static_cast<u64>(-Q) % n) % n;
            u64 u = 0, v = 2 % n;        // U_0, V_0
            u64 un = 1 % n, vn = 1 % n;  // U_1, V_1 with P = 1
            for (i64 k = 0; k <= 300; ++k) {
                UvPair got = lucas_uv(1, Q, BigInt(static_cast<long>(k)),
                                      BigInt(static_cast<unsigned long>(n)));
                if (got.u != u || got.v != v) {
                    s.add("lucas-ladder-vs-naive", false,
                          "mismatch at n=" + std::to_string(n) + " Q=" + std::to_string(Q) +
                              " k=" + std::to_string(k));
                    return;
                }
                // next = P*cur - Q*prev
                u64 u2 = (un + n - mulmod(qmod, u, n)) % n;
                u64 v2 = (vn + n - mulmod(qmod, v, n)) % n;
                u = un;
                v = vn;
                un = u2;
                vn = v2;
            }
        }
    }
    s.add("lucas-ladder-vs-naive", true, "20 moduli, Q in {-1,-2,3}, k <= 300");
}

void check_lucas_prime_divisibility(Suite& s, const std::vector<u32>& spf) {
    for (u64 p = 5; p < 10000; p += 2) {
        if (spf[p] != p) continue;
        SelfridgeResult sr = selfridge_d(BigInt(static_cast<unsigned long>(p)));
        auto* params = std::get_if<LucasParams>(&sr);
        if (!params) continue;  // p divides a tried discriminant
        UvPair uv = lucas_uv(params->P, params->Q, BigInt(static_cast<unsigned long>(p + 1)),
                             BigInt(static_cast<unsigned long>(p)));
        if (uv.u != 0) {
            s.add("lucas-prime-divisibility", false,
                  "U_{p+1} != 0 (mod p) for prime p=" + std::to_string(p));
            return;
        }
    }
    s.add("lucas-prime-divisibility", true, "U_{p+1} = 0 (mod p) for all primes p < 10^4");
}

void check_prime_transparency(Suite& s, const std::vector<u32>& spf) {
    for (u64 p = 101; p < 100000; p += 2) {
        if (spf[p] != p) continue;
        SelfridgeResult sr = selfridge_d(BigInt(static_cast<unsigned long>(p)));
        auto* params = std::get_if<LucasParams>(&sr);
        if (!params) {
            s.add("strong-lucas-prime-transparency", false,
                  "selfridge did not yield parameters for prime " + std::to_string(p));
            return;
        }
        StrongLucasOutcome out = strong_lucas(BigInt(static_cast<unsigned long>(p)), *params);
        if (out.gcd_shortcut || !out.pass) {
            s.add("strong-lucas-prime-transparency", false,
                  "prime " + std::to_string(p) + " failed the strong Lucas test");
            return;
        }
    }
    s.add("strong-lucas-prime-transparency", true, "all primes in (10^2, 10^5) pass");
}

void check_selfridge_determinism(Suite& s) {
    for (unsigned long n : {13ul, 703ul, 5459ul, 99991ul}) {
        SelfridgeResult a = selfridge_d(BigInt(n));
        SelfridgeResult b = selfridge_d(BigInt(n));
        auto *pa = std::get_if<LucasParams>(&a), *pb = std::get_if<LucasParams>(&b);
        if (!pa || !pb || pa->D != pb->D || pa->Q != pb->Q || pa->d != pb->d ||
            pa->s != pb->s) {
            s.add("selfridge-determinism", false, "unstable result at n=" + std::to_string(n));
            return;
        }
    }
    s.add("selfridge-determinism", true, "repeated calls agree");
}

void check_strong_lucas_oracle(Suite& s, const std::vector<u32>& spf) {
    std::vector<u64> naive_set, impl_set;
    for (u64 n = 9; n < 100000; n += 2) {
        if (spf[n] == n) continue;  // prime
        if (naive_strong_lucas(n) == 1) naive_set.push_back(n);

        BigInt nz(static_cast<unsigned long>(n));
        SelfridgeResult sr = selfridge_d(nz);
        if (auto* params = std::get_if<LucasParams>(&sr)) {
            StrongLucasOutcome out = strong_lucas(nz, *params);
            if (!out.gcd_shortcut && out.pass) impl_set.push_back(n);
        }
    }
    if (naive_set != impl_set) {
        std::ostringstream d;
        d << "naive found " << naive_set.size() << ", implementation found "
          << impl_set.size();
        s.add("strong-lucas-oracle-100k", false, d.str());
        return;
    }
    std::ostringstream d;
    d << naive_set.size() << " strong Lucas pseudoprimes < 10^5, sets identical (first: ";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, naive_set.size()); ++i)
        d << (i ? ", " : "") << naive_set[i];
    d << ")";
    s.add("strong-lucas-oracle-100k", true, d.str());
}

void check_korselt_congruence_brute(Suite& s, const std::vector<u32>& spf) {
    u64 checked = 0;
    for (i64 k = 2; k <= 12; ++k) {
        for (i64 M = 2; M <= 12; ++M) {
            if (k == M) continue;
            auto kc = korselt_congruence(k, M);
            if (!kc) continue;
            for (u64 p1 = 5; p1 < 500; p1 += 2) {
                if (spf[p1] != p1) continue;
                BigInt p1z(static_cast<unsigned long>(p1));
                Triple t = build_triple(p1z, k, M);
                if (!is_prime_oracle(t.p2) || !is_prime_oracle(t.p3)) continue;
                ++checked;
                bool by_check = korselt_check(p1z, t.p2, t.p3);
                bool by_class = (p1 % kc->modulus) == kc->r;
                if (by_check != by_class) {
                    s.add("korselt-congruence-brute", false,
                          "reduction disagrees at k=" + std::to_string(k) +
                              " M=" + std::to_string(M) + " p1=" + std::to_string(p1));
                    return;
                }
            }
        }
    }
    s.add("korselt-congruence-brute", true,
          "congruence equals full Korselt check on " + std::to_string(checked) +
              " prime triples");
}

void check_carmichael_scan(Suite& s) {
    // independent list: Korselt scan over all odd composites < 2^20
    const u32 limit = 1u << 20;
    std::vector<u32> spf = spf_sieve(limit);
    std::set<u64> carmichaels;
    for (u64 n = 9; n < limit; n += 2) {
        if (spf[n] == n) continue;
        u64 rest = n;
        bool squarefree = true, korselt = true;
        while (rest > 1) {
            u64 p = spf[rest];
            rest /= p;
            if (rest % p == 0) {
                squarefree = false;
                break;
            }
            if ((n - 1) % (p - 1) != 0) {
                korselt = false;
                break;
            }
        }
        if (squarefree && korselt) carmichaels.insert(n);
    }
    if (carmichaels.size() != 45 || !carmichaels.count(561) || !carmichaels.count(2821)) {
        s.add("carmichael-scan-cross-check", false,
              "Korselt scan looks wrong: " + std::to_string(carmichaels.size()) +
                  " members");
        return;
    }

    ConstructionParams params;
    params.k_lo = 2;
    params.k_hi = 50;
    params.M_lo = 2;
    params.M_hi = 50;
    params.target_bits = 11;  // window [3, 20] covers everything below 2^20
    params.seed = 7;
    params.bias = false;
    params.budget.count = 1u << 20;  // effectively: run to exhaustion
    ForgeResult res = forge_run(params, ForgeMode::AllCarmichael);

    std::set<u64> emitted;
    for (const auto& rec : res.records) {
        u64 n = mpz_get_ui(rec.n.get_mpz_t());
        if (!carmichaels.count(n)) {
            s.add("carmichael-scan-cross-check", false,
                  "forge emitted " + rec.n.get_str() + " which the scan rejects");
            return;
        }
        emitted.insert(n);
    }
    if (!emitted.count(2821) || !emitted.count(8911)) {
        s.add("carmichael-scan-cross-check", false,
              "expected members 2821 and 8911 missing from the sweep");
        return;
    }
    s.add("carmichael-scan-cross-check", true,
          std::to_string(res.records.size()) + " forged records, all in the scan list of " +
              std::to_string(carmichaels.size()) + "; includes 2821 and 8911");
}

void check_geometric_tail(Suite& s) {
    ConstructionParams params;
    params.k_lo = 2;
    params.k_hi = 40;
    params.M_lo = 2;
    params.M_hi = 40;
    params.target_bits = 60;
    params.seed = 20260815;
    params.bias = false;
    params.budget.count = 800;
    ForgeResult res = forge_run(params, ForgeMode::AllCarmichael);
    if (res.records.size() < 500) {
        s.add("geometric-tail-60bit", false,
              "only " + std::to_string(res.records.size()) + " records forged");
        return;
    }
    std::vector<int> deltas;
    for (const auto& rec : res.records) {
        CollapseMeasurement m = measure_collapse(rec);
        if (m.gcd_shortcut || m.lucas_pseudoprime) continue;
        deltas.push_back(*m.delta);
    }
    double n = static_cast<double>(deltas.size());
    std::size_t zeros = 0;
    for (int d : deltas)
        if (d == 0) ++zeros;
    double zf = static_cast<double>(zeros) / n;
    std::ostringstream detail;
    detail << deltas.size() << " measured, zero-fraction " << zf;
    if (zf < 0.15 || zf > 0.65) {
        s.add("geometric-tail-60bit", false, detail.str());
        return;
    }
    for (int t = 1; t <= 3; ++t) {
        std::size_t c = 0;
        for (int d : deltas)
            if (d >= t) ++c;
        double frac = static_cast<double>(c) / n;
        double ref = std::pow(2.0, -t);
        if (frac < 0.5 * ref || frac > 1.5 * ref) {
            detail << "; tail t=" << t << " fraction " << frac << " outside [" << 0.5 * ref
                   << ", " << 1.5 * ref << "]";
            s.add("geometric-tail-60bit", false, detail.str());
            return;
        }
        detail << "; t=" << t << ": " << frac;
    }
    s.add("geometric-tail-60bit", true, detail.str());
}

}  // namespace

std::vector<CheckResult> run_selfchecks() {
    Suite s;
    std::vector<u32> spf = spf_sieve(100000);
    check_jacobi_multiplicativity(s);
    check_jacobi_euler(s, spf);
    check_mr_prime_soundness(s, spf);
    check_mr_battery_vs_trial_division(s, spf);
    check_lucas_ladder_vs_naive(s);
    check_lucas_prime_divisibility(s, spf);
    check_prime_transparency(s, spf);
    check_selfridge_determinism(s);
    check_strong_lucas_oracle(s, spf);
    check_korselt_congruence_brute(s, spf);
    check_carmichael_scan(s);
    check_geometric_tail(s);
    return s.results;
}

}  // namespace cforge
