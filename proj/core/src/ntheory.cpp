#include "cforge/ntheory.hpp"

#include <gmp.h>

#include <array>
#include <stdexcept>

#include "lucas_chain.hpp"

namespace cforge {

namespace {

constexpr std::array<int, 25> kPrimesBelow100 = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
    43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

// Strong test to these 13 bases has no composite survivor below
// 3317044064679887385961981.
constexpr std::array<int, 13> kDeterministicBases = {2,  3,  5,  7,  11, 13, 17,
                                                     19, 23, 29, 31, 37, 41};

constexpr std::array<int, 20> kLargeBases = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                             31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

const BigInt& deterministic_bound() {
    static const BigInt bound("3317044064679887385961981");
    return bound;
}

}  // namespace

BigInt mod_pow(const BigInt& base, const BigInt& exp, const BigInt& mod) {
    if (mod < 2) throw std::invalid_argument("mod_pow: modulus must be >= 2");
    if (exp < 0) throw std::invalid_argument("mod_pow: exponent must be >= 0");
    BigInt out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return out;
}

int jacobi(const BigInt& a, const BigInt& n) {
    if (n < 1 || mpz_even_p(n.get_mpz_t()))
        throw std::invalid_argument("jacobi: n must be odd and >= 1");
    return mpz_jacobi(a.get_mpz_t(), n.get_mpz_t());
}

MrOutcome miller_rabin(const BigInt& n, std::int64_t a) {
    if (n < 3 || mpz_even_p(n.get_mpz_t()))
        throw std::invalid_argument("miller_rabin: n must be odd and >= 3");
    if (a < 2 || BigInt(a) >= n)
        throw std::invalid_argument("miller_rabin: base must satisfy 2 <= a < n");

    BigInt nm1 = n - 1;
    unsigned long t = mpz_scan1(nm1.get_mpz_t(), 0);
    BigInt m = nm1 >> t;

    BigInt x = mod_pow(BigInt(a), m, n);
    if (x == 1 || x == nm1) return {MrVerdict::ProbablePrime, a};
    for (unsigned long r = 1; r < t; ++r) {
        x = (x * x) % n;
        if (x == nm1) return {MrVerdict::ProbablePrime, a};
    }
    return {MrVerdict::CompositeWitnessed, a};
}

bool is_prime_oracle(const BigInt& n) {
    if (n < 2) return false;
    for (int p : kPrimesBelow100) {
        if (mpz_divisible_ui_p(n.get_mpz_t(), static_cast<unsigned long>(p)))
            return n == p;
    }
    // no factor below 100, so anything under 100^2 is prime
    if (n < 10000) return true;

    if (n < deterministic_bound()) {
        for (int a : kDeterministicBases) {
            if (miller_rabin(n, a).verdict == MrVerdict::CompositeWitnessed) return false;
        }
        return true;
    }

    for (int a : kLargeBases) {
        if (miller_rabin(n, a).verdict == MrVerdict::CompositeWitnessed) return false;
    }
    SelfridgeResult sr = selfridge_d(n);
    if (std::holds_alternative<PerfectSquare>(sr)) return false;
    if (std::holds_alternative<CompositeByGcd>(sr)) return false;
    const auto& params = std::get<LucasParams>(sr);
    BigInt g;
    BigInt qd = BigInt(2) * params.Q * params.D;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), qd.get_mpz_t());
    if (g != 1 && g != n) return false;
    return detail::strong_lucas_eval(n, params).pass;
}

UvPair lucas_uv(std::int64_t P, std::int64_t Q, const BigInt& k, const BigInt& n) {
    if (n < 2) throw std::invalid_argument("lucas_uv: modulus must be >= 2");
    if (k < 0) throw std::invalid_argument("lucas_uv: index must be >= 0");

    BigInt pm, qm;
    mpz_mod(pm.get_mpz_t(), BigInt(P).get_mpz_t(), n.get_mpz_t());
    mpz_mod(qm.get_mpz_t(), BigInt(Q).get_mpz_t(), n.get_mpz_t());

    if (k == 0) {
        BigInt two;
        mpz_mod(two.get_mpz_t(), BigInt(2).get_mpz_t(), n.get_mpz_t());
        return {BigInt(0), two};
    }

    // carry (U_j, U_{j+1}) down the bits of k:
    //   U_{2j}   = U_j * (2 U_{j+1} - P U_j)
    //   U_{2j+1} = U_{j+1}^2 - Q U_j^2
    //   U_{j+1}  = P U_j - Q U_{j-1}  (to step by one)
    // This needs no division, so even moduli work.
    BigInt a = 0, b = 1;  // U_0, U_1
    BigInt t1, t2;
    std::size_t bits = mpz_sizeinbase(k.get_mpz_t(), 2);
    for (std::size_t i = bits; i-- > 0;) {
        t1 = (2 * b - pm * a) % n;
        t1 = a * t1;             // U_{2j}
        t2 = b * b - qm * a * a; // U_{2j+1}
        mpz_mod(a.get_mpz_t(), t1.get_mpz_t(), n.get_mpz_t());
        mpz_mod(b.get_mpz_t(), t2.get_mpz_t(), n.get_mpz_t());
        if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
            t1 = pm * b - qm * a;  // U_{2j+2}
            a = b;
            mpz_mod(b.get_mpz_t(), t1.get_mpz_t(), n.get_mpz_t());
        }
    }

    // V_k = 2 U_{k+1} - P U_k
    BigInt v = 2 * b - pm * a;
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
    return {a, v};
}

SelfridgeResult selfridge_d(const BigInt& n) {
    if (n < 3 || mpz_even_p(n.get_mpz_t()))
        throw std::invalid_argument("selfridge_d: n must be odd and >= 3");
    if (mpz_perfect_square_p(n.get_mpz_t())) return PerfectSquare{};

    for (std::int64_t mag = 5;; mag += 2) {
        std::int64_t D = (mag % 4 == 1) ? mag : -mag;  // 5, -7, 9, -11, 13, ...
        int j = jacobi(BigInt(D), n);
        if (j == -1) {
            BigInt np1 = n + 1;
            unsigned long s = mpz_scan1(np1.get_mpz_t(), 0);
            BigInt d = np1 >> s;
            return LucasParams{D, 1, (1 - D) / 4, d, s};
        }
        if (j == 0) {
            BigInt g;
            BigInt absd = BigInt(D < 0 ? -D : D);
            mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), absd.get_mpz_t());
            if (g > 1 && g < n) return CompositeByGcd{g};
            // g == n: D is a multiple of n, keep searching
        }
        if (mag > 1000000)
            throw std::runtime_error("selfridge_d: no discriminant with (D/n) = -1 below 10^6");
    }
}

}  // namespace cforge
