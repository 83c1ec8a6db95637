#pragma once

#include <optional>

#include "cforge/ntheory.hpp"

namespace cforge::detail {

struct ChainResult {
    bool pass = false;
    BigInt u_d;                                 // U_d mod n
    std::optional<unsigned long> v_zero_round;  // first r < s with V_{d*2^r} == 0
};

// Core of the strong Lucas test, shared by the primality oracle and the
// collapse probe. Assumes params came from selfridge_d and that gcd
// screening against 2QD already happened.
inline ChainResult strong_lucas_eval(const BigInt& n, const LucasParams& params) {
    ChainResult out;
    UvPair uv = lucas_uv(params.P, params.Q, params.d, n);
    out.u_d = uv.u;
    if (uv.u == 0) out.pass = true;

    // walk V_{d * 2^r} via V_{2m} = V_m^2 - 2 Q^m, tracking Q^m alongside
    BigInt qmod;
    mpz_mod(qmod.get_mpz_t(), BigInt(params.Q).get_mpz_t(), n.get_mpz_t());
    BigInt qm = mod_pow(qmod, params.d, n);
    BigInt vc = uv.v;
    for (unsigned long r = 0; r < params.s; ++r) {
        if (vc == 0) {
            out.v_zero_round = r;
            out.pass = true;
            break;
        }
        vc = vc * vc - 2 * qm;
        mpz_mod(vc.get_mpz_t(), vc.get_mpz_t(), n.get_mpz_t());
        qm = (qm * qm) % n;
    }
    return out;
}

}  // namespace cforge::detail
