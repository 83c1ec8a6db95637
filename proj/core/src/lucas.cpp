#include "cforge/lucas.hpp"

#include <gmp.h>

#include <stdexcept>

#include "lucas_chain.hpp"

namespace cforge {

int bitlen(const BigInt& x) {
    if (x < 0) throw std::invalid_argument("bitlen: negative input");
    if (x == 0) return 0;
    return static_cast<int>(mpz_sizeinbase(x.get_mpz_t(), 2));
}

StrongLucasOutcome strong_lucas(const BigInt& n, const LucasParams& params) {
    if (n < 3 || mpz_even_p(n.get_mpz_t()))
        throw std::invalid_argument("strong_lucas: n must be odd and >= 3");

    StrongLucasOutcome out;
    BigInt qd = BigInt(2) * params.Q * params.D;
    BigInt g;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), qd.get_mpz_t());
    if (g != 1 && g != n) {
        out.gcd_shortcut = g;
        return out;
    }

    detail::ChainResult chain = detail::strong_lucas_eval(n, params);
    out.pass = chain.pass;
    out.u_d = chain.u_d;
    out.v_zero_round = chain.v_zero_round;
    return out;
}

CollapseMeasurement measure_collapse(const CompositeRecord& record) {
    const BigInt& n = record.n;
    CollapseMeasurement m;
    m.n_bits = bitlen(n);

    if (is_prime_oracle(n))
        throw std::logic_error("measure_collapse: n = " + n.get_str() +
                               " is prime; the forge emitted a non-composite");

    SelfridgeResult sr = selfridge_d(n);
    if (std::holds_alternative<PerfectSquare>(sr))
        throw std::logic_error("measure_collapse: n = " + n.get_str() +
                               " is a perfect square, impossible for a triple of distinct primes");
    if (auto* byGcd = std::get_if<CompositeByGcd>(&sr)) {
        m.gcd_shortcut = byGcd->factor;
        return m;
    }

    const auto& params = std::get<LucasParams>(sr);
    StrongLucasOutcome out = strong_lucas(n, params);
    if (out.gcd_shortcut) {
        m.gcd_shortcut = out.gcd_shortcut;
        return m;
    }

    m.D = params.D;
    m.d_bits = bitlen(params.d);
    m.s = params.s;
    m.u_residue = out.u_d;
    m.u_residue_bits = bitlen(out.u_d);
    m.strong_lucas_pass = out.pass;
    m.v_zero_round = out.v_zero_round;
    if (out.u_d == 0) {
        // total collapse: the U residue vanished, which also means the test
        // passed; record the full depth rather than leaving delta undefined
        m.delta = m.n_bits;
        m.lucas_pseudoprime = true;
    } else {
        m.delta = m.n_bits - *m.u_residue_bits;
    }
    return m;
}

}  // namespace cforge
