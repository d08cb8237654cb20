#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace relorb {

using Integer  = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

// Sentinel for valuation(0); ordered above every finite valuation.
inline constexpr long VAL_INF = std::numeric_limits<long>::max() / 2;

inline bool is_prime(long p) {
    if (p < 2) return false;
    for (long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

inline void require_prime(long p, const char* who) {
    if (!is_prime(p))
        throw std::invalid_argument(std::string(who) + ": p = " + std::to_string(p) +
                                    " is not prime");
}

inline Integer pow_int(long base, long exp) {
    Integer r;
    mpz_ui_pow_ui(r.backend().data(), static_cast<unsigned long>(base),
                  static_cast<unsigned long>(exp));
    return r;
}

inline Rational pow_rat(long base, long exp) {
    Integer b = pow_int(base, exp < 0 ? -exp : exp);
    if (exp >= 0) return Rational(b);
    return Rational(1, b);
}

inline long valuation(const Integer& x, long p) {
    require_prime(p, "valuation");
    if (x == 0) return VAL_INF;
    Integer quo;
    Integer pz(p);
    mp_bitcnt_t v = mpz_remove(quo.backend().data(), x.backend().data(), pz.backend().data());
    return static_cast<long>(v);
}

// e_p(x), the exponent of p in x; negative when p divides the denominator.
inline long valuation(const Rational& x, long p) {
    require_prime(p, "valuation");
    if (x == 0) return VAL_INF;
    Integer num = numerator(x), den = denominator(x);
    long vn = valuation(num, p);
    if (vn > 0) return vn;
    return -valuation(den, p);
}

// x with its p-part removed: x / p^{e_p(x)}.
inline Rational strip_p(const Rational& x, long p) {
    long v = valuation(x, p);
    if (v == VAL_INF) return x;
    return x * pow_rat(p, -v);
}

struct ResidueUnit {
    long p = 0;
    int exponent = 0;   // N
    Integer value;      // in [0, p^N), coprime to p

    bool operator==(const ResidueUnit&) const = default;
};

// Lifts the unit part of x to Z/p^N: x = p^{e_p(x)} * u * (1 + O(p^N)).
// The denominator is handled through a modular inverse, so x need not be p-integral.
inline ResidueUnit unit_residue(const Rational& x, long p, int N) {
    require_prime(p, "unit_residue");
    if (x == 0) throw std::domain_error("unit_residue: x = 0 has no unit part");
    if (N < 1) throw std::invalid_argument("unit_residue: N must be >= 1");
    Rational u = strip_p(x, p);
    Integer mod = pow_int(p, N);
    Integer num = numerator(u) % mod;
    if (num < 0) num += mod;
    Integer den = denominator(u) % mod;
    Integer inv;
    if (mpz_invert(inv.backend().data(), den.backend().data(), mod.backend().data()) == 0)
        throw std::domain_error("unit_residue: denominator not invertible (internal)");
    Integer val = (num * inv) % mod;
    if (val < 0) val += mod;
    return ResidueUnit{p, N, val};
}

// Residue of a p-integral rational mod p^N (need not be a unit).
inline Integer residue_mod(const Rational& x, long p, int N) {
    if (x == 0) return Integer(0);
    long v = valuation(x, p);
    if (v < 0) throw std::domain_error("residue_mod: x is not p-integral");
    Integer mod = pow_int(p, N);
    if (v >= N) return Integer(0);
    ResidueUnit u = unit_residue(x, p, N - static_cast<int>(v));
    Integer val = (u.value * pow_int(p, v)) % mod;
    return val;
}

inline Integer mod_inverse(const Integer& a, const Integer& mod) {
    Integer inv;
    if (mpz_invert(inv.backend().data(), a.backend().data(), mod.backend().data()) == 0)
        throw std::domain_error("mod_inverse: not invertible");
    return inv;
}

inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer num(s.substr(0, slash));
        Integer den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("parse_rational: cannot parse '" + s + "'");
    }
}

}  // namespace relorb
