#pragma once

#include "relorb/rational.hpp"

#include <array>
#include <optional>

namespace relorb {

// Row-major 2x2 matrix over Q, used for congruence-subgroup membership tests.
struct Matrix2 {
    Rational a, b, c, d;

    Rational det() const { return a * d - b * c; }

    Matrix2 scaled_by_p_power(long p, long k) const {
        Rational s = pow_rat(p, k);
        return Matrix2{a * s, b * s, c * s, d * s};
    }

    bool operator==(const Matrix2&) const = default;
};

// Membership in K_p[m]: integral entries, lower-left entry in p^m Z_p, unit determinant.
inline bool in_K_m(const Matrix2& g, long p, long m) {
    require_prime(p, "in_K_m");
    if (m < 0) throw std::invalid_argument("in_K_m: m must be >= 0");
    if (valuation(g.a, p) < 0) return false;
    if (valuation(g.b, p) < 0) return false;
    if (valuation(g.d, p) < 0) return false;
    if (valuation(g.c, p) < m) return false;
    return valuation(g.det(), p) == 0;
}

// The unique k with p^k g in K_p[m], when it exists. det(p^k g) = p^{2k} det(g)
// must be a unit, which pins k; no scan is needed.
inline std::optional<long> projective_K_m_shift(const Matrix2& g, long p, long m) {
    Rational dt = g.det();
    if (dt == 0) return std::nullopt;
    long vd = valuation(dt, p);
    if (vd % 2 != 0) return std::nullopt;
    long k = -vd / 2;
    if (in_K_m(g.scaled_by_p_power(p, k), p, m)) return k;
    return std::nullopt;
}

// Vol(image of K_p[m] in PGL2), normalized so the maximal compact has mass 1.
inline Rational vol_K_bar(long p, long m) {
    require_prime(p, "vol_K_bar");
    if (m < 0) throw std::invalid_argument("vol_K_bar: m must be >= 0");
    if (m == 0) return Rational(1);
    return Rational(1, pow_int(p, m - 1) * (p + 1));
}

}  // namespace relorb
