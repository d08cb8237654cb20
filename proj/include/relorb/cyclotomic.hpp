#pragma once

#include "relorb/mpreal.hpp"
#include "relorb/rational.hpp"

#include <complex>
#include <numeric>
#include <vector>

namespace relorb {

struct Embedded {
    MpReal re, im;

    Embedded(mpfr_prec_t prec = 128) : re(prec), im(prec) {}

    MpReal abs() const {
        MpReal r(re.prec());
        mpfr_hypot(r.get(), re.get(), im.get(), MPFR_RNDN);
        return r;
    }
    std::complex<double> to_double() const { return {re.to_double(), im.to_double()}; }
};

inline MpReal embedded_distance(const Embedded& a, const Embedded& b) {
    Embedded d(a.re.prec());
    d.re = a.re - b.re;
    d.im = a.im - b.im;
    return d.abs();
}

inline Rational rational_gcd(const Rational& x, const Rational& y) {
    if (x == 0) return abs(y);
    if (y == 0) return abs(x);
    Integer n = gcd(numerator(x) * denominator(y), numerator(y) * denominator(x));
    return Rational(n, denominator(x) * denominator(y));
}

// Exact element of the group ring of L-th roots of unity: scalar * sum_j coeffs[j] zeta_L^j.
// No cyclotomic-polynomial reduction is performed; equality goes through a high-precision
// complex embedding whose error budget is rigorous because the coefficients are integers
// of known magnitude.
class CyclotomicSum {
public:
    CyclotomicSum() : order_(1), coeffs_(1), scalar_(1) {}
    explicit CyclotomicSum(long order) : order_(order), coeffs_(order), scalar_(1) {
        if (order < 1) throw std::invalid_argument("CyclotomicSum: order must be >= 1");
    }

    static CyclotomicSum from_rational(const Rational& r) {
        CyclotomicSum s(1);
        s.coeffs_[0] = 1;
        s.scalar_ = r;
        return s;
    }

    static CyclotomicSum root(long order, long j, const Integer& c = Integer(1)) {
        CyclotomicSum s(order);
        s.add_root(j, c);
        return s;
    }

    long order() const { return order_; }
    const std::vector<Integer>& coeffs() const { return coeffs_; }
    const Rational& scalar() const { return scalar_; }

    // Adds c * zeta^j inside the bracket (the added value is scalar * c * zeta^j).
    void add_root(long j, const Integer& c = Integer(1)) {
        j %= order_;
        if (j < 0) j += order_;
        coeffs_[static_cast<size_t>(j)] += c;
    }

    bool structurally_zero() const {
        if (scalar_ == 0) return true;
        for (const auto& c : coeffs_)
            if (c != 0) return false;
        return true;
    }

    // Nonzero coefficients only at zeta^0 and (for even order) zeta^{L/2} = -1:
    // the value is plainly rational.
    bool is_plain_rational() const {
        for (size_t j = 1; j < coeffs_.size(); ++j) {
            if (coeffs_[j] == 0) continue;
            if (order_ % 2 != 0 || j != static_cast<size_t>(order_ / 2)) return false;
        }
        return true;
    }

    Rational as_plain_rational() const {
        if (!is_plain_rational())
            throw std::domain_error("CyclotomicSum: not a plain rational");
        Integer c = coeffs_[0];
        if (order_ % 2 == 0) c -= coeffs_[static_cast<size_t>(order_ / 2)];
        return scalar_ * c;
    }

    CyclotomicSum rescaled_to(long new_order) const {
        if (new_order % order_ != 0)
            throw std::invalid_argument("CyclotomicSum: incompatible order");
        CyclotomicSum out(new_order);
        out.scalar_ = scalar_;
        long stride = new_order / order_;
        for (long j = 0; j < order_; ++j)
            out.coeffs_[static_cast<size_t>(j * stride)] = coeffs_[static_cast<size_t>(j)];
        return out;
    }

    CyclotomicSum& operator*=(const Rational& r) {
        scalar_ *= r;
        return *this;
    }

    friend CyclotomicSum operator*(CyclotomicSum a, const Rational& r) {
        a *= r;
        return a;
    }

    CyclotomicSum& operator+=(const CyclotomicSum& other) {
        if (this == &other) {
            for (auto& c : coeffs_) c *= 2;
            return *this;
        }
        long L = std::lcm(order_, other.order_);
        CyclotomicSum a = (order_ == L) ? std::move(*this) : rescaled_to(L);
        CyclotomicSum b = (other.order_ == L) ? other : other.rescaled_to(L);
        if (b.structurally_zero()) { *this = std::move(a); return *this; }
        if (a.structurally_zero()) { *this = std::move(b); return *this; }
        Rational s = rational_gcd(a.scalar_, b.scalar_);
        Rational qa = a.scalar_ / s, qb = b.scalar_ / s;  // exact integers by construction
        Integer fa = numerator(qa), fb = numerator(qb);
        for (long j = 0; j < L; ++j)
            a.coeffs_[static_cast<size_t>(j)] =
                a.coeffs_[static_cast<size_t>(j)] * fa + b.coeffs_[static_cast<size_t>(j)] * fb;
        a.scalar_ = s;
        *this = std::move(a);
        return *this;
    }

    friend CyclotomicSum operator+(CyclotomicSum a, const CyclotomicSum& b) {
        a += b;
        return a;
    }

    friend CyclotomicSum operator*(const CyclotomicSum& x, const CyclotomicSum& y) {
        long L = std::lcm(x.order_, y.order_);
        CyclotomicSum a = (x.order_ == L) ? x : x.rescaled_to(L);
        CyclotomicSum b = (y.order_ == L) ? y : y.rescaled_to(L);
        CyclotomicSum out(L);
        out.scalar_ = a.scalar_ * b.scalar_;
        for (long i = 0; i < L; ++i) {
            if (a.coeffs_[static_cast<size_t>(i)] == 0) continue;
            for (long j = 0; j < L; ++j) {
                if (b.coeffs_[static_cast<size_t>(j)] == 0) continue;
                out.coeffs_[static_cast<size_t>((i + j) % L)] +=
                    a.coeffs_[static_cast<size_t>(i)] * b.coeffs_[static_cast<size_t>(j)];
            }
        }
        return out;
    }

    CyclotomicSum conjugate() const {
        CyclotomicSum out(order_);
        out.scalar_ = scalar_;
        for (long j = 0; j < order_; ++j)
            out.coeffs_[static_cast<size_t>((order_ - j) % order_)] =
                coeffs_[static_cast<size_t>(j)];
        return out;
    }

    // Precision budget: P exceeds 64 + bit-size of sum(|coeffs|) (scalar included).
    mpfr_prec_t required_precision() const {
        Integer tot = 0;
        for (const auto& c : coeffs_) tot += abs(c);
        tot = tot * abs(numerator(scalar_)) + abs(denominator(scalar_)) + 1;
        size_t bits = mpz_sizeinbase(tot.backend().data(), 2);
        mpfr_prec_t p = static_cast<mpfr_prec_t>(64 + bits + 32);
        return p < 128 ? 128 : p;
    }

    Embedded embed(mpfr_prec_t prec = 0) const {
        if (prec == 0) prec = required_precision();
        Embedded out(prec);
        MpReal two_pi(prec), angle(prec), c(prec), s(prec), cf(prec);
        mpfr_const_pi(two_pi.get(), MPFR_RNDN);
        mpfr_mul_ui(two_pi.get(), two_pi.get(), 2, MPFR_RNDN);
        for (long j = 0; j < order_; ++j) {
            const Integer& cj = coeffs_[static_cast<size_t>(j)];
            if (cj == 0) continue;
            mpfr_mul_ui(angle.get(), two_pi.get(), static_cast<unsigned long>(j), MPFR_RNDN);
            mpfr_div_ui(angle.get(), angle.get(), static_cast<unsigned long>(order_), MPFR_RNDN);
            mpfr_sin_cos(s.get(), c.get(), angle.get(), MPFR_RNDN);
            mpfr_set_z(cf.get(), cj.backend().data(), MPFR_RNDN);
            mpfr_fma(out.re.get(), cf.get(), c.get(), out.re.get(), MPFR_RNDN);
            mpfr_fma(out.im.get(), cf.get(), s.get(), out.im.get(), MPFR_RNDN);
        }
        MpReal sc(prec);
        mpfr_set_q(sc.get(), scalar_.backend().data(), MPFR_RNDN);
        out.re *= sc;
        out.im *= sc;
        return out;
    }

    std::complex<double> embed_double() const { return embed().to_double(); }

    // |this - other| < 2^{log2_tol} under the complex embedding.
    bool approx_equal(const CyclotomicSum& other, long log2_tol = -40) const {
        mpfr_prec_t prec = std::max(required_precision(), other.required_precision());
        MpReal d = embedded_distance(embed(prec), other.embed(prec));
        return d < MpReal::two_pow(log2_tol, prec);
    }

    bool approx_zero(long log2_tol = -40) const {
        Embedded a = embed();
        return a.abs() < MpReal::two_pow(log2_tol, a.re.prec());
    }

private:
    long order_;
    std::vector<Integer> coeffs_;
    Rational scalar_;
};

}  // namespace relorb
