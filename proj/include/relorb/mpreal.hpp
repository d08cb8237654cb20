#pragma once

#include <mpfr.h>

#include <string>
#include <utility>

namespace relorb {

// Minimal RAII wrapper over mpfr_t with explicit per-value precision.
// Only what the embedding and the AFE checks need; not a general number type.
class MpReal {
public:
    explicit MpReal(mpfr_prec_t prec = 128) {
        mpfr_init2(v_, prec);
        mpfr_set_zero(v_, 1);
    }
    MpReal(double x, mpfr_prec_t prec) {
        mpfr_init2(v_, prec);
        mpfr_set_d(v_, x, MPFR_RNDN);
    }
    MpReal(const MpReal& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    MpReal(MpReal&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    MpReal& operator=(MpReal o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~MpReal() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    MpReal& operator+=(const MpReal& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
    MpReal& operator-=(const MpReal& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
    MpReal& operator*=(const MpReal& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }

    friend MpReal operator+(MpReal a, const MpReal& b) { a += b; return a; }
    friend MpReal operator-(MpReal a, const MpReal& b) { a -= b; return a; }
    friend MpReal operator*(MpReal a, const MpReal& b) { a *= b; return a; }

    friend bool operator<(const MpReal& a, const MpReal& b) {
        return mpfr_cmp(a.v_, b.v_) < 0;
    }

    MpReal abs() const {
        MpReal r(prec());
        mpfr_abs(r.v_, v_, MPFR_RNDN);
        return r;
    }

    static MpReal two_pow(long e, mpfr_prec_t prec = 128) {
        MpReal r(prec);
        mpfr_set_ui_2exp(r.v_, 1, e, MPFR_RNDN);
        return r;
    }

private:
    mpfr_t v_;
};

}  // namespace relorb
