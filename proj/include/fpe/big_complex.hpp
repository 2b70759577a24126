/**
 * @file big_complex.hpp
 * @brief Complex numbers over BigFloat, scale calculus on complex values.
 */
#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "fpe/big_float.hpp"

namespace fpe {

class BigComplex {
public:
    BigComplex() : BigComplex(Precision(53)) {}
    explicit BigComplex(Precision p) : re_(p), im_(p) {}
    BigComplex(double re, double im, Precision p) : re_(re, p), im_(im, p) {}
    BigComplex(const BigFloat& re, const BigFloat& im, Precision p) : re_(p), im_(p) {
        re_.assign(re);
        im_.assign(im);
    }
    BigComplex(const std::string& re, const std::string& im, Precision p) : re_(re, p), im_(im, p) {}

    BigFloat& re() { return re_; }
    BigFloat& im() { return im_; }
    const BigFloat& re() const { return re_; }
    const BigFloat& im() const { return im_; }

    Precision precision() const { return re_.precision(); }
    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }

    void assign(const BigComplex& z) {
        re_.assign(z.re_);
        im_.assign(z.im_);
    }
    void set(double re, double im) {
        re_.set(re);
        im_.set(im);
    }
    /// Re-rounds to a new precision in place.
    void round_to(Precision p) {
        re_.round_to(p);
        im_.round_to(p);
    }
    BigComplex rounded(Precision p) const {
        BigComplex r(p);
        r.assign(*this);
        return r;
    }

    friend bool operator==(const BigComplex& a, const BigComplex& b) { return a.re_ == b.re_ && a.im_ == b.im_; }

private:
    BigFloat re_, im_;
};

// Rounded complex arithmetic into a destination of fixed precision; aliasing allowed.
// Each real component is correctly rounded (ties away) from the exact result.

inline void add(BigComplex& dst, const BigComplex& a, const BigComplex& b) {
    add(dst.re(), a.re(), b.re());
    add(dst.im(), a.im(), b.im());
}
inline void sub(BigComplex& dst, const BigComplex& a, const BigComplex& b) {
    sub(dst.re(), a.re(), b.re());
    sub(dst.im(), a.im(), b.im());
}
inline void mul(BigComplex& dst, const BigComplex& a, const BigComplex& b) {
    mpfr_prec_t w = dst.re().backend_bits() + 1;
    mpfr_ptr tr = detail::scratch(1, w);
    mpfr_ptr ti = detail::scratch(2, w);
    mpfr_fmms(tr, a.re().get(), b.re().get(), a.im().get(), b.im().get(), MPFR_RNDZ);
    mpfr_fmma(ti, a.re().get(), b.im().get(), a.im().get(), b.re().get(), MPFR_RNDZ);
    mpfr_set(dst.re().get(), tr, MPFR_RNDNA);
    mpfr_set(dst.im().get(), ti, MPFR_RNDNA);
}
inline void sqr(BigComplex& dst, const BigComplex& a) { mul(dst, a, a); }
/// dst <- round(round(a*b) + c): one Hörner step.
inline void mul_add(BigComplex& dst, const BigComplex& a, const BigComplex& b, const BigComplex& c) {
    mul(dst, a, b);
    add(dst, dst, c);
}
inline void mul_real(BigComplex& dst, const BigComplex& a, const BigFloat& x) {
    mul(dst.re(), a.re(), x);
    mul(dst.im(), a.im(), x);
}
inline void mul_si(BigComplex& dst, const BigComplex& a, long k) {
    mul_si(dst.re(), a.re(), k);
    mul_si(dst.im(), a.im(), k);
}
inline void mul_2exp(BigComplex& dst, const BigComplex& a, long e) {
    mul_2exp(dst.re(), a.re(), e);
    mul_2exp(dst.im(), a.im(), e);
}
inline void div(BigComplex& dst, const BigComplex& a, const BigComplex& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    // exact-ish quotient at a wider working precision, then one final rounding per component
    Precision w(dst.precision().bits + 16);
    BigFloat den(w), nr(w), ni(w);
    detail::round_away(den.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) {
        mpfr_fmma(t, b.re().get(), b.re().get(), b.im().get(), b.im().get(), r);
    });
    detail::round_away(nr.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) {
        mpfr_fmma(t, a.re().get(), b.re().get(), a.im().get(), b.im().get(), r);
    });
    detail::round_away(ni.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) {
        mpfr_fmms(t, a.im().get(), b.re().get(), a.re().get(), b.im().get(), r);
    });
    div(dst.re(), nr, den);
    div(dst.im(), ni, den);
}
inline void neg(BigComplex& dst, const BigComplex& a) {
    mpfr_neg(dst.re().get(), a.re().get(), MPFR_RNDN);
    mpfr_neg(dst.im().get(), a.im().get(), MPFR_RNDN);
}
inline void conj(BigComplex& dst, const BigComplex& a) {
    dst.re().assign(a.re());
    mpfr_neg(dst.im().get(), a.im().get(), MPFR_RNDN);
}

inline Precision wider(const BigComplex& a, const BigComplex& b) {
    return Precision(std::max(a.precision().bits, b.precision().bits));
}
inline BigComplex operator+(const BigComplex& a, const BigComplex& b) {
    BigComplex r(wider(a, b));
    add(r, a, b);
    return r;
}
inline BigComplex operator-(const BigComplex& a, const BigComplex& b) {
    BigComplex r(wider(a, b));
    sub(r, a, b);
    return r;
}
inline BigComplex operator*(const BigComplex& a, const BigComplex& b) {
    BigComplex r(wider(a, b));
    mul(r, a, b);
    return r;
}
inline BigComplex operator/(const BigComplex& a, const BigComplex& b) {
    BigComplex r(wider(a, b));
    div(r, a, b);
    return r;
}

/**
 * Exact scale of a complex number.  With m the larger part scale, s(z) is m or
 * m+1; it is m+1 iff re^2 + im^2 >= 2^(2m).  The parts are first shifted by
 * 2^-m so the comparison is against 1 and cannot overflow the exponent range;
 * the sum of squares is truncated, which cannot carry it across 1.
 */
inline Scale scale(const BigComplex& z) {
    Scale sr = scale(z.re()), si = scale(z.im());
    Scale m = std::max(sr, si);
    if (m.is_neg_inf()) return m;
    if (sr.is_neg_inf() || si.is_neg_inf()) return m;
    long shift = -static_cast<long>(m.value());
    mpfr_ptr a = detail::scratch(1, z.re().backend_bits());
    mpfr_ptr b = detail::scratch(2, z.im().backend_bits());
    mpfr_mul_2si(a, z.re().get(), shift, MPFR_RNDN);
    mpfr_mul_2si(b, z.im().get(), shift, MPFR_RNDN);
    mpfr_ptr n = detail::scratch(3, 24);
    mpfr_fmma(n, a, a, b, b, MPFR_RNDZ);
    return mpfr_cmp_ui(n, 1) >= 0 ? m + 1 : m;
}

/// log2|z| in double precision, without overflow for huge exponents.
inline double log2_abs(const BigComplex& z) {
    bool zr = z.re().is_zero(), zi = z.im().is_zero();
    if (zr && zi) return -HUGE_VAL;
    if (zi) return log2_abs(z.re());
    if (zr) return log2_abs(z.im());
    long er, ei;
    double mr = mpfr_get_d_2exp(&er, z.re().get(), MPFR_RNDN);
    double mi = mpfr_get_d_2exp(&ei, z.im().get(), MPFR_RNDN);
    long e = std::max(er, ei);
    double x = std::ldexp(mr, static_cast<int>(std::max(er - e, -2000L)));
    double y = std::ldexp(mi, static_cast<int>(std::max(ei - e, -2000L)));
    return static_cast<double>(e) + 0.5 * std::log2(x * x + y * y);
}

/// |z| * 2^-shift as a double (shift chosen by the caller to keep it in range).
inline double abs_scaled(const BigComplex& z, long shift) {
    double l = log2_abs(z);
    if (std::isinf(l)) return 0.0;
    return std::exp2(l - static_cast<double>(shift));
}

/// [s(z)+s(w)-1, s(z)+s(w)], the range containing s(z*w).
inline std::pair<Scale, Scale> scale_product_bound(const BigComplex& z, const BigComplex& w) {
    Scale a = scale(z), b = scale(w);
    if (a.is_neg_inf() || b.is_neg_inf()) throw std::invalid_argument("scale product bound needs nonzero operands");
    std::int64_t s = a.value() + b.value();
    return {Scale(s - 1), Scale(s)};
}

namespace detail {
/// a - b, exact when it fits in `cap` bits, otherwise rounded away from zero at `cap` bits.
inline BigFloat difference(const BigFloat& a, const BigFloat& b, mpfr_prec_t cap) {
    mpfr_prec_t need = std::max(a.backend_bits(), b.backend_bits());
    if (!a.is_zero() && !b.is_zero()) {
        long ea = mpfr_get_exp(a.get()), eb = mpfr_get_exp(b.get());
        long lo = std::min(ea - static_cast<long>(a.backend_bits()), eb - static_cast<long>(b.backend_bits()));
        need = static_cast<mpfr_prec_t>(std::max(ea, eb) - lo + 2);
    }
    BigFloat out = BigFloat::with_backend_bits(std::min(need, cap));
    mpfr_sub(out.get(), a.get(), b.get(), MPFR_RNDA);
    return out;
}
}  // namespace detail

/**
 * Phase-shift similarity at p bits: s(z - w) <= max(s(z), s(w)) - p - 2.
 * The difference is formed exactly when its width is reasonable; otherwise
 * the operands are so far apart in exponent that the larger one dominates
 * and rounding it away from zero keeps the test conservative.
 */
inline bool similar_phase_shift(const BigComplex& z, const BigComplex& w, Precision p) {
    Scale m = std::max(scale(z), scale(w));
    if (m.is_neg_inf()) return true;
    mpfr_prec_t cap = std::max(z.re().backend_bits(), w.re().backend_bits()) + 4 + p.bits + 64;
    BigComplex d(Precision(1));
    d.re() = detail::difference(z.re(), w.re(), cap);
    d.im() = detail::difference(z.im(), w.im(), cap);
    return scale(d) <= m - (p.bits + 2);
}

/// Uniform string form "re, im" with shortest round-trip digits.
inline std::string to_string(const BigComplex& z) { return z.re().to_string() + ", " + z.im().to_string(); }

}  // namespace fpe
