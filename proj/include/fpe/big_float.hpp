/**
 * @file big_float.hpp
 * @brief RAII wrapper over MPFR reals with round-to-nearest, ties away from zero.
 *
 * MPFR rounds ties to even.  Every rounded operation here is performed with
 * truncation into a scratch value one bit wider than the destination, which
 * is then rounded with ties away.  The two steps are equivalent to a single
 * correctly rounded ties-away operation: the midpoint between two neighbours
 * lies on the wider grid, so truncation never crosses it.
 */
#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>

#include "fpe/scale.hpp"

namespace fpe {

namespace detail {

class ScratchPad {
public:
    ScratchPad() {
        for (auto& s : slots_) mpfr_init2(s, 64);
    }
    ~ScratchPad() {
        for (auto& s : slots_) mpfr_clear(s);
    }
    ScratchPad(const ScratchPad&) = delete;
    ScratchPad& operator=(const ScratchPad&) = delete;

    mpfr_ptr get(int slot, mpfr_prec_t prec) {
        mpfr_ptr x = slots_[slot];
        if (mpfr_get_prec(x) != prec) mpfr_set_prec(x, prec);
        return x;
    }

private:
    mpfr_t slots_[4];
};

inline mpfr_ptr scratch(int slot, mpfr_prec_t prec) {
    thread_local ScratchPad pad;
    return pad.get(slot, prec);
}

/// dst <- op(exact) rounded to nearest with ties away; `op(tmp, MPFR_RNDZ)` writes the truncated result.
template <class Op>
inline void round_away(mpfr_ptr dst, int slot, Op&& op) {
    mpfr_ptr t = scratch(slot, mpfr_get_prec(dst) + 1);
    op(t, MPFR_RNDZ);
    mpfr_set(dst, t, MPFR_RNDNA);
}

}  // namespace detail

class BigFloat {
public:
    BigFloat() : BigFloat(Precision(53)) {}
    explicit BigFloat(Precision p) {
        mpfr_init2(v_, p.backend_bits());
        mpfr_set_zero(v_, 1);
    }
    BigFloat(double x, Precision p) : BigFloat(p) { set(x); }
    BigFloat(const std::string& text, Precision p) : BigFloat(p) { set(text); }
    /// Raw backend width, used for exact helpers such as powers of two.
    static BigFloat with_backend_bits(mpfr_prec_t bits) {
        BigFloat b(Precision(1));
        mpfr_set_prec(b.v_, std::max<mpfr_prec_t>(bits, MPFR_PREC_MIN));
        mpfr_set_zero(b.v_, 1);
        return b;
    }
    static BigFloat pow2(long e) {
        BigFloat b = with_backend_bits(2);
        mpfr_set_ui_2exp(b.v_, 1, e, MPFR_RNDN);
        return b;
    }

    BigFloat(const BigFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    BigFloat(BigFloat&& o) noexcept {
        *v_ = *o.v_;
        o.v_->_mpfr_d = nullptr;
    }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_)) mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept {
        std::swap(*v_, *o.v_);
        return *this;
    }
    ~BigFloat() {
        if (v_->_mpfr_d) mpfr_clear(v_);
    }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

    Precision precision() const { return Precision(static_cast<int>(mpfr_get_prec(v_)) - 1); }
    mpfr_prec_t backend_bits() const { return mpfr_get_prec(v_); }

    /// Changes the stored width, rounding the current value.
    void round_to(Precision p) {
        if (p.backend_bits() == mpfr_get_prec(v_)) return;
        BigFloat t(p);
        t.assign(*this);
        *this = std::move(t);
    }

    /// Rounds `x` into this value's precision.
    void assign(const BigFloat& x) {
        detail::round_away(v_, 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_set(t, x.v_, r); });
    }
    void set(double x) {
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite value");
        detail::round_away(v_, 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_set_d(t, x, r); });
    }
    void set(long x) {
        detail::round_away(v_, 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_set_si(t, x, r); });
    }
    /// Parses decimal text (scientific notation accepted).
    void set(const std::string& text);

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    /// Shortest decimal text that reads back to the same value at this precision.
    std::string to_string() const;

    friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }

private:
    mpfr_t v_;
};

// Rounded arithmetic into a destination of fixed precision.  Aliasing is allowed.
inline void add(BigFloat& dst, const BigFloat& a, const BigFloat& b) {
    detail::round_away(dst.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_add(t, a.get(), b.get(), r); });
}
inline void sub(BigFloat& dst, const BigFloat& a, const BigFloat& b) {
    detail::round_away(dst.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_sub(t, a.get(), b.get(), r); });
}
inline void mul(BigFloat& dst, const BigFloat& a, const BigFloat& b) {
    detail::round_away(dst.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_mul(t, a.get(), b.get(), r); });
}
inline void div(BigFloat& dst, const BigFloat& a, const BigFloat& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    detail::round_away(dst.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_div(t, a.get(), b.get(), r); });
}
inline void mul_si(BigFloat& dst, const BigFloat& a, long k) {
    detail::round_away(dst.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_mul_si(t, a.get(), k, r); });
}
/// dst <- a * 2^e, exact.
inline void mul_2exp(BigFloat& dst, const BigFloat& a, long e) {
    detail::round_away(dst.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_mul_2si(t, a.get(), e, r); });
}

inline BigFloat operator+(const BigFloat& a, const BigFloat& b) {
    BigFloat r(Precision(std::max(a.precision().bits, b.precision().bits)));
    add(r, a, b);
    return r;
}
inline BigFloat operator-(const BigFloat& a, const BigFloat& b) {
    BigFloat r(Precision(std::max(a.precision().bits, b.precision().bits)));
    sub(r, a, b);
    return r;
}
inline BigFloat operator*(const BigFloat& a, const BigFloat& b) {
    BigFloat r(Precision(std::max(a.precision().bits, b.precision().bits)));
    mul(r, a, b);
    return r;
}
inline BigFloat operator-(const BigFloat& a) {
    BigFloat r(a);
    mpfr_neg(r.get(), r.get(), MPFR_RNDN);
    return r;
}

inline void BigFloat::set(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw std::invalid_argument("empty number");
    bool ok = true;
    detail::round_away(v_, 0, [&](mpfr_ptr t, mpfr_rnd_t r) {
        char* end = nullptr;
        mpfr_strtofr(t, s.c_str(), &end, 10, r);
        ok = end && *end == '\0' && end != s.c_str();
    });
    if (!ok || !mpfr_number_p(v_)) throw std::invalid_argument("malformed number: '" + text + "'");
}

inline std::string BigFloat::to_string() const {
    if (mpfr_zero_p(v_)) return mpfr_signbit(v_) ? "-0" : "0";
    if (!mpfr_number_p(v_)) throw std::domain_error("non-finite value");

    auto digits_at = [&](size_t n, mpfr_exp_t& e10) {
        char* raw = mpfr_get_str(nullptr, &e10, 10, n, v_, MPFR_RNDN);
        std::string out(raw);
        mpfr_free_str(raw);
        return out;
    };
    auto reads_back = [&](const std::string& mant, mpfr_exp_t e10) {
        std::string txt = mant + "e" + std::to_string(static_cast<long>(e10) - static_cast<long>(mant.size() - (mant[0] == '-')));
        BigFloat back(precision());
        back.set(txt);
        return back == *this;
    };

    size_t lo = 1, hi = mpfr_get_str_ndigits(10, mpfr_get_prec(v_));
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        mpfr_exp_t e;
        std::string m = digits_at(mid, e);
        if (reads_back(m, e)) hi = mid; else lo = mid + 1;
    }
    mpfr_exp_t e10;
    std::string m = digits_at(lo, e10);
    bool neg = m[0] == '-';
    if (neg) m.erase(0, 1);
    while (m.size() > 1 && m.back() == '0') m.pop_back();

    // value = 0.m * 10^e10
    long exp10 = static_cast<long>(e10) - 1;  // exponent of the leading digit
    std::string out = neg ? "-" : "";
    if (exp10 >= -5 && exp10 < 17) {
        if (exp10 < 0) {
            out += "0." + std::string(static_cast<size_t>(-exp10 - 1), '0') + m;
        } else if (static_cast<size_t>(exp10 + 1) >= m.size()) {
            out += m + std::string(static_cast<size_t>(exp10 + 1) - m.size(), '0');
        } else {
            out += m.substr(0, exp10 + 1) + "." + m.substr(exp10 + 1);
        }
    } else {
        out += m.substr(0, 1);
        if (m.size() > 1) out += "." + m.substr(1);
        out += "e" + std::to_string(exp10);
    }
    return out;
}

/// Scale of a real: the stored binary exponent.
inline Scale scale(const BigFloat& x) {
    if (mpfr_zero_p(x.get())) return Scale::neg_inf();
    return Scale(mpfr_get_exp(x.get()));
}

/// log2|x| as a double, safe for exponents far outside double range.
inline double log2_abs(const BigFloat& x) {
    if (x.is_zero()) return -HUGE_VAL;
    long e;
    double m = mpfr_get_d_2exp(&e, x.get(), MPFR_RNDN);
    return static_cast<double>(e) + std::log2(std::fabs(m));
}

/// Unit in the last place of x at p stored bits: 2^(s(x) - p - 1).
inline BigFloat ulp(const BigFloat& x, Precision p) {
    if (x.is_zero()) throw std::invalid_argument("ulp of zero is undefined");
    return BigFloat::pow2(static_cast<long>(scale(x).value() - p.bits - 1));
}

/// Rounds x to p stored bits.
inline BigFloat round_to(const BigFloat& x, Precision p) {
    BigFloat r(p);
    r.assign(x);
    return r;
}

/**
 * True when the p-bit roundings of x and y coincide or are neighbours on the
 * p-bit grid, i.e. their rounding classes share a closure point.
 */
inline bool adjacent_p(const BigFloat& x, const BigFloat& y, Precision p) {
    BigFloat a = round_to(x, p), b = round_to(y, p);
    if (a == b) return true;
    if (a.is_zero() || b.is_zero()) return false;
    BigFloat n(a);
    mpfr_nextabove(n.get());
    if (n == b) return true;
    n = a;
    mpfr_nextbelow(n.get());
    return n == b;
}

}  // namespace fpe
