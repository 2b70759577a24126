/**
 * @file poly_factory.hpp
 * @brief Test and benchmark polynomial families, plus exact polynomial arithmetic.
 */
#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpe/polynomial.hpp"

namespace fpe {

enum class Family {
    chebyshev,
    legendre,
    hermite,
    laguerre,
    hyperbolic,
    normal_real,
    normal_complex,
    half_circle_real,
    half_circle_complex,
    from_roots,
};

struct FamilySpec {
    Family family;
    int degree = 1;
    std::optional<std::uint64_t> seed;  ///< random families only; 1 when absent
};

inline const char* family_name(Family f) {
    switch (f) {
        case Family::chebyshev: return "chebyshev";
        case Family::legendre: return "legendre";
        case Family::hermite: return "hermite";
        case Family::laguerre: return "laguerre";
        case Family::hyperbolic: return "hyperbolic";
        case Family::normal_real: return "normal_real";
        case Family::normal_complex: return "normal_complex";
        case Family::half_circle_real: return "half_circle_real";
        case Family::half_circle_complex: return "half_circle_complex";
        case Family::from_roots: return "from_roots";
    }
    throw std::invalid_argument("unknown family");
}

inline Family family_from_name(const std::string& name) {
    for (Family f : {Family::chebyshev, Family::legendre, Family::hermite, Family::laguerre, Family::hyperbolic,
                     Family::normal_real, Family::normal_complex, Family::half_circle_real,
                     Family::half_circle_complex, Family::from_roots})
        if (name == family_name(f)) return f;
    throw std::invalid_argument("unknown family '" + name + "'");
}

/// Families usable with generate(), in a fixed order.
inline std::vector<Family> generated_families() {
    return {Family::chebyshev,   Family::legendre,       Family::hermite,          Family::laguerre,
            Family::hyperbolic,  Family::normal_real,    Family::normal_complex,   Family::half_circle_real,
            Family::half_circle_complex};
}

namespace exact {

using Coeffs = std::vector<mpq_class>;  ///< a_0..a_d

/// All polynomials q_0..q_n of a three-term recurrence q_{k+1} = (alpha_k x + beta_k) q_k - gamma_k q_{k-1}.
template <class Step>
std::vector<Coeffs> three_term(int n, const Coeffs& q0, const Coeffs& q1, Step step) {
    std::vector<Coeffs> out{q0, q1};
    for (int k = 1; k < n; ++k) {
        auto [alpha, beta, gamma] = step(k);
        const Coeffs& a = out[k];
        const Coeffs& b = out[k - 1];
        Coeffs c(a.size() + 1, mpq_class(0));
        for (std::size_t j = 0; j < a.size(); ++j) {
            c[j + 1] += alpha * a[j];
            c[j] += beta * a[j];
        }
        for (std::size_t j = 0; j < b.size(); ++j) c[j] -= gamma * b[j];
        for (auto& x : c) x.canonicalize();
        out.push_back(std::move(c));
    }
    out.resize(static_cast<std::size_t>(n) + 1);
    return out;
}

struct Step3 {
    mpq_class alpha, beta, gamma;
};

inline std::vector<Coeffs> chebyshev(int n) {
    return three_term(n, {1}, {0, 1}, [](int) { return Step3{2, 0, 1}; });
}
inline std::vector<Coeffs> legendre(int n) {
    return three_term(n, {1}, {0, 1}, [](int k) {
        return Step3{mpq_class(2 * k + 1, k + 1), 0, mpq_class(k, k + 1)};
    });
}
/// Physicists' Hermite: H_{k+1} = 2x H_k - 2k H_{k-1}.
inline std::vector<Coeffs> hermite(int n) {
    return three_term(n, {1}, {0, 2}, [](int k) { return Step3{2, 0, 2 * k}; });
}
/// Standard Laguerre: (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}.
inline std::vector<Coeffs> laguerre(int n) {
    return three_term(n, {1}, {1, -1}, [](int k) {
        return Step3{mpq_class(-1, k + 1), mpq_class(2 * k + 1, k + 1), mpq_class(k, k + 1)};
    });
}

/// p_1 = z, p_{k+1} = p_k^2 + z; returns p_n (degree 2^(n-1)).
inline std::vector<mpz_class> hyperbolic(int n) {
    if (n < 1 || n > 20) throw std::invalid_argument("hyperbolic parameter must be in [1, 20]");
    std::vector<mpz_class> p{0, 1};
    for (int k = 1; k < n; ++k) {
        std::vector<mpz_class> q(2 * p.size() - 1, mpz_class(0));
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] == 0) continue;
            for (std::size_t j = 0; j < p.size(); ++j) q[i + j] += p[i] * p[j];
        }
        q[1] += 1;
        p = std::move(q);
    }
    return p;
}

}  // namespace exact

namespace detail {

inline BigFloat from_rational(const mpq_class& q, Precision p) {
    BigFloat x(p);
    round_away(x.get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) { mpfr_set_q(t, q.get_mpq_t(), r); });
    return x;
}

inline Polynomial real_poly(const exact::Coeffs& c, Precision p) {
    std::vector<BigComplex> out;
    out.reserve(c.size());
    for (const auto& q : c) out.emplace_back(from_rational(q, p), BigFloat(p), p);
    return Polynomial(std::move(out), p);
}

/// Standard normal pairs by Box-Muller from a 64-bit engine.
class BoxMuller {
public:
    explicit BoxMuller(std::uint64_t seed) : rng_(seed) {}
    double next() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = 1.0 - std::ldexp(static_cast<double>(rng_() >> 11), -53);  // (0, 1]
        double u2 = std::ldexp(static_cast<double>(rng_() >> 11), -53);
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2 * M_PI * u2);
        have_ = true;
        return r * std::cos(2 * M_PI * u2);
    }
    double uniform() { return std::ldexp(static_cast<double>(rng_() >> 11), -53); }

private:
    std::mt19937_64 rng_;
    double spare_ = 0;
    bool have_ = false;
};

}  // namespace detail

/// 2^sqrt((n+1)(d+1-n)) rounded to p bits.
inline BigFloat half_circle_coefficient(int n, int d, Precision p) {
    BigFloat x(Precision(p.bits + 64));
    mpfr_set_si(x.get(), static_cast<long>(n + 1) * (d + 1 - n), MPFR_RNDN);
    mpfr_sqrt(x.get(), x.get(), MPFR_RNDN);
    mpfr_exp2(x.get(), x.get(), MPFR_RNDN);
    return round_to(x, p);
}

/// The family member of the given degree, coefficients at p bits.  Hyperbolic degrees must be powers of two.
inline Polynomial generate(const FamilySpec& spec, Precision p) {
    const int d = spec.degree;
    if (d < 1) throw std::invalid_argument("degree must be at least 1");
    const std::uint64_t seed = spec.seed.value_or(1);
    switch (spec.family) {
        case Family::chebyshev: return detail::real_poly(exact::chebyshev(d).back(), p);
        case Family::legendre: return detail::real_poly(exact::legendre(d).back(), p);
        case Family::hermite: return detail::real_poly(exact::hermite(d).back(), p);
        case Family::laguerre: return detail::real_poly(exact::laguerre(d).back(), p);
        case Family::hyperbolic: {
            if ((d & (d - 1)) != 0) throw std::invalid_argument("unsupported degree for hyperbolic: not a power of two");
            int n = 1;
            while ((1 << (n - 1)) < d) ++n;
            exact::Coeffs c;
            for (const auto& z : exact::hyperbolic(n)) c.emplace_back(z);
            return detail::real_poly(c, p);
        }
        case Family::normal_real:
        case Family::normal_complex: {
            detail::BoxMuller g(seed);
            const bool cplx = spec.family == Family::normal_complex;
            std::vector<BigComplex> c;
            c.reserve(d + 1);
            for (int k = 0; k <= d; ++k) {
                double re = g.next();
                double im = cplx ? g.next() : 0.0;
                c.emplace_back(re, im, p);
            }
            return Polynomial(std::move(c), p);
        }
        case Family::half_circle_real:
        case Family::half_circle_complex: {
            detail::BoxMuller g(seed);
            const bool cplx = spec.family == Family::half_circle_complex;
            std::vector<BigComplex> c;
            c.reserve(d + 1);
            for (int n = 0; n <= d; ++n) {
                if (!cplx) {
                    c.emplace_back(half_circle_coefficient(n, d, p), BigFloat(p), p);
                    continue;
                }
                Precision w(p.bits + 64);
                BigFloat mag = half_circle_coefficient(n, d, w);
                BigFloat angle(2 * M_PI * g.uniform(), w), cs(w), sn(w);
                mpfr_sin_cos(sn.get(), cs.get(), angle.get(), MPFR_RNDN);
                c.emplace_back(round_to(mag * cs, p), round_to(mag * sn, p), p);
            }
            return Polynomial(std::move(c), p);
        }
        case Family::from_roots: throw std::invalid_argument("from_roots needs a root list");
    }
    throw std::invalid_argument("unknown family");
}

/// Hyperbolic polynomial after n iterations (degree 2^(n-1)).
inline Polynomial hyperbolic(int n, Precision p) {
    if (n < 1 || n > 20) throw std::invalid_argument("hyperbolic parameter must be in [1, 20]");
    return generate({Family::hyperbolic, 1 << (n - 1), std::nullopt}, p);
}

/// Formal derivative, coefficients j * a_j rounded at the input precision.
inline Polynomial derivative(const Polynomial& poly) {
    if (poly.degree() < 1) throw std::invalid_argument("derivative needs degree at least 1");
    const Precision p = poly.precision();
    std::vector<BigComplex> c;
    c.reserve(poly.degree());
    for (int j = 1; j <= poly.degree(); ++j) {
        BigComplex t(p);
        mul_si(t, poly[j], j);
        c.push_back(std::move(t));
    }
    return Polynomial(std::move(c), p);
}

namespace detail {
inline void require_same_precision(const Polynomial& a, const Polynomial& b) {
    if (a.precision() != b.precision()) throw std::invalid_argument("polynomials must share one precision");
}
inline Polynomial add_or_sub(const Polynomial& a, const Polynomial& b, bool minus) {
    require_same_precision(a, b);
    const Precision p = a.precision();
    const int n = std::max(a.degree(), b.degree()) + 1;
    std::vector<BigComplex> c;
    c.reserve(n);
    BigComplex zero(p);
    for (int k = 0; k < n; ++k) {
        const BigComplex& x = k <= a.degree() ? a[k] : zero;
        const BigComplex& y = k <= b.degree() ? b[k] : zero;
        BigComplex t(p);
        if (minus) sub(t, x, y); else add(t, x, y);  // one rounding of the exact result
        c.push_back(std::move(t));
    }
    return Polynomial(std::move(c), p);
}
}  // namespace detail

/// Coefficient-wise sum; the result may be the zero polynomial (check is_zero()).
inline Polynomial sum(const Polynomial& a, const Polynomial& b) { return detail::add_or_sub(a, b, false); }
inline Polynomial diff(const Polynomial& a, const Polynomial& b) { return detail::add_or_sub(a, b, true); }

/// Schoolbook product; every coefficient is the exactly rounded value of its exact convolution sum.
inline Polynomial product(const Polynomial& a, const Polynomial& b) {
    detail::require_same_precision(a, b);
    const Precision p = a.precision();
    if (a.is_zero() || b.is_zero()) return Polynomial(p);
    const int n = a.degree() + b.degree() + 1;
    const mpfr_prec_t wide = 2 * p.backend_bits();
    std::vector<BigComplex> c;
    c.reserve(n);
    std::vector<BigFloat> re_terms, im_terms;
    std::vector<mpfr_ptr> re_ptr, im_ptr;
    for (int k = 0; k < n; ++k) {
        re_terms.clear();
        im_terms.clear();
        for (int i = std::max(0, k - b.degree()); i <= std::min(k, a.degree()); ++i) {
            const BigComplex& x = a[i];
            const BigComplex& y = b[k - i];
            auto exact = [&](const BigFloat& u, const BigFloat& v, bool negate) {
                BigFloat t = BigFloat::with_backend_bits(wide);
                mpfr_mul(t.get(), u.get(), v.get(), MPFR_RNDN);  // exact: wide holds both mantissas
                if (negate) mpfr_neg(t.get(), t.get(), MPFR_RNDN);
                return t;
            };
            re_terms.push_back(exact(x.re(), y.re(), false));
            re_terms.push_back(exact(x.im(), y.im(), true));
            im_terms.push_back(exact(x.re(), y.im(), false));
            im_terms.push_back(exact(x.im(), y.re(), false));
        }
        re_ptr.clear();
        im_ptr.clear();
        for (auto& t : re_terms) re_ptr.push_back(t.get());
        for (auto& t : im_terms) im_ptr.push_back(t.get());
        BigComplex out(p);
        detail::round_away(out.re().get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) {
            mpfr_sum(t, re_ptr.data(), re_ptr.size(), r);
        });
        detail::round_away(out.im().get(), 0, [&](mpfr_ptr t, mpfr_rnd_t r) {
            mpfr_sum(t, im_ptr.data(), im_ptr.size(), r);
        });
        c.push_back(std::move(out));
    }
    return Polynomial(std::move(c), p);
}

/// Monic prod (z - r_i), expanded at p + 32 bits and rounded to p.
inline Polynomial from_roots(const std::vector<BigComplex>& roots, Precision p) {
    if (roots.empty()) throw std::invalid_argument("root list is empty");
    const Precision w(p.bits + 32);
    std::vector<BigComplex> c{BigComplex(1.0, 0.0, w)};
    for (const auto& r : roots) {
        BigComplex root = r.rounded(w);
        std::vector<BigComplex> next(c.size() + 1, BigComplex(w));
        for (std::size_t j = 0; j < c.size(); ++j) {
            add(next[j + 1], next[j + 1], c[j]);
            BigComplex t(w);
            mul(t, c[j], root);
            sub(next[j], next[j], t);
        }
        c = std::move(next);
    }
    return Polynomial(std::move(c), p);
}

}  // namespace fpe
