/**
 * @file points.hpp
 * @brief Generators and pure transforms for lists of complex numbers.
 */
#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpe/big_complex.hpp"
#include "fpe/poly_factory.hpp"

namespace fpe::points {

using List = std::vector<BigComplex>;

namespace detail {

inline void same_length(const List& a, const List& b, const char* what) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(what) + " needs lists of equal length (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
}

/// Real and imaginary parts of r * e^{i phi} at precision p.
inline BigComplex from_polar(const BigFloat& r, const BigFloat& phi, Precision p) {
    BigComplex out(p);
    mpfr_ptr c = fpe::detail::scratch(1, p.backend_bits() + 32);
    mpfr_ptr s = fpe::detail::scratch(2, p.backend_bits() + 32);
    mpfr_sin_cos(s, c, phi.get(), MPFR_RNDN);
    mpfr_mul(out.re().get(), r.get(), c, MPFR_RNDN);
    mpfr_mul(out.im().get(), r.get(), s, MPFR_RNDN);
    return out;
}

}  // namespace detail

inline List cat(const List& a, const List& b) {
    List out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline List re(const List& a) {
    List out;
    for (const auto& z : a) out.emplace_back(z.re(), BigFloat(z.precision()), z.precision());
    return out;
}

inline List im(const List& a) {
    List out;
    for (const auto& z : a) out.emplace_back(z.im(), BigFloat(z.precision()), z.precision());
    return out;
}

inline List conj(const List& a) {
    List out(a);
    for (auto& z : out) mpfr_neg(z.im().get(), z.im().get(), MPFR_RNDN);
    return out;
}

/// (re a_i, re b_i).
inline List join(const List& a, const List& b) {
    detail::same_length(a, b, "join");
    List out;
    for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back(a[i].re(), b[i].re(), a[i].precision());
    return out;
}

/// a_i * b_i.
inline List tensor(const List& a, const List& b) {
    detail::same_length(a, b, "tensor");
    List out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        BigComplex c(a[i].precision());
        mul(c, a[i], b[i]);
        out.push_back(std::move(c));
    }
    return out;
}

/// All (re a_i, re b_j), a outermost.
inline List grid(const List& a, const List& b) {
    List out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a)
        for (const auto& y : b) out.emplace_back(x.re(), y.re(), x.precision());
    return out;
}

/// e^z.
inline List exp(const List& a) {
    List out;
    for (const auto& z : a) {
        BigFloat r(Precision(z.precision().bits + 32));
        mpfr_exp(r.get(), z.re().get(), MPFR_RNDN);
        out.push_back(detail::from_polar(r, z.im(), z.precision()));
    }
    return out;
}

/// (a, b) -> a e^{ib}.
inline List rot(const List& a) {
    List out;
    for (const auto& z : a) out.push_back(detail::from_polar(z.re(), z.im(), z.precision()));
    return out;
}

/// n reals lo, ..., hi in arithmetic progression.
inline List unif(int n, const BigFloat& lo, const BigFloat& hi, Precision p) {
    if (n < 1) throw std::invalid_argument("count must be positive");
    List out;
    Precision w(p.bits + 32);
    BigFloat step(w), x(w);
    sub(step, hi, lo);
    if (n > 1) mpfr_div_si(step.get(), step.get(), n - 1, MPFR_RNDN);
    for (int i = 0; i < n; ++i) {
        BigFloat k(w);
        mpfr_mul_si(k.get(), step.get(), i, MPFR_RNDN);
        add(x, lo, k);
        if (i == n - 1 && n > 1) x.assign(hi);
        out.emplace_back(x, BigFloat(p), p);
    }
    return out;
}

/// n reals uniform in [lo, hi).
inline List rand(int n, double lo, double hi, std::uint64_t seed, Precision p) {
    if (n < 0) throw std::invalid_argument("count must be nonnegative");
    fpe::detail::BoxMuller g(seed);
    List out;
    for (int i = 0; i < n; ++i) out.emplace_back(lo + (hi - lo) * g.uniform(), 0.0, p);
    return out;
}

/// n reals with the standard normal law.
inline List normal(int n, std::uint64_t seed, Precision p) {
    if (n < 0) throw std::invalid_argument("count must be nonnegative");
    fpe::detail::BoxMuller g(seed);
    List out;
    for (int i = 0; i < n; ++i) out.emplace_back(g.next(), 0.0, p);
    return out;
}

/**
 * n points of the Riemann sphere as (latitude, longitude), latitude in (-pi/2, pi/2).
 * The height sin(latitude) is stratified over n equal bins and the order shuffled,
 * so the sample follows the area measure closely and every prefix stays representative.
 */
inline List sphere(int n, std::uint64_t seed, Precision p) {
    if (n < 0) throw std::invalid_argument("count must be nonnegative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, double>> coords(n);
    for (int i = 0; i < n; ++i) {
        double u = (i + unit(rng)) / n;
        double h = std::clamp(2 * u - 1, -1 + 1e-16, 1 - 1e-16);
        coords[i] = {std::asin(h), M_PI * (2 * unit(rng) - 1)};
    }
    std::shuffle(coords.begin(), coords.end(), rng);
    List out;
    for (auto [lat, lon] : coords) out.emplace_back(lat, lon, p);
    return out;
}

/// (latitude, longitude) to the complex plane by stereographic projection: |z| = tan(pi/4 + latitude/2).
inline List polar(const List& a) {
    List out;
    for (const auto& z : a) {
        Precision w(z.precision().bits + 32);
        BigFloat r(w);
        mpfr_const_pi(r.get(), MPFR_RNDN);
        mpfr_div_2ui(r.get(), r.get(), 1, MPFR_RNDN);
        mpfr_add(r.get(), r.get(), z.re().get(), MPFR_RNDN);
        mpfr_div_2ui(r.get(), r.get(), 1, MPFR_RNDN);
        mpfr_tan(r.get(), r.get(), MPFR_RNDN);
        if (!mpfr_number_p(r.get()) || mpfr_sgn(r.get()) < 0)
            throw std::invalid_argument("latitude must lie in (-pi/2, pi/2)");
        out.push_back(detail::from_polar(r, z.im(), z.precision()));
    }
    return out;
}

struct Comparison {
    std::size_t compared = 0;
    std::size_t mismatches = 0;
    std::size_t first_mismatch = 0;  ///< valid when mismatches > 0
    double worst_log2_rel = -HUGE_VAL;  ///< max over pairs of log2(|a - b| / max(|a|, |b|))
};

/// Pairwise comparison under phase-shift similarity at p bits.
inline Comparison compare(const List& a, const List& b, Precision p) {
    detail::same_length(a, b, "comp");
    Comparison c;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++c.compared;
        if (!similar_phase_shift(a[i], b[i], p)) {
            if (c.mismatches++ == 0) c.first_mismatch = i;
        }
        Precision w(std::max(a[i].precision().bits, b[i].precision().bits) + 128);
        BigComplex d(w);
        sub(d, a[i], b[i]);
        double rel = log2_abs(d) - std::max(log2_abs(a[i]), log2_abs(b[i]));
        if (!std::isnan(rel)) c.worst_log2_rel = std::max(c.worst_log2_rel, rel);
    }
    return c;
}

}  // namespace fpe::points
