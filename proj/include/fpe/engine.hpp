/**
 * @file engine.hpp
 * @brief Preconditioned lazy evaluation of complex polynomials at fixed precision.
 *
 * Preconditioning rounds the coefficients, builds the concave cover of their
 * scales and marks the indices whose coefficient lies within `drop` bits of
 * the cover.  Evaluating at z keeps only the marked indices inside the band
 * where the sheared cover stays within `drop` bits of its maximum; every
 * other monomial is too small to change the rounded result.
 *
 * Each evaluation also carries a rigorous first-order bound on its error
 * (rounding of every operation, rounding of cached powers, dropped terms),
 * from which the number of uncertified leading bits is derived.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fpe/big_complex.hpp"
#include "fpe/concave_cover.hpp"
#include "fpe/polynomial.hpp"

namespace fpe {

/// Raised by a Newton step whose derivative evaluates to zero.
class derivative_zero : public std::domain_error {
public:
    derivative_zero() : std::domain_error("derivative evaluates to zero") {}
};

struct EvalReport {
    BigComplex value;
    int kept_terms = 0;
    /// Leading bits of `value` not certified: cancellation plus accumulated rounding.
    BitLoss canceled;
    /// p - canceled, floored at zero.
    int trusted_bits = 0;
    /// Scale of the largest kept monomial |a_k z^k| (estimated in double precision).
    Scale max_monomial_scale;
    /// |value - P(z)| < 2^error_bound_scale; minus infinity when the result is exact.
    Scale error_bound_scale;
    /// Kept index range [band_low, band_high] in the caller's indexing.
    int band_low = 0;
    int band_high = 0;
    /// Complex multiplications (with or without a following addition) performed.
    std::uint64_t mul_adds = 0;
};

class PreconditionedPoly;
PreconditionedPoly precondition(const Polynomial& poly, Precision p);

class PreconditionedPoly {
public:
    Precision precision() const { return p_; }
    /// Degree of the input polynomial.
    int degree() const { return reduced_degree() + shift_; }
    /// Degree after dividing out z^valuation_shift.
    int reduced_degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    int valuation_shift() const { return shift_; }

    /// Rounded coefficients of z^-shift P, indexed 0..reduced_degree().
    const std::vector<BigComplex>& coefficients() const { return coeffs_; }
    const std::vector<Scale>& scales() const { return scales_; }
    const ConcaveCover& cover() const { return *cover_; }
    /// Sorted good indices (reduced indexing).
    const std::vector<int>& good_indices() const { return good_; }
    bool is_good(int k) const { return std::binary_search(good_.begin(), good_.end(), k); }
    /// Bits below the sheared maximum under which monomials are dropped: p + s(d) + 3.
    std::int64_t drop() const { return drop_; }
    /// Instrumented work of preconditioning (cover comparisons plus good-set tests).
    std::uint64_t operation_count() const { return ops_; }
    /// log2|a_k| for the rounded coefficients (reduced indexing).
    const std::vector<double>& log2_magnitudes() const { return log2_abs_; }
    bool coefficients_were_rounded() const { return rounded_; }

    /// Same polynomial at another precision; the cover is reused when the scales agree.
    PreconditionedPoly with_precision(Precision q) const;

private:
    friend PreconditionedPoly precondition(const Polynomial& poly, Precision p);
    struct Source {
        std::vector<BigComplex> coeffs;  // reduced, at their original precision
    };
    PreconditionedPoly() = default;
    void finish(Precision p, const PreconditionedPoly* prev);

    std::shared_ptr<const Source> src_;
    Precision p_;
    int shift_ = 0;
    std::vector<BigComplex> coeffs_;
    std::vector<Scale> scales_;
    std::vector<double> log2_abs_;
    std::shared_ptr<const ConcaveCover> cover_;
    std::vector<int> good_;
    std::int64_t drop_ = 0;
    std::uint64_t ops_ = 0;
    bool rounded_ = false;
};

/// Production drop for a reduced degree d at precision p.
inline std::int64_t production_drop(Precision p, int d) {
    return p.bits + (d > 0 ? scale_of_count(static_cast<std::uint64_t>(d)).value() : 0) + 3;
}

/// Indices k with scale[k] >= cover(k) - drop.
inline std::vector<int> good_set(const std::vector<Scale>& scales, const ConcaveCover& cover, std::int64_t drop,
                                 std::uint64_t* ops = nullptr) {
    std::vector<int> good;
    const auto& v = cover.vertices();
    std::size_t seg = 0;
    for (int k = 0; k < static_cast<int>(scales.size()); ++k) {
        if (ops) ++*ops;
        if (scales[k].is_neg_inf()) continue;
        while (seg + 2 < v.size() && v[seg + 1].k <= k) ++seg;
        std::int64_t s = scales[k].value() + drop;
        bool ok;
        if (v.size() == 1) {
            ok = s >= v[0].height;
        } else {
            const auto& a = v[seg];
            const auto& b = v[seg + 1];
            ok = (s - a.height) * static_cast<std::int64_t>(b.k - a.k) >=
                 (b.height - a.height) * static_cast<std::int64_t>(k - a.k);
        }
        if (ok) good.push_back(k);
    }
    return good;
}

inline void PreconditionedPoly::finish(Precision p, const PreconditionedPoly* prev) {
    p_ = p;
    const auto& src = src_->coeffs;
    const std::size_t n = src.size();
    coeffs_.clear();
    coeffs_.reserve(n);
    scales_.resize(n);
    log2_abs_.resize(n);
    rounded_ = false;
    for (std::size_t k = 0; k < n; ++k) {
        if (src[k].precision() == p) {
            coeffs_.push_back(src[k]);
        } else {
            coeffs_.push_back(src[k].rounded(p));
            if (!(coeffs_.back().re() == src[k].re() && coeffs_.back().im() == src[k].im())) rounded_ = true;
        }
        scales_[k] = scale(coeffs_[k]);
        log2_abs_[k] = log2_abs(coeffs_[k]);
    }
    if (coeffs_.back().is_zero()) throw std::invalid_argument("leading coefficient rounds to zero");

    ops_ = 0;
    if (!(prev && prev->cover_ && prev->scales_ == scales_)) {
        cover_ = std::make_shared<const ConcaveCover>(build_cover(scales_));
        ops_ += cover_->build_comparisons();
    } else {
        cover_ = prev->cover_;
    }
    drop_ = production_drop(p, reduced_degree());
    good_ = good_set(scales_, *cover_, drop_, &ops_);
}

/**
 * Preconditions `poly` for evaluation at p bits.  Leading zero coefficients
 * are factored out as z^valuation_shift.
 */
inline PreconditionedPoly precondition(const Polynomial& poly, Precision p) {
    if (poly.is_zero()) throw std::invalid_argument("cannot precondition the zero polynomial");
    PreconditionedPoly pp;
    int v = poly.valuation();
    auto src = std::make_shared<PreconditionedPoly::Source>();
    src->coeffs.assign(poly.coefficients().begin() + v, poly.coefficients().end());
    pp.src_ = std::move(src);
    pp.shift_ = v;
    pp.finish(p, nullptr);
    return pp;
}

inline PreconditionedPoly PreconditionedPoly::with_precision(Precision q) const {
    PreconditionedPoly pp;
    pp.src_ = src_;
    pp.shift_ = shift_;
    pp.finish(q, this);
    return pp;
}

namespace detail {

// Error counts below are in units of u = 2^-(p+1), the relative rounding error of one operation.

struct Power {
    int e;
    BigComplex w;
    double eta;  // |w - z^e| <= eta * u * |z^e|
};

inline double combine_eta(double a, double b, double u) {
    // (1 + a u)(1 + b u)(1 + u) - 1, in units of u
    return a + b + 1 + u * (a * b + a + b) + u * u * a * b;
}

/// Powers of z for one evaluation: repeated squares plus products of them on demand.
class PowerCache {
public:
    PowerCache(const BigComplex& z, Precision p, std::uint64_t& mults) : z_(z), p_(p), u_(std::ldexp(1.0, -p.bits - 1)), mults_(mults) {}

    const Power& get(int e) {
        for (const auto& g : made_)
            if (g.e == e) return g;
        if (e == 1) {
            made_.push_back({1, z_, 0.0});
            return made_.back();
        }
        int top = 0;
        while ((1 << (top + 1)) <= e) ++top;
        square(top);
        BigComplex w(p_);
        double eta = 0;
        bool first = true;
        for (int j = top; j >= 0; --j) {
            if (!(e >> j & 1)) continue;
            const Power& s = square(j);
            if (first) {
                w.assign(s.w);
                eta = s.eta;
                first = false;
            } else {
                mul(w, w, s.w);
                ++mults_;
                eta = combine_eta(eta, s.eta, u_);
            }
        }
        made_.push_back({e, std::move(w), eta});
        return made_.back();
    }

private:
    const Power& square(int j) {
        if (squares_.empty()) squares_.push_back({1, z_, 0.0});
        while (static_cast<int>(squares_.size()) <= j) {
            const Power& last = squares_.back();
            BigComplex w(p_);
            sqr(w, last.w);
            ++mults_;
            double eta = combine_eta(last.eta, last.eta, u_);
            squares_.push_back({last.e * 2, std::move(w), eta});
        }
        return squares_[j];
    }

    const BigComplex& z_;
    Precision p_;
    double u_;
    std::uint64_t& mults_;
    std::vector<Power> squares_;
    std::deque<Power> made_;
};

/// The lazy sum before its final power multiplications, with error data.
struct LazyPart {
    BigComplex acc;     // sum over kept k of a_k z^(k - k0)
    int k0 = 0;         // smallest kept index (reduced indexing)
    double lambda = 0;  // log2|z|
    double N = 0;       // sheared maximum
    double nu = 0;      // error of acc * z^k0, in units of u * 2^N
    double log2_max_monomial = -HUGE_VAL;
    int kept = 0;
    int l = 0, r = 0;
};

inline LazyPart lazy_sum(const PreconditionedPoly& pp, const BigComplex& z, PowerCache& cache, std::uint64_t& mults,
                         std::int64_t drop) {
    const Precision p = pp.precision();
    const double u = std::ldexp(1.0, -p.bits - 1);
    const auto& a = pp.coefficients();
    const auto& la = pp.log2_magnitudes();
    const int d = pp.reduced_degree();

    LazyPart out{BigComplex(p)};
    out.lambda = log2_abs(z);
    ShearedMax top = argmax_sheared(pp.cover(), out.lambda);
    out.N = top.N;
    auto [l, r] = band_bounds(pp.cover(), out.lambda, static_cast<double>(drop));
    out.l = l;
    out.r = r;

    const auto& good = pp.good_indices();
    auto first = std::lower_bound(good.begin(), good.end(), l);
    auto last = std::upper_bound(good.begin(), good.end(), r);
    out.kept = static_cast<int>(last - first);
    if (out.kept == 0) throw std::logic_error("empty kept set");

    auto scaled = [&](double log2v, int k) {  // v * |z|^k / 2^N
        return std::exp2(log2v + out.lambda * k - out.N);
    };
    const bool coeff_err = pp.coefficients_were_rounded();

    auto it = last - 1;
    int k = *it;
    out.acc.assign(a[k]);
    out.log2_max_monomial = la[k] + out.lambda * k;
    double rho = scaled(la[k], k);
    double nu = coeff_err ? rho : 0.0;
    while (it != first) {
        --it;
        int kn = *it;
        const Power& w = cache.get(k - kn);
        mul(out.acc, out.acc, w.w);
        add(out.acc, out.acc, a[kn]);
        ++mults;
        double rho_new = scaled(log2_abs(out.acc), kn);
        // earlier error scaled by the inexact power and the product rounding, then new roundings
        nu = nu * (1 + u * w.eta) * (1 + u) + rho * (w.eta + 1 + u * w.eta) + rho_new;
        double mono = la[kn] + out.lambda * kn;
        out.log2_max_monomial = std::max(out.log2_max_monomial, mono);
        if (coeff_err) nu += std::exp2(mono - out.N);
        rho = rho_new;
        k = kn;
    }
    out.k0 = k;
    // dropped monomials: each below 2^(N - drop), doubled for scale turnover slack
    double dropped = static_cast<double>(d + 1 - out.kept);
    if (dropped > 0) nu += dropped * std::exp2(static_cast<double>(p.bits + 2 - drop));
    out.nu = nu;
    return out;
}

/// Multiplies x by z^e in place, returning the relative error count added.
inline double times_power(BigComplex& x, int e, PowerCache& cache, std::uint64_t& mults, double u,
                          double* growth = nullptr) {
    if (growth) *growth = 1.0;
    if (e == 0) return 0.0;
    const Power& w = cache.get(e);
    mul(x, x, w.w);
    ++mults;
    if (growth) *growth = (1 + u * w.eta) * (1 + u);
    return w.eta + 1 + u * w.eta;
}

/// log2(2^a + 2^b)
inline double log2_add(double a, double b) {
    if (std::isinf(a) && a < 0) return b;
    if (std::isinf(b) && b < 0) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log2(1 + std::exp2(lo - hi));
}

struct Certified {
    BitLoss canceled;
    Scale error_scale;
};

/// Lost bits from a relative error bound given as log2(r), and the cancellation estimate.
inline Certified certify(Precision p, double log2_rel, double log2_abs_err, const BigComplex& value,
                         Scale max_monomial) {
    Certified c;
    if (std::isinf(log2_abs_err) && log2_abs_err < 0) {
        c.error_scale = Scale::neg_inf();
    } else {
        c.error_scale = Scale(static_cast<std::int64_t>(std::floor(log2_abs_err)) + 1);
    }
    if (value.is_zero()) {
        c.canceled = BitLoss::infinite();
        return c;
    }
    std::int64_t lost = 0;
    if (!(std::isinf(log2_rel) && log2_rel < 0)) {
        if (log2_rel >= 0) {
            c.canceled = BitLoss::infinite();
            return c;
        }
        double r = std::exp2(log2_rel);
        double need = log2_rel - std::log2(1 - r) + p.bits + 2;  // E <= 2^(c-p-2) (|v| - E)
        lost = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(need - 1e-12)));
    }
    Scale sv = scale(value);
    if (max_monomial.is_finite() && max_monomial > sv) lost = std::max(lost, max_monomial.value() - sv.value());
    c.canceled = BitLoss(lost);
    return c;
}

struct FullEval {
    EvalReport report;
    LazyPart part;
};

inline FullEval evaluate_full(const PreconditionedPoly& pp, const BigComplex& z, std::int64_t drop) {
    const Precision p = pp.precision();
    FullEval out;
    EvalReport& rep = out.report;
    rep.value = BigComplex(p);

    if (z.is_zero()) {
        if (pp.valuation_shift() == 0) rep.value.assign(pp.coefficients()[0]);
        rep.kept_terms = 1;
        rep.max_monomial_scale = pp.valuation_shift() == 0 ? pp.scales()[0] : Scale::neg_inf();
        rep.error_bound_scale = Scale::neg_inf();
        rep.canceled = rep.value.is_zero() ? BitLoss::infinite() : BitLoss(0);
        rep.trusted_bits = rep.value.is_zero() ? 0 : p.bits;
        out.part.acc = rep.value;
        return out;
    }

    const double u = std::ldexp(1.0, -p.bits - 1);
    std::uint64_t mults = 0;
    PowerCache cache(z, p, mults);
    out.part = lazy_sum(pp, z, cache, mults, drop);
    LazyPart& part = out.part;

    rep.value.assign(part.acc);
    double rho0 = std::exp2(log2_abs(part.acc) + part.lambda * part.k0 - part.N);
    double growth = 1.0;
    double fresh = rho0 * times_power(rep.value, part.k0, cache, mults, u, &growth);
    double nu = part.nu * growth + fresh;
    nu *= 1 + 0x1p-20;  // slack for the double-precision bookkeeping

    double log2_v = log2_abs(rep.value) - part.N;  // |value| / 2^N before the shift
    double log2_rel = (nu > 0 ? std::log2(nu) : -HUGE_VAL) - (p.bits + 1) - log2_v;
    const int shift = pp.valuation_shift();
    if (shift > 0) {
        double e = times_power(rep.value, shift, cache, mults, u);
        double r = std::exp2(log2_rel);
        log2_rel = log2_add(log2_rel, std::log2(e) - (p.bits + 1) + std::log2(1 + r));
    }
    double log2_abs_err = log2_rel + log2_abs(rep.value);
    if (rep.value.is_zero())
        log2_abs_err = nu > 0 ? std::log2(nu) - (p.bits + 1) + part.N + part.lambda * shift : -HUGE_VAL;

    rep.kept_terms = part.kept;
    rep.max_monomial_scale =
        Scale(static_cast<std::int64_t>(std::floor(part.log2_max_monomial + part.lambda * shift)) + 1);
    Certified c = certify(p, log2_rel, log2_abs_err, rep.value, rep.max_monomial_scale);
    rep.canceled = c.canceled;
    rep.error_bound_scale = c.error_scale;
    rep.trusted_bits = rep.canceled.is_infinite() ? 0 : static_cast<int>(std::max<std::int64_t>(0, p.bits - rep.canceled.bits()));
    rep.band_low = part.l + shift;
    rep.band_high = part.r + shift;
    rep.mul_adds = mults;
    return out;
}

}  // namespace detail

/// Lazy evaluation of the preconditioned polynomial at z.
inline EvalReport evaluate(const PreconditionedPoly& pp, const BigComplex& z) {
    return detail::evaluate_full(pp, z, pp.drop()).report;
}

/// Same contract as evaluate, applied to a preconditioned derivative.
inline EvalReport evaluate_derivative(const PreconditionedPoly& pp_deriv, const BigComplex& z) {
    return evaluate(pp_deriv, z);
}

/// Plain Hörner recurrence at p bits: exactly d multiply-adds.
inline BigComplex horner_reference(const Polynomial& poly, const BigComplex& z, Precision p,
                                   std::uint64_t* mul_adds = nullptr) {
    BigComplex acc(p);
    if (poly.is_zero()) return acc;
    const auto& a = poly.coefficients();
    acc.assign(a.back());
    for (int k = poly.degree() - 1; k >= 0; --k) {
        mul(acc, acc, z);
        add(acc, acc, a[k]);
    }
    if (mul_adds) *mul_adds += static_cast<std::uint64_t>(poly.degree());
    return acc;
}

struct NewtonStep {
    BigComplex next;
    BigComplex increment;  ///< P(z)/P'(z)
    EvalReport report;     ///< numerator report carrying the worse lost-bit count of the two
};

/**
 * One Newton step z - P(z)/P'(z).  Both lazy sums are computed without their
 * trailing power of z; the common power z^m is cancelled before dividing, so
 * large |z| never overflows the quotient.
 */
inline NewtonStep newton_step(const PreconditionedPoly& pp, const PreconditionedPoly& pp_deriv, const BigComplex& z) {
    if (pp.precision() != pp_deriv.precision())
        throw std::invalid_argument("polynomial and derivative must share one precision");
    const Precision p = pp.precision();
    NewtonStep st{BigComplex(p), BigComplex(p), EvalReport{}};
    if (z.is_zero()) {
        if (pp_deriv.valuation_shift() > 0) throw derivative_zero();
        EvalReport num = evaluate(pp, z), den = evaluate(pp_deriv, z);
        if (den.value.is_zero()) throw derivative_zero();
        div(st.increment, num.value, den.value);
        sub(st.next, z, st.increment);
        st.report = num;
        return st;
    }

    detail::FullEval num = detail::evaluate_full(pp, z, pp.drop());
    detail::FullEval den = detail::evaluate_full(pp_deriv, z, pp_deriv.drop());
    int e1 = num.part.k0 + pp.valuation_shift();
    int e2 = den.part.k0 + pp_deriv.valuation_shift();
    int m = std::min(e1, e2);

    std::uint64_t mults = 0;
    detail::PowerCache cache(z, p, mults);
    const double u = std::ldexp(1.0, -p.bits - 1);
    BigComplex A(num.part.acc), B(den.part.acc);
    detail::times_power(A, e1 - m, cache, mults, u);
    detail::times_power(B, e2 - m, cache, mults, u);
    if (B.is_zero()) throw derivative_zero();
    div(st.increment, A, B);
    sub(st.next, z, st.increment);

    st.report = std::move(num.report);
    if (den.report.canceled > st.report.canceled) {
        st.report.canceled = den.report.canceled;
        st.report.trusted_bits = den.report.trusted_bits;
    }
    st.report.mul_adds += den.report.mul_adds + mults;
    return st;
}

struct NewtonOutcome {
    BigComplex root;
    int iterations = 0;
    bool converged = false;
    std::string failure;  ///< empty on success
};

/**
 * Newton iteration from each start.  A start converges once the increment
 * satisfies |increment| <= 2^(s(z) - tol_bits).  Failures are recorded per start.
 */
inline std::vector<NewtonOutcome> newton_iterate(const PreconditionedPoly& pp, const PreconditionedPoly& pp_deriv,
                                                 const std::vector<BigComplex>& starts, int max_iter, int tol_bits) {
    if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    const Precision p = pp.precision();
    std::vector<NewtonOutcome> out;
    out.reserve(starts.size());
    for (const auto& s : starts) {
        NewtonOutcome o{s.rounded(p), 0, false, {}};
        try {
            for (o.iterations = 1; o.iterations <= max_iter; ++o.iterations) {
                NewtonStep st = newton_step(pp, pp_deriv, o.root);
                Scale sz = scale(o.root);
                o.root = std::move(st.next);
                Scale si = scale(st.increment);
                if (si.is_neg_inf() || (sz.is_finite() && si <= sz - tol_bits)) {
                    o.converged = true;
                    break;
                }
                if (!mpfr_number_p(o.root.re().get()) || !mpfr_number_p(o.root.im().get())) {
                    o.failure = "non-finite iterate";
                    break;
                }
            }
            if (!o.converged && o.failure.empty()) {
                o.iterations = max_iter;
                o.failure = "iteration limit reached";
            }
        } catch (const derivative_zero&) {
            o.failure = "DERIVATIVE_ZERO";
        } catch (const std::exception& e) {
            o.failure = e.what();
        }
        out.push_back(std::move(o));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analysis of the kept sets as functions of lambda = log2|z|.

/// G_drop intersected with the band of width `drop` at lambda (reduced indexing).
inline std::vector<int> kept_indices(const std::vector<Scale>& scales, const ConcaveCover& cover, double lambda,
                                     std::int64_t drop) {
    auto [l, r] = band_bounds(cover, lambda, static_cast<double>(drop));
    std::vector<int> out;
    for (int k : good_set(scales, cover, drop))
        if (k >= l && k <= r) out.push_back(k);
    return out;
}

/// Indices in the band whose own sheared scale s_k + lambda k reaches N - drop.
inline std::vector<int> dominant_indices(const std::vector<Scale>& scales, const ConcaveCover& cover, double lambda,
                                         std::int64_t drop) {
    auto [l, r] = band_bounds(cover, lambda, static_cast<double>(drop));
    double threshold = argmax_sheared(cover, lambda).N - static_cast<double>(drop);
    std::vector<int> out;
    for (int k = l; k <= r; ++k)
        if (scales[k].is_finite() && static_cast<double>(scales[k].value()) + lambda * k >= threshold - 1e-9)
            out.push_back(k);
    return out;
}

/// Kept set on [lambda_low, lambda_high]; a bound shared with a neighbour belongs to
/// whichever side lists the same set.  Single-point regimes have equal bounds.
struct Regime {
    double lambda_low;   ///< -inf allowed
    double lambda_high;  ///< +inf allowed
    std::vector<int> kept;
};

struct AnalysisReport {
    std::vector<CoverVertex> vertices;  ///< in the caller's indexing
    std::vector<int> good;              ///< in the caller's indexing
    std::vector<double> breakpoints;    ///< distinct lambda values where the kept set changes
    std::vector<Regime> regimes;
};

/**
 * For each good index k the set of lambda keeping it is an interval, because
 * max_j(cover(j) + lambda j) - cover(k) - lambda k is convex in lambda.  The
 * regimes are the pieces cut by all interval endpoints.
 */
inline AnalysisReport analyse_with_drop(const std::vector<Scale>& scales, const ConcaveCover& cover,
                                        std::int64_t drop, int shift = 0) {
    AnalysisReport rep;
    for (const auto& c : cover.vertices()) rep.vertices.push_back({c.k + shift, c.height});
    std::vector<int> good = good_set(scales, cover, drop);
    for (int k : good) rep.good.push_back(k + shift);

    const auto& v = cover.vertices();
    // phi_k(lambda) = max_i(h_i + lambda k_i) - E(k) - lambda k
    auto phi = [&](int k, double lambda) {
        return argmax_sheared(cover, lambda).N - cover.at(k) - lambda * k;
    };
    // breakpoints of the max: lambda = -slope_i
    std::vector<double> kinks;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        kinks.push_back(-static_cast<double>(v[i + 1].height - v[i].height) / (v[i + 1].k - v[i].k));
    std::sort(kinks.begin(), kinks.end());

    const double D = static_cast<double>(drop);
    auto solve = [&](int k, bool left) -> double {
        // phi_k is convex piecewise linear with minimum <= 0 at lambda = -(local slope); find phi_k = D
        std::vector<double> pts = kinks;
        double lo_end = pts.empty() ? -1.0 : pts.front() - 1.0;
        double hi_end = pts.empty() ? 1.0 : pts.back() + 1.0;
        // phi_k is linear beyond the outer kinks with slope -k (left) or d-k (right)
        int d = cover.degree();
        if (left) {
            if (k == 0) return -HUGE_VAL;
            double f = phi(k, lo_end);
            if (f > D) {
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    double a = i == 0 ? lo_end : pts[i - 1], b = pts[i];
                    double fa = phi(k, a), fb = phi(k, b);
                    if (fa >= D && fb <= D) return fa == fb ? a : a + (fa - D) / (fa - fb) * (b - a);
                }
                return lo_end;
            }
            return lo_end - (D - f) / k;  // slope of phi is -k there
        }
        if (k == d) return HUGE_VAL;
        double f = phi(k, hi_end);
        if (f > D) {
            for (std::size_t i = pts.size(); i-- > 0;) {
                double a = pts[i], b = i + 1 == pts.size() ? hi_end : pts[i + 1];
                double fa = phi(k, a), fb = phi(k, b);
                if (fa <= D && fb >= D) return fa == fb ? b : a + (D - fa) / (fb - fa) * (b - a);
            }
            return hi_end;
        }
        return hi_end + (D - f) / (d - k);
    };

    std::vector<std::pair<double, double>> spans;
    std::vector<double> cuts;
    for (int k : good) {
        double a = solve(k, true), b = solve(k, false);
        spans.push_back({a, b});
        if (std::isfinite(a)) cuts.push_back(a);
        if (std::isfinite(b)) cuts.push_back(b);
    }
    cuts.push_back(-HUGE_VAL);
    cuts.push_back(HUGE_VAL);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return std::fabs(x - y) < 1e-9; }),
               cuts.end());
    auto kept_at = [&](double x) {
        std::vector<int> out;
        for (std::size_t j = 0; j < good.size(); ++j)
            if (spans[j].first <= x + 1e-9 && x - 1e-9 <= spans[j].second) out.push_back(good[j] + shift);
        return out;
    };
    auto push = [&](double a, double b, std::vector<int> kept) {
        if (!rep.regimes.empty() && rep.regimes.back().kept == kept) {
            rep.regimes.back().lambda_high = b;
        } else {
            rep.regimes.push_back({a, b, std::move(kept)});
        }
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        if (std::isfinite(a)) push(a, a, kept_at(a));  // ties at a cut keep both neighbours' indices
        double mid = std::isinf(a) ? (std::isinf(b) ? 0.0 : b - 1.0) : (std::isinf(b) ? a + 1.0 : 0.5 * (a + b));
        push(a, b, kept_at(mid));
    }
    rep.breakpoints.clear();
    for (std::size_t i = 1; i < rep.regimes.size(); ++i)
        if (rep.breakpoints.empty() || rep.breakpoints.back() != rep.regimes[i].lambda_low)
            rep.breakpoints.push_back(rep.regimes[i].lambda_low);
    return rep;
}

inline AnalysisReport analyse(const PreconditionedPoly& pp) {
    return analyse_with_drop(pp.scales(), pp.cover(), pp.drop(), pp.valuation_shift());
}

}  // namespace fpe
