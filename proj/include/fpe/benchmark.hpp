/**
 * @file benchmark.hpp
 * @brief Wall-clock comparison of lazy evaluation against Hörner, with accuracy statistics.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "fpe/engine.hpp"

namespace fpe {

/// Leading bits of x agreeing with ref, in [0, p + 1]; p + 1 when x equals ref.
inline double exact_bits(const BigComplex& x, const BigComplex& ref, Precision p) {
    const double cap = p.bits + 1.0;
    BigComplex d(Precision(std::max(x.precision().bits, ref.precision().bits) + 128));
    sub(d, x, ref);
    if (d.is_zero()) return cap;
    if (ref.is_zero()) return 0.0;
    return std::clamp(log2_abs(ref) - log2_abs(d), 0.0, cap);
}

struct BenchmarkReport {
    int degree = 0;
    Precision precision;
    std::size_t points = 0;
    double preprocess_seconds = 0;
    double horner_seconds_per_point = 0;  ///< median over the Hörner runs
    double fpe_seconds_per_point = 0;     ///< median over the lazy-evaluation runs
    double single_eval_gain = 0;          ///< Hörner / (lazy + preprocessing), one point
    double asymptotic_gain = 0;           ///< Hörner / lazy
    double preprocess_per_horner = 0;     ///< preprocessing time in units of one Hörner evaluation
    double mean_kept_terms = 0;
    /// exact_bits(lazy) - exact_bits(Hörner), rounded to integers, against a p + 64 Hörner reference.
    std::map<int, std::size_t> bias_histogram;
    double mean_abs_bias = 0;
};

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class F>
double seconds(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Two Hörner runs and `repetitions` lazy runs over all points; per-point times are medians of runs.
inline BenchmarkReport benchmark(const Polynomial& poly, const std::vector<BigComplex>& points, Precision p,
                                 int repetitions = 10) {
    if (repetitions < 3) throw std::invalid_argument("benchmark needs at least 3 repetitions");
    if (points.empty()) throw std::invalid_argument("benchmark needs at least one point");
    BenchmarkReport rep;
    rep.degree = poly.degree();
    rep.precision = p;
    rep.points = points.size();

    Polynomial at_p = poly.rounded(p);
    std::vector<BigComplex> zs;
    for (const auto& z : points) zs.push_back(z.rounded(p));
    const double n = static_cast<double>(zs.size());

    std::vector<double> prep;
    PreconditionedPoly pp = precondition(at_p, p);
    for (int i = 0; i < 3; ++i) prep.push_back(detail::seconds([&] { pp = precondition(at_p, p); }));
    rep.preprocess_seconds = detail::median(prep);

    std::vector<BigComplex> horner(zs.size(), BigComplex(p));
    std::vector<double> ht;
    for (int run = 0; run < 2; ++run)
        ht.push_back(detail::seconds([&] {
            for (std::size_t i = 0; i < zs.size(); ++i) horner[i] = horner_reference(at_p, zs[i], p);
        }) / n);
    rep.horner_seconds_per_point = detail::median(ht);

    std::vector<EvalReport> lazy(zs.size());
    std::vector<double> ft;
    for (int run = 0; run < repetitions; ++run)
        ft.push_back(detail::seconds([&] {
            for (std::size_t i = 0; i < zs.size(); ++i) lazy[i] = evaluate(pp, zs[i]);
        }) / n);
    rep.fpe_seconds_per_point = detail::median(ft);

    rep.asymptotic_gain = rep.horner_seconds_per_point / rep.fpe_seconds_per_point;
    rep.single_eval_gain = rep.horner_seconds_per_point / (rep.fpe_seconds_per_point + rep.preprocess_seconds);
    rep.preprocess_per_horner = rep.preprocess_seconds / rep.horner_seconds_per_point;

    const Precision ref_p(p.bits + 64);
    double kept = 0, bias = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        kept += lazy[i].kept_terms;
        BigComplex ref = horner_reference(poly, zs[i], ref_p);
        double b = exact_bits(lazy[i].value, ref, p) - exact_bits(horner[i], ref, p);
        bias += std::fabs(b);
        ++rep.bias_histogram[static_cast<int>(std::lround(b))];
    }
    rep.mean_kept_terms = kept / n;
    rep.mean_abs_bias = bias / n;
    return rep;
}

inline void print(std::ostream& os, const BenchmarkReport& r) {
    os << "degree: " << r.degree << "\nprecision: " << r.precision.bits << "\npoints: " << r.points
       << "\npreprocess_seconds: " << r.preprocess_seconds << "\nhorner_seconds_per_point: " << r.horner_seconds_per_point
       << "\nfpe_seconds_per_point: " << r.fpe_seconds_per_point << "\nsingle_eval_gain: " << r.single_eval_gain
       << "\nasymptotic_gain: " << r.asymptotic_gain << "\npreprocess_per_horner: " << r.preprocess_per_horner
       << "\nmean_kept_terms: " << r.mean_kept_terms << "\nmean_abs_bias_bits: " << r.mean_abs_bias
       << "\nbias_histogram:";
    for (auto [bits, count] : r.bias_histogram) os << ' ' << bits << ':' << count;
    os << '\n';
}

}  // namespace fpe
