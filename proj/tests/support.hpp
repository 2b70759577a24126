#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "fpe/engine.hpp"

namespace fpe::testing {

inline Polynomial poly_from(const std::vector<std::complex<double>>& c, Precision p) {
    std::vector<BigComplex> out;
    for (const auto& a : c) out.emplace_back(a.real(), a.imag(), p);
    return Polynomial(std::move(out), p);
}

inline Polynomial poly_from_real(const std::vector<double>& c, Precision p) {
    std::vector<BigComplex> out;
    for (double a : c) out.emplace_back(a, 0.0, p);
    return Polynomial(std::move(out), p);
}

/// Random coefficients with magnitudes 2^(spread * uniform) and random phases.
inline Polynomial random_poly(std::mt19937_64& rng, int d, double spread, Precision p) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::complex<double>> c(d + 1);
    for (auto& a : c) a = std::polar(std::exp2(spread * (unit(rng) - 0.5)), 2 * M_PI * unit(rng));
    return poly_from(c, p);
}

/// Points distributed by area on the Riemann sphere: r^2/(1+r^2) uniform, angle uniform.
inline std::vector<BigComplex> sphere_sample(std::mt19937_64& rng, std::size_t n, Precision p) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<BigComplex> out;
    for (std::size_t i = 0; i < n; ++i) {
        double u = unit(rng);
        double r = std::sqrt(u / (1 - u));
        std::complex<double> z = std::polar(r, 2 * M_PI * unit(rng));
        out.emplace_back(z.real(), z.imag(), p);
    }
    return out;
}

/// log2 |a - b| computed without cancellation trouble.
inline double log2_diff(const BigComplex& a, const BigComplex& b) {
    int bits = std::max(a.precision().bits, b.precision().bits) + 128;
    BigComplex d(Precision{bits});
    sub(d, a, b);
    return log2_abs(d);
}

/// |value - ref| <= 2^(-(p - c) - 2) |ref|; vacuous when nothing is certified.
inline bool within_error_theorem(const EvalReport& rep, const BigComplex& ref, Precision p) {
    if (rep.canceled.is_infinite()) return true;
    double lhs = log2_diff(rep.value, ref);
    if (std::isinf(lhs)) return true;
    return lhs <= -(static_cast<double>(p.bits) - static_cast<double>(rep.canceled.bits())) - 2 + log2_abs(ref);
}

/// Concave majorant at k by brute force over all pairs i <= k <= j.
inline double brute_cover(const std::vector<Scale>& s, int k) {
    double best = -HUGE_VAL;
    int n = static_cast<int>(s.size());
    for (int i = 0; i <= k; ++i) {
        if (s[i].is_neg_inf()) continue;
        for (int j = k; j < n; ++j) {
            if (s[j].is_neg_inf()) continue;
            double v = i == j ? static_cast<double>(s[i].value())
                              : s[i].value() + static_cast<double>(s[j].value() - s[i].value()) * (k - i) / (j - i);
            best = std::max(best, v);
        }
    }
    return best;
}

/// Kept set G ∩ band computed by linear scans over a brute-force cover.
inline std::vector<int> brute_kept(const std::vector<Scale>& s, double lambda, double drop) {
    int n = static_cast<int>(s.size());
    std::vector<double> cov(n);
    for (int k = 0; k < n; ++k) cov[k] = brute_cover(s, k);
    double N = -HUGE_VAL;
    for (int k = 0; k < n; ++k) N = std::max(N, cov[k] + lambda * k);
    std::vector<int> out;
    for (int k = 0; k < n; ++k) {
        bool good = s[k].is_finite() && s[k].value() >= cov[k] - drop - 1e-9;
        bool in_band = cov[k] + lambda * k >= N - drop - 1e-9;
        if (good && in_band) out.push_back(k);
    }
    return out;
}

}  // namespace fpe::testing
