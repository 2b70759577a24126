#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fpe/big_complex.hpp"

using namespace fpe;

namespace {

// Independent oracle: s(z) from the exact squared modulus.  If 2^(e-1) <= |z|^2 < 2^e
// then floor(log2|z|) = floor((e-1)/2).
Scale oracle_scale(const BigComplex& z) {
    if (z.is_zero()) return Scale::neg_inf();
    mpfr_prec_t w = 2 * std::max(z.re().backend_bits(), z.im().backend_bits()) + 8;
    mpfr_t a, b, n;
    mpfr_inits2(w, a, b, n, (mpfr_ptr)0);
    mpfr_sqr(a, z.re().get(), MPFR_RNDN);
    mpfr_sqr(b, z.im().get(), MPFR_RNDN);
    // exact sum needs room for the exponent gap
    long gap = 0;
    if (!mpfr_zero_p(a) && !mpfr_zero_p(b)) gap = std::labs(mpfr_get_exp(a) - mpfr_get_exp(b));
    mpfr_set_prec(n, w + gap + 2);
    int inexact = mpfr_add(n, a, b, MPFR_RNDN);
    EXPECT_EQ(inexact, 0);
    long e = mpfr_get_exp(n);
    mpfr_clears(a, b, n, (mpfr_ptr)0);
    long f = e - 1;
    long fl = f >= 0 ? f / 2 : -((-f + 1) / 2);
    return Scale(fl + 1);
}

BigFloat from_mant(long m, long e, Precision p) {
    BigFloat x(p);
    mpfr_set_si_2exp(x.get(), m, e, MPFR_RNDN);
    return x;
}

}  // namespace

TEST(Scale, WorkedValues) {
    Precision p(53);
    EXPECT_EQ(scale(BigComplex(3, 2, p)), Scale(2));
    EXPECT_EQ(scale(BigComplex(3, 3, p)), Scale(3));
    EXPECT_EQ(scale(BigComplex(0, 0, p)), Scale::neg_inf());
    EXPECT_EQ(scale(BigFloat(3.0, p)), Scale(2));
    EXPECT_EQ(scale(BigFloat(1.0, p)), Scale(1));
    EXPECT_EQ(scale(BigFloat(0.75, p)), Scale(0));
}

TEST(Scale, NegInfIsAbsorbingAndLeast) {
    Scale n = Scale::neg_inf();
    EXPECT_TRUE((n + 1000).is_neg_inf());
    EXPECT_LT(n, Scale(std::numeric_limits<std::int64_t>::min()));
    EXPECT_THROW(n.value(), std::domain_error);
    EXPECT_EQ(scale_of_count(0), n);
    EXPECT_EQ(scale_of_count(1), Scale(1));
    EXPECT_EQ(scale_of_count(10), Scale(4));
    EXPECT_EQ(scale_of_count(1024), Scale(11));
}

TEST(Scale, WindowOverTwoHundredOrdersOfMagnitude) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<long> ex(-330, 330);  // about 200 decimal orders on each side
    for (int it = 0; it < 20000; ++it) {
        Precision p(20 + static_cast<int>(rng() % 100));
        BigComplex z(p);
        mpfr_set_d(z.re().get(), mant(rng), MPFR_RNDN);
        mpfr_set_d(z.im().get(), (it % 7 == 0) ? 0.0 : mant(rng), MPFR_RNDN);
        long e1 = ex(rng), e2 = e1 + static_cast<long>(rng() % 80) - 40;
        mpfr_mul_2si(z.re().get(), z.re().get(), e1, MPFR_RNDN);
        mpfr_mul_2si(z.im().get(), z.im().get(), e2, MPFR_RNDN);
        if (z.is_zero()) continue;
        Scale s = scale(z);
        ASSERT_EQ(s, oracle_scale(z));
        // window 2^(s-1) <= |z| < 2^s, checked via the exact oracle definition and log2
        double l = log2_abs(z);
        EXPECT_LE(static_cast<double>(s.value() - 1), l + 1e-9);
        EXPECT_LT(l, static_cast<double>(s.value()) + 1e-9);
        // part scales
        Scale m = std::max(scale(z.re()), scale(z.im()));
        EXPECT_TRUE(s == m || s == m + 1);
    }
}

TEST(Scale, ExactBoundaryOfModulus) {
    // |3 + 4i| = 5 and |(3 + 4i) * 2^k| lands on exact scales
    Precision p(10);
    for (long k = -50; k <= 50; ++k) {
        BigComplex z(3, 4, p);
        mul_2exp(z, z, k);
        EXPECT_EQ(scale(z), Scale(3 + k));
    }
    // modulus of (3, 4)/8 is 5/8
    BigComplex w(3.0 / 8, 4.0 / 8, p);
    EXPECT_EQ(scale(w), Scale(0));
    // (1, 0) and (0, 1) sit exactly on 2^0
    EXPECT_EQ(scale(BigComplex(0, 1, p)), Scale(1));
    EXPECT_EQ(scale(BigComplex(1, 0, p)), Scale(1));
}

TEST(Scale, HugeExponentsDoNotOverflow) {
    Precision p(30);
    BigComplex z(1.5, -1.5, p);
    mul_2exp(z, z, 900000000L);
    EXPECT_EQ(scale(z), Scale(900000000L + 2));
    EXPECT_NEAR(log2_abs(z), 900000000.0 + std::log2(1.5 * std::sqrt(2.0)), 1e-6);
}

TEST(Scale, PowerOfTwoShift) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10);
    Precision p(40);
    for (int it = 0; it < 2000; ++it) {
        BigComplex z(u(rng), u(rng), p);
        long n = static_cast<long>(rng() % 4001) - 2000;
        BigComplex y(p);
        mul_2exp(y, z, n);
        EXPECT_EQ(scale(y), scale(z) + n);
    }
}

TEST(Scale, ProductWindow) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int it = 0; it < 5000; ++it) {
        Precision p(30 + static_cast<int>(rng() % 60));
        BigComplex z(u(rng), u(rng), p), w(u(rng), u(rng), p);
        mul_2exp(z, z, static_cast<long>(rng() % 200) - 100);
        // exact product at doubled precision
        BigComplex zw(Precision(4 * p.bits + 8));
        mul(zw, z, w);
        std::int64_t diff = scale(zw).value() - scale(z).value() - scale(w).value();
        EXPECT_TRUE(diff == -1 || diff == 0) << diff;
        auto [lo, hi] = scale_product_bound(z, w);
        EXPECT_LE(lo, scale(zw));
        EXPECT_LE(scale(zw), hi);
    }
}

TEST(Scale, ProductBoundExamples) {
    Precision p(53);
    auto r1 = scale_product_bound(BigComplex(1, 0, p), BigComplex(1, 0, p));
    EXPECT_EQ(r1.first, Scale(1));
    EXPECT_EQ(r1.second, Scale(2));
    EXPECT_EQ(scale(BigComplex(1, 0, p)), Scale(1));
    auto r2 = scale_product_bound(BigComplex(3, 0, p), BigComplex(3, 0, p));
    EXPECT_EQ(r2.first, Scale(3));
    EXPECT_EQ(r2.second, Scale(4));
    EXPECT_EQ(scale(BigComplex(9, 0, p)), Scale(4));
    auto r3 = scale_product_bound(BigComplex(1.5, 0, p), BigComplex(1.25, 0, p));
    EXPECT_EQ(r3.first, Scale(1));
    EXPECT_EQ(r3.second, Scale(2));
    EXPECT_EQ(scale(BigComplex(1.875, 0, p)), Scale(1));
    EXPECT_THROW(scale_product_bound(BigComplex(0, 0, p), BigComplex(1, 0, p)), std::invalid_argument);
}

TEST(Scale, PowerWindowWithExactRationalModulus) {
    // z = (a + b i)/2^k with small integers: z^n exact at wide precision
    std::mt19937_64 rng(7);
    for (int it = 0; it < 300; ++it) {
        long a = static_cast<long>(rng() % 200) - 100, b = static_cast<long>(rng() % 200) - 100;
        if (a == 0 && b == 0) continue;
        long k = static_cast<long>(rng() % 12);
        int n = 1 + static_cast<int>(rng() % 40);
        Precision wide(16 * 48 + 64);
        BigComplex z(wide);
        mpfr_set_si_2exp(z.re().get(), a, -k, MPFR_RNDN);
        mpfr_set_si_2exp(z.im().get(), b, -k, MPFR_RNDN);
        BigComplex zn(wide);
        zn.assign(z);
        for (int j = 1; j < n; ++j) mul(zn, zn, z);  // exact: 8 bits per factor at most
        // n log2|z| at high precision
        mpfr_t m2, lg;
        mpfr_inits2(256, m2, lg, (mpfr_ptr)0);
        mpfr_set_si(m2, a * a + b * b, MPFR_RNDN);
        mpfr_log2(lg, m2, MPFR_RNDN);
        double nl = (mpfr_get_d(lg, MPFR_RNDN) / 2.0 - static_cast<double>(k)) * n;
        mpfr_clears(m2, lg, (mpfr_ptr)0);
        double gap = static_cast<double>(scale(zn).value()) - nl;
        EXPECT_GT(gap, -1e-9);
        EXPECT_LE(gap, 1.0 + 1e-9);
    }
}

TEST(Scale, SumOfTwoAndSumOfMany) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    Precision p(60);
    for (int it = 0; it < 3000; ++it) {
        BigComplex z(u(rng), u(rng), p), w(u(rng), u(rng), p);
        mul_2exp(w, w, static_cast<long>(rng() % 20) - 10);
        BigComplex s(Precision(200));
        add(s, z, w);
        EXPECT_LE(scale(s), std::max(scale(z), scale(w)) + 1);
        sub(s, z, w);
        EXPECT_LE(scale(s), std::max(scale(z), scale(w)) + 1);
    }
    for (int N : {2, 3, 10, 100, 1000, 10000}) {
        BigComplex acc(Precision(400));
        Scale mx = Scale::neg_inf();
        std::uniform_int_distribution<int> sh(-30, 0);
        for (int j = 0; j < N; ++j) {
            BigComplex z(u(rng), u(rng), p);
            mul_2exp(z, z, sh(rng));
            mx = std::max(mx, scale(z));
            add(acc, acc, z);
        }
        EXPECT_LE(scale(acc), mx + scale_of_count(static_cast<std::uint64_t>(N)).value());
    }
}

TEST(Scale, LazyAdditionExhaustiveSmallPrecision) {
    // s(xi) > s(eta) + p + 2 implies round(xi + eta) == xi
    for (int p = 1; p <= 7; ++p) {
        Precision P(p);
        const long top = 1L << p;  // xi = m 2^-p, m in [2^p, 2^(p+1)): scale 1
        for (long m = top; m < 2 * top; ++m) {
            for (int sgn : {1, -1}) {
                BigFloat xi = from_mant(sgn * m, -p, P);
                for (long em = -6; em <= -1; ++em) {
                    // eta with scale 1 - p - 3 + em (strictly below the threshold), every mantissa at p+3 bits
                    for (long q = 1L << (p + 2); q < (1L << (p + 3)); ++q) {
                        for (int t : {1, -1}) {
                            BigFloat eta = from_mant(t * q, em - 2 * p - 5, Precision(p + 3));
                            ASSERT_GT(scale(xi).value(), scale(eta).value() + p + 2);
                            BigFloat sum(P);
                            add(sum, xi, eta);
                            ASSERT_TRUE(sum == xi) << "p=" << p << " m=" << m << " q=" << q;
                        }
                    }
                }
            }
        }
    }
}

TEST(Rounding, TiesGoAwayFromZero) {
    Precision p(2);  // 3-bit significands
    BigFloat x(p);
    x.set(std::string("0.5625"));  // 0.1001b: tie between 0.5 and 0.625
    EXPECT_EQ(x.to_double(), 0.625);
    x.set(std::string("-0.5625"));
    EXPECT_EQ(x.to_double(), -0.625);
    x.set(std::string("0.8125"));  // 0.1101b: tie between 0.75 and 0.875
    EXPECT_EQ(x.to_double(), 0.875);
    BigFloat a(1.0, p), b(0.125, Precision(10));
    BigFloat s(p);
    add(s, a, b);  // 1.125 = 1.001b, tie between 1 and 1.25
    EXPECT_EQ(s.to_double(), 1.25);
    // below the tie rounds down
    add(s, a, BigFloat(0.1, Precision(60)));
    EXPECT_EQ(s.to_double(), 1.0);
}

TEST(Rounding, RoundAwayMatchesDirectRule) {
    // brute force: every (p+6)-bit number rounded to p bits against a hand rule
    for (int p = 1; p <= 8; ++p) {
        Precision P(p);
        int extra = 6;
        for (long m = 1L << (p + extra); m < (1L << (p + extra + 1)); ++m) {
            BigFloat x = from_mant(m, -(p + extra), Precision(p + extra));
            BigFloat r = round_to(x, P);
            long unit = 1L << extra;
            long lo = (m / unit) * unit, rem = m - lo;
            long want = rem * 2 >= unit ? lo + unit : lo;
            BigFloat w = from_mant(want, -(p + extra), Precision(p + extra + 1));
            ASSERT_TRUE(r == w) << p << ' ' << m;
        }
    }
}

TEST(Ulp, Values) {
    for (int p : {1, 10, 53, 200}) {
        Precision P(p);
        EXPECT_TRUE(ulp(BigFloat(1.0, P), P) == BigFloat::pow2(-p));
        EXPECT_TRUE(ulp(BigFloat(-1.0, P), P) == BigFloat::pow2(-p));
        for (long n : {-40L, 0L, 3L, 77L}) {
            BigFloat x = BigFloat::pow2(n - 1);
            EXPECT_EQ(scale(x), Scale(n));
            EXPECT_TRUE(ulp(x, P) == BigFloat::pow2(n - p - 1));
        }
    }
    EXPECT_THROW(ulp(BigFloat(0.0, Precision(5)), Precision(5)), std::invalid_argument);
}

TEST(Adjacent, NeighboursAndNonTransitivity) {
    for (int p : {3, 8, 24, 53}) {
        Precision P(p);
        BigFloat xi(1.3, P);
        BigFloat next(P);
        add(next, xi, ulp(xi, P));
        EXPECT_TRUE(adjacent_p(xi, next, P));
        EXPECT_TRUE(adjacent_p(xi, xi, P));
        for (long n : {-5L, 0L, 9L}) {
            Precision W(p + 4);
            BigFloat b = BigFloat::pow2(n);
            BigFloat a(W), c(W);
            sub(a, b, BigFloat::pow2(n - p - 1));  // 2^n (1 - 2^(-p-1))
            add(c, b, BigFloat::pow2(n - p));      // 2^n (1 + 2^(-p))
            EXPECT_TRUE(adjacent_p(a, b, P));
            EXPECT_TRUE(adjacent_p(b, c, P));
            EXPECT_FALSE(adjacent_p(a, c, P));
        }
    }
}

namespace {
Scale scale_of_diff(const BigFloat& x, const BigFloat& y) {
    BigFloat d = BigFloat::with_backend_bits(256);
    mpfr_sub(d.get(), x.get(), y.get(), MPFR_RNDN);  // exact on the grids used
    return scale(d);
}
}  // namespace

TEST(Adjacent, SufficientAndNecessaryConditionsExhaustive) {
    // x, y on the (p+3)-bit grid of [1/2, 4) and sign-flipped copies
    for (int p = 4; p <= 8; ++p) {
        Precision P(p), G(p + 3);
        std::vector<BigFloat> grid;
        for (long e = 0; e <= 2; ++e)
            for (long m = 1L << (p + 3); m < (1L << (p + 4)); ++m) grid.push_back(from_mant(m, e - p - 4, G));
        std::size_t n = grid.size();
        for (std::size_t i = 0; i < n; ++i) {
            // all pairs within 64 grid steps (the only ones that can be adjacent), plus strided far pairs
            for (std::size_t j = (i > 64 ? i - 64 : 0); j < std::min(n, i + 65); ++j) {
                const BigFloat &x = grid[i], &y = grid[j];
                Scale mx = std::max(scale(x), scale(y));
                Scale sd = scale_of_diff(x, y);
                bool adj = adjacent_p(x, y, P);
                if (sd <= mx - (p + 2)) {
                    ASSERT_TRUE(adj) << "sufficient condition fails p=" << p;
                }
                if (adj) {
                    ASSERT_LE(sd, mx - p) << "necessary condition fails p=" << p;
                }
                // reals: similarity implies adjacency
                BigComplex zx(x, BigFloat(0.0, G), G), zy(y, BigFloat(0.0, G), G);
                if (!adj) {
                    ASSERT_FALSE(similar_phase_shift(zx, zy, P));
                }
            }
            for (std::size_t j = i % 97; j < n; j += 97) {
                if (j + 64 >= i && j <= i + 64) continue;
                ASSERT_FALSE(adjacent_p(grid[i], grid[j], P));
            }
        }
    }
}

TEST(Similar, Examples) {
    for (int p : {5, 24, 53, 120}) {
        Precision P(p);
        BigComplex z(1, 1, P);
        EXPECT_TRUE(similar_phase_shift(z, z, P));
        Precision W(p + 8);
        BigComplex f(W);
        f.re().set(1.0);
        mpfr_set_si_2exp(f.im().get(), 1, -p - 1, MPFR_RNDN);
        BigComplex w = z * f;
        EXPECT_FALSE(similar_phase_shift(z, w, P));
        // |z - w| <= 2^(-p-2)|z| must be similar
        BigComplex g(W);
        g.re().set(1.0);
        mpfr_set_si_2exp(g.im().get(), 1, -p - 3, MPFR_RNDN);
        BigComplex v(Precision(2 * p + 20));
        mul(v, z, g);
        EXPECT_TRUE(similar_phase_shift(z, v, P));
    }
}

TEST(Similar, RelativeCriterionRandomized) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int it = 0; it < 4000; ++it) {
        int p = 4 + static_cast<int>(rng() % 60);
        Precision P(p), W(p + 30);
        BigComplex z(u(rng), u(rng), W);
        if (z.is_zero()) continue;
        BigComplex e(u(rng), u(rng), W);
        // |e| <= sqrt 2, scale the perturbation to at most 2^(-p-2)|z|
        mul(e, e, z);
        mul_2exp(e, e, -p - 3);
        BigComplex w = z + e;
        EXPECT_TRUE(similar_phase_shift(z, w, P));
    }
}

TEST(CanceledBits, Values) {
    EXPECT_EQ(canceled_bits(Scale(5), Scale(5)), BitLoss(0));
    EXPECT_EQ(canceled_bits(Scale(30), Scale(22)), BitLoss(8));
    EXPECT_TRUE(canceled_bits(Scale(5), Scale::neg_inf()).is_infinite());
    EXPECT_EQ(canceled_bits(Scale::neg_inf(), Scale::neg_inf()), BitLoss(0));
    EXPECT_THROW(canceled_bits(Scale(5), Scale(6)), std::invalid_argument);
    EXPECT_THROW(canceled_bits(Scale::neg_inf(), Scale(0)), std::invalid_argument);
}

TEST(CanceledBits, SubtractionCertifiesLeadingBits) {
    // for x - y with canceled_bits = q+1, the leading q+1 bits of x and y agree: s(x-y) = max - (q+1)
    std::mt19937_64 rng(10);
    for (int it = 0; it < 2000; ++it) {
        Precision P(40);
        BigFloat x(1.0 + (rng() % 1000000) / 1e6, P);
        long k = 1 + static_cast<long>(rng() % 35);
        BigFloat y(P);
        add(y, x, BigFloat::pow2(-k));
        BigFloat d(P);
        sub(d, y, x);
        BitLoss c = canceled_bits(std::max(scale(x), scale(y)), scale(d));
        EXPECT_EQ(c.bits(), std::max(scale(x), scale(y)).value() - (1 - k));
    }
}

TEST(Text, ShortestRoundTrip) {
    Precision p(52);
    EXPECT_EQ(BigFloat(0.1, p).to_string(), "0.1");
    EXPECT_EQ(BigFloat(1.5, p).to_string(), "1.5");
    EXPECT_EQ(BigFloat(-2.0, p).to_string(), "-2");
    EXPECT_EQ(BigFloat(1e300, p).to_string(), "1e300");
    EXPECT_EQ(BigFloat(0.0, p).to_string(), "0");
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int it = 0; it < 2000; ++it) {
        Precision q(1 + static_cast<int>(rng() % 300));
        BigFloat x(u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20), q);
        BigFloat y(x.to_string(), q);
        ASSERT_TRUE(x == y) << x.to_string();
    }
    EXPECT_THROW(BigFloat("1.5x", p), std::invalid_argument);
    EXPECT_THROW(BigFloat("", p), std::invalid_argument);
    EXPECT_EQ(BigFloat(" 2.5e-3", p).to_double(), 2.5e-3);
}
