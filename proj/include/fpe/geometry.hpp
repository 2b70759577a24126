/**
 * @file geometry.hpp
 * @brief Longest sloped segments in the strip under a concave profile, and their weighted averages.
 *
 * For a concave f on [0,1], a strip height delta and an angle theta, L(f, delta, theta)
 * is the length of the longest segment of slope tan(theta) lying between f - delta and f.
 * Its horizontal projection is [x_L, x_R] = {x : f(x) - tau x >= max(f - tau Id) - delta}.
 */
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpe::geometry {

class not_concave : public std::invalid_argument {
public:
    not_concave() : std::invalid_argument("NOT_CONCAVE: profile fails the midpoint concavity check") {}
};

class quadrature_error : public std::runtime_error {
public:
    explicit quadrature_error(const std::string& what) : std::runtime_error("nonconvergent quadrature: " + what) {}
};

/// A concave function on [0,1], checked for midpoint concavity on a 2^12-point grid at construction.
class ConcaveProfile {
public:
    ConcaveProfile(std::function<double(double)> f, std::string tag = "") : f_(std::move(f)), tag_(std::move(tag)) {
        constexpr int n = 1 << 12;
        std::vector<double> v(n + 1);
        double mag = 0;
        for (int i = 0; i <= n; ++i) {
            v[i] = f_(static_cast<double>(i) / n);
            if (!std::isfinite(v[i])) throw not_concave();
            mag = std::max(mag, std::fabs(v[i]));
        }
        const double tol = 1e-12 * (1 + mag);
        for (int i = 1; i < n; ++i)
            if (v[i] < 0.5 * (v[i - 1] + v[i + 1]) - tol) throw not_concave();
    }
    double operator()(double x) const { return f_(x); }
    const std::string& tag() const { return tag_; }

private:
    std::function<double(double)> f_;
    std::string tag_;
};

inline ConcaveProfile constant_profile(double c) {
    return ConcaveProfile([c](double) { return c; }, "constant");
}
/// sqrt(x(1-x)): a half circle of radius 1/2.
inline ConcaveProfile half_circle_profile() {
    return ConcaveProfile([](double x) { return std::sqrt(std::max(0.0, x * (1 - x))); }, "half_circle");
}
/// -a (x - 1/2)^2, so f'' = -2a.
inline ConcaveProfile parabola_profile(double a) {
    if (!(a > 0)) throw std::invalid_argument("parabola curvature must be positive");
    return ConcaveProfile([a](double x) { return -a * (x - 0.5) * (x - 0.5); }, "parabola");
}

/// Piecewise-linear concave profile: sorted decreasing random slopes integrated from a random start.
inline ConcaveProfile random_profile(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pieces(1, 40);
    std::uniform_real_distribution<double> unit(0, 1);
    std::normal_distribution<double> normal;
    int n = pieces(rng);
    double spread = std::exp(4 * unit(rng) - 2);  // slope scale in [e^-2, e^2]
    std::vector<double> knots{0.0, 1.0}, slopes(n);
    for (int i = 1; i < n; ++i) knots.push_back(unit(rng));
    std::sort(knots.begin(), knots.end());
    for (double& s : slopes) s = spread * normal(rng);
    std::sort(slopes.begin(), slopes.end(), std::greater<>());
    std::vector<double> values{normal(rng)};
    for (int i = 0; i < n; ++i) values.push_back(values.back() + slopes[i] * (knots[i + 1] - knots[i]));
    return ConcaveProfile(
        [knots, slopes, values](double x) {
            std::size_t i = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), x) - knots.begin());
            i = std::clamp<std::size_t>(i, 1, slopes.size()) - 1;
            return values[i] + slopes[i] * (x - knots[i]);
        },
        "random_spline");
}

struct Segment {
    double length;  ///< L(f, delta, theta)
    double xL, xR;  ///< horizontal projection
};

namespace detail {

inline void check_delta(double delta) {
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
}

constexpr double kTol = 1e-13;  // ternary search width in x

/// Level-set ends are bisected down to adjacent doubles.

/// [x_L, x_R] for slope tau.
inline std::pair<double, double> interval(const ConcaveProfile& f, double tau, double delta) {
    // g(x) - g(y) with g = f - tau Id, formed as a difference so steep slopes do not swamp delta
    auto rise = [&](double x, double y) { return (f(x) - f(y)) - tau * (x - y); };
    double lo = 0, hi = 1;
    while (hi - lo > kTol) {
        double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (rise(m1, m2) < 0) lo = m1; else hi = m2;
    }
    double xs = 0.5 * (lo + hi);
    if (rise(0.0, xs) >= 0 && rise(0.0, 1.0) >= 0) xs = 0;
    else if (rise(1.0, xs) >= 0) xs = 1;
    auto inside = [&](double x) { return rise(x, xs) >= -delta; };
    double xl = 0, xr = 1;
    if (!inside(0.0)) {
        double a = 0, b = xs;
        for (double c = 0.5 * (a + b); c > a && c < b; c = 0.5 * (a + b))
            if (inside(c)) b = c; else a = c;
        xl = b;
    }
    if (!inside(1.0)) {
        double a = xs, b = 1;
        for (double c = 0.5 * (a + b); c > a && c < b; c = 0.5 * (a + b))
            if (inside(c)) a = c; else b = c;
        xr = a;
    }
    return {xl, xr};
}

}  // namespace detail

/// Longest segment of slope tan(theta) inside the strip of height delta under f.
inline Segment longest_segment(const ConcaveProfile& f, double delta, double theta) {
    detail::check_delta(delta);
    if (!(std::fabs(theta) < M_PI / 2)) throw std::invalid_argument("theta must lie in (-pi/2, pi/2)");
    auto [xl, xr] = detail::interval(f, std::tan(theta), delta);
    return {(xr - xl) / std::cos(theta), xl, xr};
}

/// x_L and x_R as functions of the slope y.
inline double x_left(const ConcaveProfile& f, double delta, double y) { return detail::interval(f, y, delta).first; }
inline double x_right(const ConcaveProfile& f, double delta, double y) { return detail::interval(f, y, delta).second; }

enum class Weight { cos, cos2, sphere, real_line, disk };

inline const char* weight_name(Weight w) {
    switch (w) {
        case Weight::cos: return "cos";
        case Weight::cos2: return "cos2";
        case Weight::sphere: return "sphere";
        case Weight::real_line: return "real_line";
        case Weight::disk: return "disk";
    }
    throw std::invalid_argument("unknown weight");
}

/// Weight density in theta; the disk weight vanishes for theta < 0.
inline double weight(Weight w, double theta) {
    const double c = std::cos(theta), t = std::tan(theta);
    const double ln2 = std::log(2.0);
    switch (w) {
        case Weight::cos: return c / M_PI;
        case Weight::cos2: return c * c / M_PI;
        case Weight::sphere: {
            // 4^t / (1 + 4^t)^2 written to stay finite for large |t|
            double q = std::exp2(-2 * std::fabs(t));
            return 2 * ln2 / c * q / ((1 + q) * (1 + q));
        }
        case Weight::real_line: {
            double q = std::exp2(-std::fabs(t));
            return 2 * ln2 / (M_PI * c) * q / (1 + q * q);
        }
        case Weight::disk: return theta < 0 ? 0.0 : 2 * ln2 / c * std::exp2(-2 * t);
    }
    throw std::invalid_argument("unknown weight");
}

namespace detail {

/// Adaptive Gauss-Kronrod with global error control: the piece with the largest error is halved until the
/// summed error falls under the relative tolerance.
class Quadrature {
public:
    template <class F>
    void add(F&& f, double a, double b) {
        if (b > a) push(f, a, b);
    }
    template <class F>
    double run(F&& f, const char* what, double rel_tol = 1e-7, int max_splits = 200000) {
        for (int i = 0; error() > rel_tol * std::fabs(value()); ++i) {
            if (i == max_splits || heap_.empty())
                throw quadrature_error(std::string(what) + " weight, estimate " + std::to_string(value()) +
                                       " with error " + std::to_string(error()));
            std::pop_heap(heap_.begin(), heap_.end());
            Piece worst = heap_.back();
            heap_.pop_back();
            value_ -= worst.value;
            error_ -= worst.error;
            double m = 0.5 * (worst.a + worst.b);
            push(f, worst.a, m);
            push(f, m, worst.b);
        }
        // the running sums drift; the result is re-summed from the pieces
        double v = 0;
        for (const auto& p : heap_) v += p.value;
        if (!std::isfinite(v)) throw quadrature_error(std::string(what) + " weight, non-finite integrand");
        return v;
    }

private:
    struct Piece {
        double error, value, a, b;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    template <class F>
    void push(F&& f, double a, double b) {
        Piece p{0, 0, a, b};
        p.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0, &p.error);
        value_ += p.value;
        error_ += p.error;
        heap_.push_back(p);
        std::push_heap(heap_.begin(), heap_.end());
    }
    double value() const { return value_; }
    double error() const { return error_; }

    std::vector<Piece> heap_;
    double value_ = 0, error_ = 0;
};

template <class F>
double integrate(F&& f, double a, double b, const char* what) {
    Quadrature q;
    q.add(f, a, b);
    return q.run(f, what);
}

/// Largest theta in [lo, hi] where pred holds, for pred true on a prefix of the interval.
template <class P>
double last_true(P&& pred, double lo, double hi) {
    if (!pred(lo)) return lo;
    if (pred(hi)) return hi;
    for (int i = 0; i < 80; ++i) {
        double m = 0.5 * (lo + hi);
        if (pred(m)) lo = m; else hi = m;
    }
    return lo;
}

/// Offset t from the edge theta = pi/2 below which w(theta) / cos(theta) stays under 1e-12.
inline double tail_cut(Weight w) {
    if (w == Weight::cos || w == Weight::cos2) return 0.0;
    // smallest t = pi/2 - |theta| still above the threshold; weights decrease toward the edge
    auto big = [&](double t) { return weight(w, M_PI / 2 - t) / std::sin(t) >= 1e-12; };
    double lo = 1e-300, hi = 0.27;
    if (big(lo)) return 0.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (big(mid)) hi = mid; else lo = mid;
    }
    return lo;
}

}  // namespace detail

/**
 * Integral of L(f, delta, theta) w(theta) over the support of w.  The angle range is
 * split where x_L leaves 0 and where x_R leaves 1 (kinks of L), and uniformly in
 * between.  Pieces with |theta| > 1.3 are integrated in t = pi/2 - |theta|, truncated
 * where w(theta) / cos(theta) falls below 1e-12.
 */
inline double weighted_average(const ConcaveProfile& f, double delta, Weight w) {
    detail::check_delta(delta);
    auto L = [&](double theta) {
        auto [xl, xr] = detail::interval(f, std::tan(theta), delta);
        return (xr - xl) / std::cos(theta) * weight(w, theta);
    };
    const double mid = 1.3;
    const double edge = M_PI / 2 - detail::tail_cut(w);
    const double low = w == Weight::disk ? 0.0 : -edge;

    std::vector<double> cuts{low, edge};
    for (int i = -8; i <= 8; ++i) cuts.push_back(mid * i / 8);
    const double span = M_PI / 2 * (1 - 1e-15);
    // x_R = 1 on a prefix of angles, x_L > 0 on a prefix of angles
    cuts.push_back(detail::last_true([&](double th) { return detail::interval(f, std::tan(th), delta).second >= 1; }, -span, span));
    cuts.push_back(detail::last_true([&](double th) { return detail::interval(f, std::tan(th), delta).first > 0; }, -span, span));
    for (double& c : cuts) c = std::clamp(c, low, edge);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // pieces beyond |theta| = mid are mapped to the edge offset t, encoded as theta' = t + 4 (right) or -(t + 4) (left)
    auto mapped = [&](double x) {
        if (x >= 4) return L(M_PI / 2 - (x - 4));
        if (x <= -4) return L(-(M_PI / 2 - (-x - 4)));
        return L(x);
    };
    detail::Quadrature total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        if (a >= mid)
            total.add(mapped, 4 + M_PI / 2 - b, 4 + M_PI / 2 - a);
        else if (b <= -mid)
            total.add(mapped, -(4 + M_PI / 2 + b), -(4 + M_PI / 2 + a));
        else
            total.add(mapped, a, b);
    }
    return total.run(mapped, weight_name(w));
}

/// sup of w over [a, b] by a grid followed by golden-section refinement around the best node.
inline double weight_sup(Weight w, double a, double b) {
    constexpr int n = 4000;
    int best = 0;
    double bv = -1;
    for (int i = 0; i <= n; ++i) {
        double v = weight(w, a + (b - a) * i / n);
        if (v > bv) {
            bv = v;
            best = i;
        }
    }
    double lo = a + (b - a) * std::max(0, best - 1) / n, hi = a + (b - a) * std::min(n, best + 1) / n;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 200; ++i) {
        double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
        if (weight(w, m1) < weight(w, m2)) lo = m1; else hi = m2;
    }
    return std::max(bv, weight(w, 0.5 * (lo + hi)));
}

/// The constant C_w bounding the weighted average by C_w sqrt(delta) (sphere, real_line or disk).
inline double weight_constant(Weight w) {
    const double r = std::sqrt(2.0) / 4;
    auto integrand = [&](double x) {
        return weight(w, std::atan(0.5 - std::sqrt(2.0) * x)) / std::sqrt(1 + 2 * (x - r) * (x - r));
    };
    // x = dir (r + u / (1 - u)) maps u in [0, 1) onto the half line beyond dir r
    auto half_line = [&](double dir) {
        return [&, dir](double u) {
            if (u >= 1) return 0.0;
            double v = 1 - u;
            return integrand(dir * (r + u / v)) / (v * v);
        };
    };
    switch (w) {
        case Weight::sphere:
        case Weight::real_line:
            return std::sqrt(2.0) * weight_sup(w, -M_PI / 4, M_PI / 4) + 4 * detail::integrate(half_line(1), 0.0, 1.0, weight_name(w));
        case Weight::disk:
            return std::sqrt(2.0) * weight_sup(w, 0, M_PI / 4) + 2 * detail::integrate(half_line(-1), 0.0, 1.0, weight_name(w));
        default: throw std::invalid_argument("constant defined for sphere, real_line and disk weights");
    }
}

struct NamedConstant {
    std::string name;
    double value;
    double bound;  ///< published upper bound (or exact value for the disk)
};

inline std::vector<NamedConstant> constant_check() {
    return {
        {"C_sphere", weight_constant(Weight::sphere), 1.9046},
        {"C_real_line", weight_constant(Weight::real_line), 1.7673},
        {"C_disk", weight_constant(Weight::disk), (1 + 8 * std::log(2.0)) / (2 * std::sqrt(2.0))},
    };
}

inline std::string to_csv(const std::vector<NamedConstant>& table) {
    std::ostringstream os;
    os.precision(10);
    os << "name,value,bound\n";
    for (const auto& c : table) os << c.name << ',' << c.value << ',' << c.bound << '\n';
    return os.str();
}

/**
 * For each sampled slope y, the square with upper-right corner (x_R(y), y) and
 * lower-left corner on the curve (x_L(y'), y'); returns the largest diagonal.
 * Slopes are y = tan(theta) for theta evenly spread over (-pi/2, pi/2).
 */
inline double square_diagonal_check(const ConcaveProfile& f, double delta, int samples) {
    detail::check_delta(delta);
    if (samples < 1) throw std::invalid_argument("samples must be positive");
    double best = 0;
    for (int i = 0; i < samples; ++i) {
        double y = std::tan(-M_PI / 2 + M_PI * (i + 0.5) / samples);
        double xr = x_right(f, delta, y);
        // side s solves x_L(y - s) = x_R(y) - s; the difference increases with s
        auto h = [&](double s) { return x_left(f, delta, y - s) - (xr - s); };
        double lo = 0, hi = xr;
        if (h(lo) >= 0) continue;
        while (hi - lo > 1e-13) {
            double m = 0.5 * (lo + hi);
            if (h(m) >= 0) hi = m; else lo = m;
        }
        best = std::max(best, std::sqrt(2.0) * hi);
    }
    return best;
}

}  // namespace fpe::geometry
