/**
 * @file concave_cover.hpp
 * @brief Least concave majorant of an integer scale profile, with sheared queries.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fpe/scale.hpp"

namespace fpe {

struct CoverVertex {
    int k;
    std::int64_t height;
    friend bool operator==(const CoverVertex&, const CoverVertex&) = default;
};

/**
 * Piecewise-linear concave function on [0, d] through integer points,
 * stored as its vertex list.  Slopes strictly decrease.
 */
class ConcaveCover {
public:
    ConcaveCover() = default;
    explicit ConcaveCover(std::vector<CoverVertex> v, std::uint64_t comparisons = 0)
        : v_(std::move(v)), comparisons_(comparisons) {
        if (v_.empty()) throw std::invalid_argument("cover needs at least one vertex");
    }

    const std::vector<CoverVertex>& vertices() const { return v_; }
    int degree() const { return v_.back().k; }
    /// Comparisons spent while building (sort plus hull maintenance).
    std::uint64_t build_comparisons() const { return comparisons_; }

    /// Index i of the segment [v_i, v_{i+1}] holding k (last vertex maps to the last segment).
    std::size_t segment_of(int k) const {
        if (k < 0 || k > degree()) throw std::out_of_range("index outside cover domain");
        if (v_.size() == 1) return 0;
        auto it = std::upper_bound(v_.begin(), v_.end(), k, [](int x, const CoverVertex& c) { return x < c.k; });
        std::size_t i = static_cast<std::size_t>(it - v_.begin());
        return std::min(i == 0 ? 0 : i - 1, v_.size() - 2);
    }

    /// Cover value at real abscissa x, interpolated in double precision.
    double at(double x) const {
        if (v_.size() == 1) return static_cast<double>(v_[0].height);
        std::size_t i = segment_of(static_cast<int>(std::floor(std::clamp(x, 0.0, static_cast<double>(degree())))));
        const auto& a = v_[i];
        const auto& b = v_[i + 1];
        return static_cast<double>(a.height) +
               static_cast<double>(b.height - a.height) * (x - a.k) / static_cast<double>(b.k - a.k);
    }

    /// Exact test cover(k) >= value for integer k.
    bool covers(int k, std::int64_t value) const {
        if (v_.size() == 1) return v_[0].height >= value;
        const std::size_t i = segment_of(k);
        const auto& a = v_[i];
        const auto& b = v_[i + 1];
        return (value - a.height) * static_cast<std::int64_t>(b.k - a.k) <=
               (b.height - a.height) * static_cast<std::int64_t>(k - a.k);
    }

    /// Vertex dump, one "k,height" line per vertex.
    std::string to_csv() const {
        std::ostringstream os;
        for (const auto& c : v_) os << c.k << ',' << c.height << '\n';
        return os.str();
    }

    friend bool operator==(const ConcaveCover& a, const ConcaveCover& b) { return a.v_ == b.v_; }

private:
    std::vector<CoverVertex> v_;
    std::uint64_t comparisons_ = 0;
};

namespace detail {
// true iff slope(a,b) > slope(b,c), for a.k < b.k < c.k
inline bool strictly_turns_down(const CoverVertex& a, const CoverVertex& b, const CoverVertex& c) {
    return (b.height - a.height) * static_cast<std::int64_t>(c.k - b.k) >
           (c.height - b.height) * static_cast<std::int64_t>(b.k - a.k);
}
}  // namespace detail

/**
 * Builds the cover by inserting points in order of decreasing scale (ties by
 * increasing index).  Each new point lies below every vertex so far; it is
 * either inside the current span and ignored, or extends the span to the
 * left or right, in which case the supporting vertex is found by a galloping
 * binary search from that end and the hidden vertices are dropped.
 */
inline ConcaveCover build_cover(const std::vector<Scale>& entries) {
    if (entries.empty()) throw std::invalid_argument("empty scale sequence");
    const int d = static_cast<int>(entries.size()) - 1;
    if (entries.front().is_neg_inf() || entries.back().is_neg_inf())
        throw std::invalid_argument("first and last entries of a scale sequence must be finite");

    std::uint64_t cmp = 0;
    std::vector<int> order;
    order.reserve(entries.size());
    for (int k = 0; k <= d; ++k)
        if (entries[k].is_finite()) order.push_back(k);
    // merge sort: at most about n log2 n comparisons whatever the input order
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        ++cmp;
        std::int64_t sa = entries[a].value(), sb = entries[b].value();
        return sa != sb ? sa > sb : a < b;
    });

    std::deque<CoverVertex> hull;
    hull.push_back({order[0], entries[order[0]].value()});
    for (std::size_t n = 1; n < order.size(); ++n) {
        CoverVertex p{order[n], entries[order[n]].value()};
        cmp += 2;
        if (p.k > hull.back().k) {
            // largest j kept: j == 0 or slope(v_{j-1}, v_j) > slope(v_j, p)
            auto keep = [&](std::size_t j) {
                ++cmp;
                return detail::strictly_turns_down(hull[j - 1], hull[j], p);
            };
            // probe last, last-1, last-3, last-7, ... then bisect the bracket
            std::size_t prev = hull.size(), probe = hull.size() - 1, step = 1;
            while (probe > 0 && !keep(probe)) {
                prev = probe;
                probe = probe > step ? probe - step : 0;
                step *= 2;
            }
            std::size_t lo = probe, hi = prev - 1;
            while (lo < hi) {
                std::size_t mid = (lo + hi + 1) / 2;
                if (keep(mid)) lo = mid; else hi = mid - 1;
            }
            hull.erase(hull.begin() + static_cast<std::ptrdiff_t>(lo) + 1, hull.end());
            hull.push_back(p);
        } else if (p.k < hull.front().k) {
            // smallest j kept: j == last or slope(p, v_j) > slope(v_j, v_{j+1})
            const std::size_t last = hull.size() - 1;
            auto keep = [&](std::size_t j) {
                ++cmp;
                return detail::strictly_turns_down(p, hull[j], hull[j + 1]);
            };
            std::ptrdiff_t prev = -1;
            std::size_t probe = 0, step = 1;
            while (probe < last && !keep(probe)) {
                prev = static_cast<std::ptrdiff_t>(probe);
                probe = std::min(last, probe + step);
                step *= 2;
            }
            std::size_t lo = static_cast<std::size_t>(prev + 1), hi = probe;
            while (lo < hi) {
                std::size_t mid = (lo + hi) / 2;
                if (keep(mid)) hi = mid; else lo = mid + 1;
            }
            hull.erase(hull.begin(), hull.begin() + static_cast<std::ptrdiff_t>(lo));
            hull.push_front(p);
        }
    }
    return ConcaveCover(std::vector<CoverVertex>(hull.begin(), hull.end()), cmp);
}

struct ShearedMax {
    int k;     ///< smallest index maximizing cover(k) + lambda * k
    double N;  ///< the maximum value
};

/// Maximizes cover(k) + lambda*k by binary search over the decreasing slopes.
inline ShearedMax argmax_sheared(const ConcaveCover& c, double lambda, int* probes = nullptr) {
    const auto& v = c.vertices();
    std::size_t lo = 0, hi = v.size() - 1;  // answer in [lo, hi]
    int n = 0;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        ++n;
        double rise = static_cast<double>(v[mid + 1].height - v[mid].height) +
                      lambda * static_cast<double>(v[mid + 1].k - v[mid].k);
        if (rise <= 0) hi = mid; else lo = mid + 1;
    }
    if (probes) *probes = n;
    return {v[lo].k, static_cast<double>(v[lo].height) + lambda * v[lo].k};
}

/**
 * Largest integer interval [l, r] around the sheared maximum on which
 * cover(k) + lambda*k >= N - drop.  Near-ties are resolved toward a wider band.
 */
inline std::pair<int, int> band_bounds(const ConcaveCover& c, double lambda, double drop) {
    const auto& v = c.vertices();
    const ShearedMax top = argmax_sheared(c, lambda);
    const double threshold = top.N - drop;
    auto g = [&](std::size_t i) { return static_cast<double>(v[i].height) + lambda * v[i].k; };
    auto tol = [&](double x) { return 1e-9 * std::max(1.0, std::fabs(x)); };

    std::size_t itop = static_cast<std::size_t>(
        std::lower_bound(v.begin(), v.end(), top.k, [](const CoverVertex& a, int k) { return a.k < k; }) - v.begin());

    // left branch: g increases on [0, itop]; first vertex at or above threshold
    std::size_t lo = 0, hi = itop;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (g(mid) >= threshold - tol(threshold)) hi = mid; else lo = mid + 1;
    }
    int l;
    if (lo == 0) {
        l = v[0].k;
    } else {
        double ga = g(lo - 1), gb = g(lo);
        double x = v[lo - 1].k + (threshold - ga) / (gb - ga) * (v[lo].k - v[lo - 1].k);
        l = std::max(v[lo - 1].k + 1, static_cast<int>(std::ceil(x - tol(x))));
        l = std::min(l, v[lo].k);
    }

    // right branch: g decreases on [itop, m]; last vertex at or above threshold
    lo = itop;
    hi = v.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi + 1) / 2;
        if (g(mid) >= threshold - tol(threshold)) lo = mid; else hi = mid - 1;
    }
    int r;
    if (lo == v.size() - 1) {
        r = v.back().k;
    } else {
        double ga = g(lo), gb = g(lo + 1);
        double x = v[lo].k + (ga - threshold) / (ga - gb) * (v[lo + 1].k - v[lo].k);
        r = std::min(v[lo + 1].k - 1, static_cast<int>(std::floor(x + tol(x))));
        r = std::max(r, v[lo].k);
    }
    return {l, r};
}

}  // namespace fpe
