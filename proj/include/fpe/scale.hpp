/**
 * @file scale.hpp
 * @brief Integer logarithmic magnitudes, working precision and lost-bit counts.
 */
#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fpe {

/// Number of stored mantissa bits after the implicit leading one.
struct Precision {
    int bits = 53;

    constexpr Precision() = default;
    constexpr explicit Precision(int b) : bits(b) {
        if (b < 1) throw std::invalid_argument("precision must be at least 1 bit");
    }
    /// Significand width handed to the big-float backend (leading bit included).
    constexpr long backend_bits() const { return static_cast<long>(bits) + 1; }

    friend constexpr bool operator==(Precision, Precision) = default;
};

/**
 * @brief Scale of a number: 1 + floor(log2 |x|), or minus infinity for zero.
 *
 * For nonzero x, 2^(s-1) <= |x| < 2^s.  Minus infinity is its own state,
 * not a reserved integer, and absorbs any integer shift.
 */
class Scale {
public:
    constexpr Scale() = default;  // minus infinity
    constexpr explicit Scale(std::int64_t v) : finite_(true), v_(v) {}

    static constexpr Scale neg_inf() { return Scale(); }

    constexpr bool is_neg_inf() const { return !finite_; }
    constexpr bool is_finite() const { return finite_; }

    constexpr std::int64_t value() const {
        if (!finite_) throw std::domain_error("scale of zero has no integer value");
        return v_;
    }

    constexpr Scale operator+(std::int64_t n) const { return finite_ ? Scale(v_ + n) : Scale(); }
    constexpr Scale operator-(std::int64_t n) const { return finite_ ? Scale(v_ - n) : Scale(); }

    friend constexpr bool operator==(const Scale& a, const Scale& b) {
        return a.finite_ == b.finite_ && (!a.finite_ || a.v_ == b.v_);
    }
    friend constexpr std::strong_ordering operator<=>(const Scale& a, const Scale& b) {
        if (!a.finite_ || !b.finite_) return a.finite_ <=> b.finite_;
        return a.v_ <=> b.v_;
    }

    std::string to_string() const { return finite_ ? std::to_string(v_) : std::string("-inf"); }
    friend std::ostream& operator<<(std::ostream& os, const Scale& s) { return os << s.to_string(); }

private:
    bool finite_ = false;
    std::int64_t v_ = 0;
};

/// Scale of a nonnegative integer count (s(N) for sums of N terms, s(d) for degrees).
constexpr Scale scale_of_count(std::uint64_t n) {
    if (n == 0) return Scale::neg_inf();
    std::int64_t s = 0;
    while (n) { ++s; n >>= 1; }
    return Scale(s);
}

/// Number of leading bits lost to cancellation; may be unbounded.
class BitLoss {
public:
    constexpr BitLoss() = default;
    constexpr explicit BitLoss(std::int64_t bits) : bits_(bits) {
        if (bits < 0) throw std::invalid_argument("bit loss must be nonnegative");
    }
    static constexpr BitLoss infinite() {
        BitLoss b;
        b.infinite_ = true;
        return b;
    }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr std::int64_t bits() const {
        if (infinite_) throw std::domain_error("bit loss is infinite");
        return bits_;
    }
    /// Finite value clamped to `cap`; infinite maps to `cap`.
    constexpr std::int64_t clamped(std::int64_t cap) const { return infinite_ ? cap : std::min(bits_, cap); }

    friend constexpr bool operator==(const BitLoss& a, const BitLoss& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.bits_ == b.bits_);
    }
    friend constexpr std::strong_ordering operator<=>(const BitLoss& a, const BitLoss& b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
        return a.bits_ <=> b.bits_;
    }

    std::string to_string() const { return infinite_ ? std::string("inf") : std::to_string(bits_); }
    friend std::ostream& operator<<(std::ostream& os, const BitLoss& b) { return os << b.to_string(); }

private:
    bool infinite_ = false;
    std::int64_t bits_ = 0;
};

/**
 * Leading bits lost when operands of largest scale `operand_max` produce a
 * result of scale `result`.  All-zero input loses nothing; a zero result from
 * nonzero operands loses everything.
 */
constexpr BitLoss canceled_bits(Scale operand_max, Scale result) {
    if (result.is_neg_inf()) return operand_max.is_neg_inf() ? BitLoss(0) : BitLoss::infinite();
    if (operand_max < result)
        throw std::invalid_argument("result scale exceeds operand scale; no cancellation to count");
    return BitLoss(operand_max.value() - result.value());
}

}  // namespace fpe
