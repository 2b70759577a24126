/**
 * @file polynomial.hpp
 * @brief Dense complex polynomial with coefficients of one storage precision.
 */
#pragma once

#include <stdexcept>
#include <vector>

#include "fpe/big_complex.hpp"

namespace fpe {

/// Coefficients a_0..a_d; the leading one is nonzero unless the polynomial is zero.
class Polynomial {
public:
    explicit Polynomial(Precision p = Precision(53)) : p_(p) {}
    Polynomial(std::vector<BigComplex> coeffs, Precision p) : c_(std::move(coeffs)), p_(p) {
        for (auto& a : c_)
            if (a.precision() != p_) a.round_to(p_);
        trim();
    }

    /// Degree, or -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    Precision precision() const { return p_; }

    const std::vector<BigComplex>& coefficients() const { return c_; }
    const BigComplex& operator[](std::size_t k) const { return c_.at(k); }

    /// Number of leading zero coefficients a_0 = ... = a_{v-1} = 0.
    int valuation() const {
        int v = 0;
        while (v < static_cast<int>(c_.size()) && c_[v].is_zero()) ++v;
        return v;
    }

    Polynomial rounded(Precision p) const {
        std::vector<BigComplex> out;
        out.reserve(c_.size());
        for (const auto& a : c_) out.push_back(a.rounded(p));
        return Polynomial(std::move(out), p);
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }

    std::vector<BigComplex> c_;
    Precision p_;
};

}  // namespace fpe
