/**
 * @file csv.hpp
 * @brief Lists of complex numbers as CSV: one "re, im" row per number, decimal text.
 */
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpe/big_complex.hpp"
#include "fpe/polynomial.hpp"

namespace fpe::csv {

/// Malformed or unreadable data; carries the file and line.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/**
 * Parses rows "re, im" (whitespace around the comma tolerated, scientific notation accepted).
 * A row holding a single number is read as a real.  Blank lines and lines starting with '#' are skipped.
 */
inline std::vector<BigComplex> parse(std::istream& in, Precision p, const std::string& source = "input") {
    std::vector<BigComplex> out;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto comma = t.find(',');
        std::string re = detail::trim(t.substr(0, comma));
        std::string im = comma == std::string::npos ? "0" : detail::trim(t.substr(comma + 1));
        if (im.find(',') != std::string::npos) im = detail::trim(im.substr(0, im.find(',')));
        try {
            out.emplace_back(re, im, p);
        } catch (const std::exception& e) {
            throw data_error(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<BigComplex> read(const std::string& path, Precision p) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    return parse(in, p, path);
}

inline void write(std::ostream& out, const std::vector<BigComplex>& values) {
    for (const auto& z : values) out << to_string(z) << '\n';
}

inline void write(const std::string& path, const std::vector<BigComplex>& values) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    write(out, values);
    if (!out) throw data_error("write failed for '" + path + "'");
}

inline Polynomial read_polynomial(const std::string& path, Precision p) { return Polynomial(read(path, p), p); }

inline void write_polynomial(const std::string& path, const Polynomial& poly) {
    auto c = poly.coefficients();
    if (c.empty()) c.emplace_back(poly.precision());  // the zero polynomial is written as a single 0 row
    write(path, c);
}

}  // namespace fpe::csv
