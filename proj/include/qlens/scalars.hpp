#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <sstream>
#include <string>

#include "qlens/errors.hpp"

namespace qlens {

// Arbitrary-precision rational.  All symbolic coefficient arithmetic in the
// library is exact; doubles only appear once a value is evaluated at a
// numeric deformation parameter.
using Rational = boost::multiprecision::cpp_rational;

using Complex = std::complex<double>;

inline double to_double(const Rational& r) {
    return static_cast<double>(r);
}

// Element of Q(i): re + im*i with exact rational parts.
struct GaussianRational {
    Rational re{0};
    Rational im{0};

    GaussianRational() = default;
    GaussianRational(Rational real, Rational imag = Rational(0))
        : re(std::move(real)), im(std::move(imag)) {}
    GaussianRational(long long real) : re(real) {}  // NOLINT(google-explicit-constructor)

    static GaussianRational zero() { return {}; }
    static GaussianRational one() { return GaussianRational(1); }
    static GaussianRational imaginary_unit() { return {Rational(0), Rational(1)}; }

    bool is_zero() const { return re == 0 && im == 0; }

    GaussianRational conj() const { return {re, -im}; }

    Complex eval() const { return {to_double(re), to_double(im)}; }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    GaussianRational& operator+=(const GaussianRational& b) { return *this = *this + b; }
    GaussianRational& operator-=(const GaussianRational& b) { return *this = *this - b; }
    GaussianRational& operator*=(const GaussianRational& b) { return *this = *this * b; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) {
        return !(a == b);
    }
};

inline std::string to_string(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

// Renders in the expression grammar: "3", "-1/2", "i", "(1/2 + 3 . i)".
// A purely real value never needs parentheses; a mixed value always gets them.
inline std::string to_string(const GaussianRational& g) {
    if (g.im == 0) return to_string(g.re);
    Rational mag = g.im < 0 ? Rational(-g.im) : g.im;
    std::string imag_abs = (mag == 1) ? "i" : to_string(mag) + " . i";
    if (g.re == 0) return g.im < 0 ? "-" + imag_abs : imag_abs;
    std::string sep = (g.im < 0) ? " - " : " + ";
    return "(" + to_string(g.re) + sep + imag_abs + ")";
}

}  // namespace qlens
