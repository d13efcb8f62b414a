#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "qlens/errors.hpp"
#include "qlens/scalars.hpp"

namespace qlens {

namespace detail {
inline long long checked_add(long long a, long long b) {
    long long out = 0;
    if (__builtin_add_overflow(a, b, &out))
        throw overflow_error("exponent overflow in scalar multiplication");
    return out;
}
}  // namespace detail

// Laurent polynomial in the deformation parameter with Gaussian-rational
// coefficients: sum_k  a_k q^k,  k ranging over signed machine integers.
// This is the coefficient ring of every symbolic computation; arithmetic is
// exact and zero-testing is decidable.  Terms with zero coefficient are
// never stored.
class QLaurent {
  public:
    using TermMap = std::map<long long, GaussianRational>;

    QLaurent() = default;
    QLaurent(GaussianRational constant) {  // NOLINT(google-explicit-constructor)
        if (!constant.is_zero()) terms_[0] = std::move(constant);
    }
    QLaurent(long long constant) : QLaurent(GaussianRational(constant)) {}  // NOLINT

    static QLaurent zero() { return {}; }
    static QLaurent one() { return QLaurent(1); }

    // a * q^k as a single term.
    static QLaurent q_power(long long k, GaussianRational a = GaussianRational::one()) {
        QLaurent out;
        if (!a.is_zero()) out.terms_[k] = std::move(a);
        return out;
    }

    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }

    friend QLaurent operator+(const QLaurent& a, const QLaurent& b) {
        QLaurent out = a;
        for (const auto& [k, coeff] : b.terms_) out.add_term(k, coeff);
        return out;
    }
    friend QLaurent operator-(const QLaurent& a, const QLaurent& b) {
        QLaurent out = a;
        for (const auto& [k, coeff] : b.terms_) out.add_term(k, -coeff);
        return out;
    }
    friend QLaurent operator-(const QLaurent& a) { return QLaurent() - a; }
    friend QLaurent operator*(const QLaurent& a, const QLaurent& b) {
        QLaurent out;
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_)
                out.add_term(detail::checked_add(ka, kb), ca * cb);
        return out;
    }
    QLaurent& operator+=(const QLaurent& b) { return *this = *this + b; }
    QLaurent& operator-=(const QLaurent& b) { return *this = *this - b; }
    QLaurent& operator*=(const QLaurent& b) { return *this = *this * b; }

    friend bool operator==(const QLaurent& a, const QLaurent& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const QLaurent& a, const QLaurent& b) { return !(a == b); }

    // Coefficient-wise complex conjugation.  The deformation parameter is
    // real, so q^k is fixed and only coefficients conjugate.
    QLaurent conj() const {
        QLaurent out;
        for (const auto& [k, coeff] : terms_) out.terms_[k] = coeff.conj();
        return out;
    }

    // Numeric evaluation at q = q_val.  Only defined on the open interval
    // (0,1); everything downstream (weights, decay certificates) assumes it.
    Complex eval(double q_val) const {
        if (!(q_val > 0.0 && q_val < 1.0))
            throw domain_error("evaluation point must lie in the open interval (0,1)");
        Complex acc{0.0, 0.0};
        for (const auto& [k, coeff] : terms_)
            acc += coeff.eval() * std::pow(q_val, static_cast<double>(k));
        return acc;
    }

  private:
    void add_term(long long k, const GaussianRational& coeff) {
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            if (!coeff.is_zero()) terms_.emplace(k, coeff);
            return;
        }
        it->second += coeff;
        if (it->second.is_zero()) terms_.erase(it);
    }

    TermMap terms_;
};

// Renders one term in the expression grammar ("q^-2", "3 . q^2", "i").
inline std::string term_to_string(long long k, const GaussianRational& coeff) {
    std::string qpart = (k == 0) ? "" : "q^" + std::to_string(k);
    if (coeff == GaussianRational::one()) return qpart.empty() ? "1" : qpart;
    std::string cpart = to_string(coeff);
    if (qpart.empty()) return cpart;
    return cpart + " . " + qpart;
}

// Multi-term scalars are parenthesized so the result can be re-parsed as a
// single factor: "(1 - q^2)".
inline std::string to_string(const QLaurent& x) {
    if (x.is_zero()) return "0";
    if (x.terms().size() == 1) {
        const auto& [k, coeff] = *x.terms().begin();
        return term_to_string(k, coeff);
    }
    std::string out = "(";
    bool first = true;
    for (const auto& [k, coeff] : x.terms()) {
        if (!first) {
            // Pull a leading minus out of purely real negative coefficients
            // so sums print as "1 - q^2" rather than "1 + -1 . q^2".
            if (coeff.im == 0 && coeff.re < 0) {
                out += " - " + term_to_string(k, GaussianRational(-coeff.re));
                first = false;
                continue;
            }
            out += " + ";
        }
        out += term_to_string(k, coeff);
        first = false;
    }
    return out + ")";
}

}  // namespace qlens
