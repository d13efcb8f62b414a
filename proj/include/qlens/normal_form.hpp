#pragma once

#include <compare>
#include <map>
#include <string>

#include "qlens/errors.hpp"
#include "qlens/qlaurent.hpp"

namespace qlens {

// Ordered-word basis element of the coordinate algebra.
//
//   c_pow >= 0 :  c^c_pow  d^d_pow  d*^ds_pow
//   c_pow <  0 :  c*^|c_pow| d^d_pow d*^ds_pow
//
// Every element of the algebra is a unique finite combination of these, which
// is what the rewriting engine produces.  The circle-action degree is
// c_pow - d_pow + ds_pow regardless of the sign convention on c_pow.
struct Monomial {
    long long c_pow = 0;
    long long d_pow = 0;
    long long ds_pow = 0;

    long long degree() const { return c_pow - d_pow + ds_pow; }
    bool is_unit() const { return c_pow == 0 && d_pow == 0 && ds_pow == 0; }

    friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

inline std::string to_string(const Monomial& m) {
    auto piece = [](const std::string& name, long long power) -> std::string {
        if (power == 0) return "";
        if (power == 1) return name;
        return name + "^" + std::to_string(power);
    };
    std::string out;
    auto append = [&out](const std::string& part) {
        if (part.empty()) return;
        if (!out.empty()) out += " . ";
        out += part;
    };
    append(piece(m.c_pow >= 0 ? "c" : "c*", m.c_pow >= 0 ? m.c_pow : -m.c_pow));
    append(piece("d", m.d_pow));
    append(piece("d*", m.ds_pow));
    return out;
}

// Exact linear combination of ordered-word monomials, tied to the parameter l
// that fixed the relations used to order it.  Mixing normal forms taken at
// different l is a caller bug and rejected.
class NormalForm {
  public:
    using TermMap = std::map<Monomial, QLaurent>;

    explicit NormalForm(int l) : l_(l) {
        if (l < 1) throw config_error("the relation parameter l must be >= 1");
    }

    int l() const { return l_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }

    void add_term(const Monomial& m, const QLaurent& coeff) {
        if (coeff.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, coeff);
            return;
        }
        it->second += coeff;
        if (it->second.is_zero()) terms_.erase(it);
    }

    NormalForm& operator+=(const NormalForm& other) {
        check_same_l(other);
        for (const auto& [m, coeff] : other.terms_) add_term(m, coeff);
        return *this;
    }
    NormalForm& operator-=(const NormalForm& other) {
        check_same_l(other);
        for (const auto& [m, coeff] : other.terms_) add_term(m, -coeff);
        return *this;
    }
    friend NormalForm operator+(NormalForm a, const NormalForm& b) { return a += b; }
    friend NormalForm operator-(NormalForm a, const NormalForm& b) { return a -= b; }

    NormalForm scaled(const QLaurent& s) const {
        NormalForm out(l_);
        if (s.is_zero()) return out;
        for (const auto& [m, coeff] : terms_) out.terms_.emplace(m, coeff * s);
        return out;
    }

    friend bool operator==(const NormalForm& a, const NormalForm& b) {
        return a.l_ == b.l_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const NormalForm& a, const NormalForm& b) { return !(a == b); }

    // Splits into homogeneous components of the circle action.
    std::map<long long, NormalForm> degree_decompose() const {
        std::map<long long, NormalForm> out;
        for (const auto& [m, coeff] : terms_) {
            auto [it, inserted] = out.try_emplace(m.degree(), l_);
            it->second.add_term(m, coeff);
        }
        return out;
    }

    void check_same_l(const NormalForm& other) const {
        if (l_ != other.l_)
            throw domain_error("normal forms taken at different l cannot be combined");
    }

  private:
    int l_;
    TermMap terms_;
};

// Prints in the expression grammar so output can be parsed back:
//   "1 - q^-2 . d . d*",  "q^-2 . c . d",  "(1 - q^2) . c".
inline std::string to_string(const NormalForm& nf) {
    if (nf.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [mono, coeff] : nf.terms()) {
        std::string mono_str = to_string(mono);
        // A single-term real-negative coefficient is pulled into a leading
        // " - " on all but the first term.
        bool negated = false;
        QLaurent printed = coeff;
        if (!first && coeff.terms().size() == 1) {
            const auto& [k, a] = *coeff.terms().begin();
            if (a.im == 0 && a.re < 0) {
                negated = true;
                printed = QLaurent::q_power(k, GaussianRational(-a.re));
            }
        }
        std::string term;
        if (mono_str.empty()) {
            term = to_string(printed);
        } else if (printed == QLaurent::one()) {
            term = mono_str;
        } else {
            term = to_string(printed) + " . " + mono_str;
        }
        if (first) {
            out = term;
            first = false;
        } else {
            out += (negated ? " - " : " + ") + term;
        }
    }
    return out;
}

}  // namespace qlens
