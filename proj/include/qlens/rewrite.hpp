#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "qlens/expr.hpp"
#include "qlens/normal_form.hpp"

namespace qlens {

// ---------------------------------------------------------------------------
// Word rewriting.
//
// Elements are manipulated as linear combinations of words in the letters
// {c, c*, d, d*} and reduced by the confluent system
//
//   (1) d  c  -> q^-l c  d          (5) d* d  -> d d*
//   (2) d* c  -> q^-l c  d*         (6) c  c* -> prod_{m=0}^{l-1} (1 - q^{2m}  d d*)
//   (3) d  c* -> q^ l c* d          (7) c* c  -> prod_{m=1}^{l}   (1 - q^{-2m} d d*)
//   (4) d* c* -> q^ l c* d*
//
// A word is irreducible exactly when it is an ordered word (a run of c or of
// c*, then d's, then d*'s), so exhaustive reduction lands in the monomial
// basis of NormalForm.  The reduction order is configurable; agreement of
// arbitrary orders is exercised by the test suite.
// ---------------------------------------------------------------------------

enum class Letter : unsigned char { C, Cs, D, Ds };

using Word = std::vector<Letter>;
using WordPoly = std::map<Word, QLaurent>;

// Chooses which redex to contract next: receives the word and the list of
// redex positions (guaranteed nonempty) and returns an element of that list.
using RedexChooser = std::function<std::size_t(const Word&, const std::vector<std::size_t>&)>;

inline std::size_t leftmost_redex(const Word&, const std::vector<std::size_t>& redexes) {
    return redexes.front();
}

namespace detail {

// Coefficients of prod (1 - a_m x) as a dense polynomial in x, where x will
// stand for the central-in-the-d's element d d*.
inline std::vector<QLaurent> alternating_product(const std::vector<QLaurent>& factors) {
    std::vector<QLaurent> poly{QLaurent::one()};
    for (const QLaurent& a : factors) {
        std::vector<QLaurent> next(poly.size() + 1, QLaurent::zero());
        for (std::size_t r = 0; r < poly.size(); ++r) {
            next[r] += poly[r];
            next[r + 1] -= poly[r] * a;
        }
        poly = std::move(next);
    }
    return poly;
}

// prod_{m=0}^{l-1} (1 - q^{2m} x): the ordered expansion of c c*.
inline std::vector<QLaurent> cc_star_expansion(int l) {
    std::vector<QLaurent> factors;
    for (int m = 0; m < l; ++m) factors.push_back(QLaurent::q_power(2 * m));
    return alternating_product(factors);
}

// prod_{m=1}^{l} (1 - q^{-2m} x): the ordered expansion of c* c.
inline std::vector<QLaurent> cstar_c_expansion(int l) {
    std::vector<QLaurent> factors;
    for (int m = 1; m <= l; ++m) factors.push_back(QLaurent::q_power(-2 * m));
    return alternating_product(factors);
}

inline bool is_redex(Letter a, Letter b) {
    switch (a) {
        case Letter::D:
        case Letter::Ds:
            if (b == Letter::C || b == Letter::Cs) return true;
            return a == Letter::Ds && b == Letter::D;
        case Letter::C:
            return b == Letter::Cs;
        case Letter::Cs:
            return b == Letter::C;
    }
    return false;
}

inline std::vector<std::size_t> redex_positions(const Word& w) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (is_redex(w[i], w[i + 1])) out.push_back(i);
    return out;
}

inline Monomial monomial_of_irreducible(const Word& w) {
    Monomial m;
    for (Letter letter : w) {
        switch (letter) {
            case Letter::C: ++m.c_pow; break;
            case Letter::Cs: --m.c_pow; break;
            case Letter::D: ++m.d_pow; break;
            case Letter::Ds: ++m.ds_pow; break;
        }
    }
    return m;
}

struct RewriteTables {
    std::vector<QLaurent> cc_star;   // expansion of c c*
    std::vector<QLaurent> cstar_c;   // expansion of c* c
    QLaurent q_l;                    // q^l
    QLaurent q_minus_l;              // q^-l

    explicit RewriteTables(int l)
        : cc_star(cc_star_expansion(l)),
          cstar_c(cstar_c_expansion(l)),
          q_l(QLaurent::q_power(l)),
          q_minus_l(QLaurent::q_power(-l)) {}
};

// Contracts the redex at position i, appending the replacement words (with
// their coefficient multipliers) to `out`.
inline void contract(const Word& w, std::size_t i, const RewriteTables& tables,
                     std::vector<std::pair<Word, QLaurent>>& out) {
    Letter a = w[i], b = w[i + 1];
    auto swapped = [&](Letter first, Letter second, const QLaurent& scale) {
        Word next = w;
        next[i] = first;
        next[i + 1] = second;
        out.emplace_back(std::move(next), scale);
    };
    if (b == Letter::C && a == Letter::D) return swapped(Letter::C, Letter::D, tables.q_minus_l);
    if (b == Letter::C && a == Letter::Ds) return swapped(Letter::C, Letter::Ds, tables.q_minus_l);
    if (b == Letter::Cs && a == Letter::D) return swapped(Letter::Cs, Letter::D, tables.q_l);
    if (b == Letter::Cs && a == Letter::Ds) return swapped(Letter::Cs, Letter::Ds, tables.q_l);
    if (a == Letter::Ds && b == Letter::D) return swapped(Letter::D, Letter::Ds, QLaurent::one());

    const std::vector<QLaurent>& poly =
        (a == Letter::C && b == Letter::Cs) ? tables.cc_star : tables.cstar_c;
    for (std::size_t r = 0; r < poly.size(); ++r) {
        if (poly[r].is_zero()) continue;
        Word next;
        next.reserve(w.size() - 2 + 2 * r);
        next.insert(next.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
        next.insert(next.end(), r, Letter::D);
        next.insert(next.end(), r, Letter::Ds);
        next.insert(next.end(), w.begin() + static_cast<std::ptrdiff_t>(i) + 2, w.end());
        out.emplace_back(std::move(next), poly[r]);
    }
}

}  // namespace detail

// Exhaustively reduces a linear combination of words.  The system terminates
// for every reduction order; the chooser only affects the path taken.
inline NormalForm reduce_words(const WordPoly& input, int l,
                               const RedexChooser& choose = leftmost_redex) {
    detail::RewriteTables tables(l);
    NormalForm result(l);
    std::vector<std::pair<Word, QLaurent>> stack(input.begin(), input.end());
    std::vector<std::pair<Word, QLaurent>> replacements;
    while (!stack.empty()) {
        auto [word, coeff] = std::move(stack.back());
        stack.pop_back();
        if (coeff.is_zero()) continue;
        std::vector<std::size_t> redexes = detail::redex_positions(word);
        if (redexes.empty()) {
            result.add_term(detail::monomial_of_irreducible(word), coeff);
            continue;
        }
        std::size_t at = choose(word, redexes);
        replacements.clear();
        detail::contract(word, at, tables, replacements);
        for (auto& [next, scale] : replacements)
            stack.emplace_back(std::move(next), coeff * scale);
    }
    return result;
}

namespace detail {

inline Word word_of_monomial(const Monomial& m) {
    Word w;
    w.reserve(static_cast<std::size_t>((m.c_pow >= 0 ? m.c_pow : -m.c_pow) + m.d_pow + m.ds_pow));
    for (long long i = 0; i < (m.c_pow >= 0 ? m.c_pow : -m.c_pow); ++i)
        w.push_back(m.c_pow >= 0 ? Letter::C : Letter::Cs);
    for (long long i = 0; i < m.d_pow; ++i) w.push_back(Letter::D);
    for (long long i = 0; i < m.ds_pow; ++i) w.push_back(Letter::Ds);
    return w;
}

inline Letter star(Letter x) {
    switch (x) {
        case Letter::C: return Letter::Cs;
        case Letter::Cs: return Letter::C;
        case Letter::D: return Letter::Ds;
        case Letter::Ds: return Letter::D;
    }
    return x;
}

}  // namespace detail

// Product in the algebra: concatenate ordered words pairwise and reduce.
inline NormalForm nf_mul(const NormalForm& a, const NormalForm& b,
                         const RedexChooser& choose = leftmost_redex) {
    a.check_same_l(b);
    WordPoly words;
    for (const auto& [ma, ca] : a.terms()) {
        Word wa = detail::word_of_monomial(ma);
        for (const auto& [mb, cb] : b.terms()) {
            Word w = wa;
            Word wb = detail::word_of_monomial(mb);
            w.insert(w.end(), wb.begin(), wb.end());
            QLaurent c = ca * cb;
            auto it = words.find(w);
            if (it == words.end())
                words.emplace(std::move(w), std::move(c));
            else
                it->second += c;
        }
    }
    return reduce_words(words, a.l(), choose);
}

// Adjoint: reverse each word, star each letter, conjugate each coefficient,
// and re-reduce into ordered form.
inline NormalForm adjoint_nf(const NormalForm& a, const RedexChooser& choose = leftmost_redex) {
    WordPoly words;
    for (const auto& [m, coeff] : a.terms()) {
        Word w = detail::word_of_monomial(m);
        Word rev;
        rev.reserve(w.size());
        for (auto it = w.rbegin(); it != w.rend(); ++it) rev.push_back(detail::star(*it));
        words[std::move(rev)] = coeff.conj();
    }
    return reduce_words(words, a.l(), choose);
}

inline NormalForm nf_power(const NormalForm& base, long long n,
                           const RedexChooser& choose = leftmost_redex) {
    NormalForm acc(base.l());
    acc.add_term(Monomial{}, QLaurent::one());
    for (long long i = 0; i < n; ++i) acc = nf_mul(acc, base, choose);
    return acc;
}

// Evaluates an expression tree into its unique ordered form at parameter l.
// Reduction happens at every node, so intermediate objects stay canonical.
inline NormalForm normalize(const Expr& e, int l, const RedexChooser& choose = leftmost_redex) {
    if (l < 1) throw config_error("the relation parameter l must be >= 1");
    struct Visitor {
        int l;
        const RedexChooser& choose;
        NormalForm run(const Expr& node) const {
            return std::visit([&](const auto& payload) { return (*this)(payload); }, node->payload);
        }
        NormalForm operator()(const ExprNode::Scalar& s) const {
            NormalForm nf(l);
            nf.add_term(Monomial{}, s.value);
            return nf;
        }
        NormalForm operator()(const ExprNode::Generator& g) const {
            NormalForm nf(l);
            nf.add_term(g.g == Gen::C ? Monomial{1, 0, 0} : Monomial{0, 1, 0}, QLaurent::one());
            return nf;
        }
        NormalForm operator()(const ExprNode::Adjoint& a) const {
            return adjoint_nf(run(a.child), choose);
        }
        NormalForm operator()(const ExprNode::Product& p) const {
            return nf_mul(run(p.lhs), run(p.rhs), choose);
        }
        NormalForm operator()(const ExprNode::Sum& s) const {
            NormalForm lhs = run(s.lhs);
            NormalForm rhs = run(s.rhs);
            return s.subtract ? lhs - rhs : lhs + rhs;
        }
        NormalForm operator()(const ExprNode::Power& p) const {
            return nf_power(run(p.base), p.exponent, choose);
        }
    };
    return Visitor{l, choose}.run(e);
}

inline NormalForm normalize(std::string_view text, int l,
                            const RedexChooser& choose = leftmost_redex) {
    return normalize(parse_expr(text), l, choose);
}

}  // namespace qlens
