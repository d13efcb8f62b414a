#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qlens/expr.hpp"
#include "qlens/normal_form.hpp"
#include "qlens/rewrite.hpp"

namespace qlens {

// Deterministic sample builders.  Checks are reproducible bit for bit under a
// fixed seed, so every distribution here is sampled through an explicitly
// seeded engine and nothing consults global state.
using Rng = std::mt19937_64;

// Derives an independent stream for sample `index` of a named suite, so that
// parallel evaluation order cannot change what any individual sample sees.
inline Rng sample_rng(unsigned long long seed, unsigned long long suite, unsigned long long index) {
    std::seed_seq seq{seed, suite, index};
    return Rng(seq);
}

namespace gen {

inline int pick(Rng& rng, int lo, int hi) {  // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Small exact scalar literal in the expression grammar; magnitudes are kept
// close to 1 so that zero/nonzero classification margins stay wide.
inline std::string random_scalar(Rng& rng) {
    static const char* kChoices[] = {"1",   "2",    "3",   "1/2", "1/3", "3/2",
                                     "-1",  "-2",   "-1/2", "i",   "-i",  "q^1",
                                     "q^-1", "q^2", "q^-2"};
    return kChoices[pick(rng, 0, static_cast<int>(std::size(kChoices)) - 1)];
}

// Product of 1..max_len generator letters, e.g. "c . d* . d".
inline std::string random_word(Rng& rng, int max_len) {
    static const char* kLetters[] = {"c", "d", "c*", "d*"};
    int len = pick(rng, 1, max_len);
    std::string out;
    for (int i = 0; i < len; ++i) {
        if (i) out += " . ";
        out += kLetters[pick(rng, 0, 3)];
    }
    return out;
}

// Random *-polynomial of total letter degree <= max_degree: a short sum of
// scaled words, occasionally adjointed as a whole.
inline std::string random_star_poly(Rng& rng, int max_degree = 6, int max_words = 4) {
    int terms = pick(rng, 1, max_words);
    std::string out;
    for (int i = 0; i < terms; ++i) {
        std::string term = random_scalar(rng);
        term += " . " + random_word(rng, max_degree);
        if (i) out += pick(rng, 0, 1) ? " + " : " - ";
        out += term;
    }
    if (pick(rng, 0, 4) == 0) return "(" + out + ")*";
    return out;
}

// Analytic lower bound on the operator norm of an ordered-form element, valid
// in the untruncated model and therefore also for any truncation that retains
// the low diagonal levels.  Monomials acting on the same (k, s)-diagonal are
// grouped by (c exponent, winding); within one group the matrix entry at level
// p is the group's coefficient sum weighted by the distinct geometric rates
// q^{(d_pow + ds_pow)(p l + s)}, times a product of ladder weights each of
// which is at least wmin = sqrt(prod_{r=1..l} (1 - q^{2r})).  A group of g
// distinct rates cannot vanish at g consecutive levels, so probing the first
// four admissible levels of the s = 1 leg certifies a floor whenever any probe
// is nonzero.  The probed levels sit at small p and bounded |winding|, where
// truncation-boundary masking never reaches.
inline double nf_norm_floor(const NormalForm& nf, double q) {
    const int l = nf.l();
    double wmin_sq = 1.0;
    for (int r = 1; r <= l; ++r) wmin_sq *= 1.0 - std::pow(q, 2 * r);
    const double wmin = std::sqrt(wmin_sq);

    std::map<std::pair<long long, long long>, std::vector<std::pair<Complex, long long>>> groups;
    for (const auto& [mono, coeff] : nf.terms()) {
        groups[{mono.c_pow, mono.ds_pow - mono.d_pow}].push_back(
            {coeff.eval(q), mono.d_pow + mono.ds_pow});
    }

    double floor = 0.0;
    for (const auto& [key, members] : groups) {
        const long long c_pow = key.first;
        const double w_floor = std::pow(wmin, static_cast<double>(std::llabs(c_pow)));
        const long long p0 = std::max<long long>(c_pow, 0);
        for (long long p = p0; p < p0 + 4; ++p) {
            Complex entry = 0.0;
            for (const auto& [value, rate] : members) {
                entry += value * std::pow(q, static_cast<double>(rate * (p * l + 1)));
            }
            floor = std::max(floor, w_floor * std::abs(entry));
        }
    }
    return floor;
}

// Random *-polynomial conditioned on classifiability: either its ordered form
// is exactly zero, or the element's operator norm provably exceeds `floor`.
// Unconditioned words can order their letters so that every surviving matrix
// entry carries a factor like q^{(d-degree)(c-degree * l + s)}, which for
// moderate degrees already sits below any practical numeric threshold even in
// the untruncated model; such samples are invisible to every oracle and say
// nothing about faithfulness, so they are rejected and redrawn.
inline std::string random_classifiable_poly(Rng& rng, int l, double q, double floor,
                                            int max_degree = 6, int max_words = 4) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::string text = random_star_poly(rng, max_degree, max_words);
        NormalForm nf = normalize(text, l);
        if (nf.is_zero() || nf_norm_floor(nf, q) >= floor) return text;
    }
    return "c*";  // unreachable in practice; a fixed norm-one fallback keeps the draw total
}

// The left-hand-minus-right-hand side of one defining relation, as source
// text.  Every such expression is zero in the algebra by construction.
inline std::string relation_difference(int rule, int l) {
    auto ordered_product = [](int m_lo, int m_hi, int sign) {
        std::string out;
        for (int m = m_lo; m <= m_hi; ++m) {
            if (!out.empty()) out += " . ";
            out += "(1 - q^" + std::to_string(sign * 2 * m) + " . d . d*)";
        }
        return out.empty() ? std::string("1") : out;
    };
    std::string ql = "q^" + std::to_string(l);
    std::string qml = "q^-" + std::to_string(l);
    switch (rule) {
        case 1: return "d . c - " + qml + " . c . d";
        case 2: return "d* . c - " + qml + " . c . d*";
        case 3: return "d . c* - " + ql + " . c* . d";
        case 4: return "d* . c* - " + ql + " . c* . d*";
        case 5: return "d* . d - d . d*";
        case 6: return "c . c* - " + ordered_product(0, l - 1, +1);
        case 7: return "c* . c - " + ordered_product(1, l, -1);
    }
    throw domain_error("rule index must be 1..7");
}

// A structurally nontrivial expression that is exactly zero in the algebra:
// a relation difference multiplied by short words on either side.
inline std::string random_zero_poly(Rng& rng, int l) {
    std::string core = "(" + relation_difference(pick(rng, 1, 7), l) + ")";
    if (pick(rng, 0, 1)) core = random_word(rng, 2) + " . " + core;
    if (pick(rng, 0, 1)) core += " . " + random_word(rng, 2);
    if (pick(rng, 0, 2) == 0) core = random_scalar(rng) + " . " + core;
    return core;
}

}  // namespace gen

// Random ordered-form element of homogeneous circle-action degree n with a
// bounded number of monomials; coefficients are small exact scalars.
inline NormalForm random_homogeneous_nf(Rng& rng, int l, long long n, int max_terms = 3) {
    NormalForm nf(l);
    int terms = gen::pick(rng, 1, max_terms);
    for (int i = 0; i < terms; ++i) {
        long long d_pow = gen::pick(rng, 0, 2);
        long long c_pow = gen::pick(rng, -2, 2);
        long long ds_pow = n - c_pow + d_pow;
        if (ds_pow < 0) {
            d_pow += -ds_pow;
            ds_pow = 0;
        }
        QLaurent coeff = QLaurent::q_power(gen::pick(rng, -1, 1),
                                           GaussianRational(Rational(gen::pick(rng, 1, 3)),
                                                            Rational(gen::pick(rng, -1, 1))));
        nf.add_term(Monomial{c_pow, d_pow, ds_pow}, coeff);
    }
    return nf;
}

// Random reduction-order chooser for confluence exercises.
inline RedexChooser random_redex_chooser(std::shared_ptr<Rng> rng) {
    return [rng](const Word&, const std::vector<std::size_t>& redexes) {
        return redexes[std::uniform_int_distribution<std::size_t>(0, redexes.size() - 1)(*rng)];
    };
}

}  // namespace qlens
