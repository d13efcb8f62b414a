#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qlens/errors.hpp"
#include "qlens/expr.hpp"
#include "qlens/gelement.hpp"
#include "qlens/groupoid.hpp"
#include "qlens/modules.hpp"
#include "qlens/parallel.hpp"
#include "qlens/random_gen.hpp"
#include "qlens/rep.hpp"
#include "qlens/rewrite.hpp"
#include "qlens/run_config.hpp"
#include "qlens/structure.hpp"

namespace qlens {

struct CheckResult {
    std::string name;
    bool pass = false;
    double max_dev = 0.0;
    long long count = 0;
    std::string detail;
};

namespace detail {

inline std::string grid_tag(int l, double q) {
    std::ostringstream out;
    out << "l=" << l << ",q=" << q;
    return out.str();
}

inline GElement random_fin_supp(Rng& rng, int legs) {
    std::uniform_int_distribution<int> pick_count(2, 4);
    std::uniform_int_distribution<long long> pick_shift(-2, 2);
    std::uniform_int_distribution<long long> pick_p(0, 10);
    std::uniform_int_distribution<int> pick_s(1, legs);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::vector<std::pair<Morphism, Complex>> points;
    const int count = pick_count(rng);
    for (int i = 0; i < count; ++i) {
        const long long k = pick_shift(rng);
        const long long m = pick_shift(rng);
        const long long p = std::max(pick_p(rng), -m);  // keep the source level valid
        points.emplace_back(Morphism::finite(k, m, pick_s(rng), p),
                            Complex(coeff(rng), coeff(rng)));
    }
    return fin_supp(legs, points);
}

// Largest pointwise deviation over a window of morphism coordinates that
// covers the supports arising in the associativity checks.
inline double eval_grid_dev(const GElement& a, const GElement& b, int legs,
                            long long shift_window, long long depth) {
    double dev = 0.0;
    for (long long k = -shift_window; k <= shift_window; ++k)
        for (long long m = -shift_window; m <= shift_window; ++m)
            for (int s = 1; s <= legs; ++s)
                for (long long p = 0; p < depth; ++p)
                    dev = std::max(dev, std::abs(a.eval(k, m, s, p) - b.eval(k, m, s, p)));
    return dev;
}

// A textual homogeneous polynomial of the given degree: a generator power
// padded with gauge factors, plus an alternatively built second word.
inline std::string random_homogeneous_text(Rng& rng, long long degree) {
    std::uniform_int_distribution<int> pick_pad(0, 2);
    std::uniform_int_distribution<int> pick_coeff(0, 3);
    static const char* coeffs[] = {"1", "2", "i", "1/2"};
    auto word = [&](const char* letter, long long power, bool lead_pad) {
        std::string out = coeffs[pick_coeff(rng)];
        for (int j = pick_pad(rng); j > 0; --j) out += lead_pad ? " . d . d*" : " . d* . d";
        for (long long i = 0; i < power; ++i) out += std::string(" . ") + letter;
        return out;
    };
    if (degree > 0) return word("c", degree, true) + " + " + word("d*", degree, false);
    if (degree < 0) return word("c*", -degree, true) + " + " + word("d", -degree, false);
    return word("d", 0, true) + " + " + word("d*", 0, false);
}

}  // namespace detail

// 1. The defining exchange identities hold in the operator model across the
// parameter grid, away from the truncation edge.
inline CheckResult check_relations(const RunConfig& cfg) {
    CheckResult res{"relations"};
    const double tol = 1e-10;
    const int margin = 8;
    for (int l : {1, 2, 3}) {
        for (double q : {0.3, 0.5, 0.8}) {
            RepParams params{q, l, 64, cfg.W};
            for (int rule = 1; rule <= 7; ++rule) {
                const Expr diff = parse_expr(gen::relation_difference(rule, l));
                const TruncOp op = rep_expr(diff, MergedTarget{}, params);
                const TruncOp zero{op.basis};
                res.max_dev = std::max(res.max_dev, edge_safe_max_dev(op, zero, margin));
                ++res.count;
            }
        }
    }
    res.pass = res.max_dev <= tol;
    std::ostringstream detail;
    detail << res.count << " rule instances over l in {1,2,3} x q in {0.3,0.5,0.8}, "
           << "N=64, margin " << margin << ", tol " << tol;
    res.detail = detail.str();
    return res;
}

// 2. The operator model separates elements: a random polynomial's normal form
// vanishes exactly when its edge-safe operator norm is negligible.
inline CheckResult check_faithfulness(const RunConfig& cfg) {
    CheckResult res{"faithfulness"};
    const double threshold = 1e-8;
    const int margin = 8;
    const int per_cell = 200;
    long long disagreements = 0;
    int cell = 0;
    for (int l : {1, 2, 3}) {
        for (double q : {0.3, 0.5, 0.8}) {
            RepParams params{q, l, 64, cfg.W};
            std::vector<char> agree(per_cell, 0);
            std::vector<double> zero_norms(per_cell, 0.0);
            parallel_for(per_cell, [&](long long i) {
                Rng rng = sample_rng(cfg.seed, 200 + static_cast<unsigned long long>(cell),
                                     static_cast<unsigned long long>(i));
                const std::string text = gen::random_classifiable_poly(rng, l, q, 1e-6, 6, 4);
                const NormalForm nf = normalize(text, l);
                const TruncOp op = rep_expr(parse_expr(text), MergedTarget{}, params);
                const bool small = edge_safe_norm_below(op, margin, threshold);
                agree[static_cast<std::size_t>(i)] = (nf.is_zero() == small) ? 1 : 0;
                if (nf.is_zero())
                    zero_norms[static_cast<std::size_t>(i)] =
                        frobenius_norm(edge_safe_mask(op, margin).mat);
            });
            for (int i = 0; i < per_cell; ++i) {
                if (!agree[static_cast<std::size_t>(i)]) ++disagreements;
                res.max_dev = std::max(res.max_dev, zero_norms[static_cast<std::size_t>(i)]);
                ++res.count;
            }
            ++cell;
        }
    }
    res.pass = disagreements == 0;
    std::ostringstream detail;
    detail << disagreements << " disagreements in " << res.count
           << " polynomials; largest edge-safe residue of an exact zero: " << res.max_dev;
    res.detail = detail.str();
    return res;
}

// 3. The induced representation is a *-homomorphism on random finitely
// supported elements, and convolution is associative.
inline CheckResult check_groupoid_homomorphism(const RunConfig& cfg) {
    CheckResult res{"groupoid-homomorphism"};
    const double hom_tol = 1e-10;
    const double assoc_tol = 1e-12;
    const RepParams params = cfg.rep_params();
    const int trials = 100;
    std::vector<double> hom(trials, 0.0), assoc(trials, 0.0);
    parallel_for(trials, [&](long long i) {
        Rng rng = sample_rng(cfg.seed, 301, static_cast<unsigned long long>(i));
        const GElement f = detail::random_fin_supp(rng, params.l);
        const GElement g = detail::random_fin_supp(rng, params.l);
        const GElement h = detail::random_fin_supp(rng, params.l);
        const TruncOp rf = induced_rep(f, params);
        const TruncOp rg = induced_rep(g, params);
        double dev = edge_safe_max_dev(induced_rep(convolve(f, g), params), rf * rg, cfg.margin);
        dev = std::max(dev,
                       edge_safe_max_dev(induced_rep(involve(f), params), rf.adjoint(), cfg.margin));
        hom[static_cast<std::size_t>(i)] = dev;
        assoc[static_cast<std::size_t>(i)] = detail::eval_grid_dev(
            convolve(convolve(f, g), h), convolve(f, convolve(g, h)), params.l, 6, 24);
    });
    double hom_dev = 0.0, assoc_dev = 0.0;
    for (int i = 0; i < trials; ++i) {
        hom_dev = std::max(hom_dev, hom[static_cast<std::size_t>(i)]);
        assoc_dev = std::max(assoc_dev, assoc[static_cast<std::size_t>(i)]);
        ++res.count;
    }
    res.max_dev = std::max(hom_dev, assoc_dev);
    res.pass = hom_dev <= hom_tol && assoc_dev <= assoc_tol;
    std::ostringstream detail;
    detail << trials << " random pairs; homomorphism dev " << hom_dev << " (tol " << hom_tol
           << "), associativity dev " << assoc_dev << " (tol " << assoc_tol << ")";
    res.detail = detail.str();
    return res;
}

// 4. Embedding the generators into the convolution algebra and inducing back
// reproduces the operator model entry for entry.
inline CheckResult check_generator_embedding(const RunConfig& cfg) {
    CheckResult res{"generator-embedding"};
    for (int l : {1, 2, 3}) {
        RepParams params{cfg.q, l, cfg.N, cfg.W};
        res.max_dev = std::max(
            res.max_dev, max_abs_entry((induced_rep(embed_c(params), params) -
                                        merged_generator(Gen::C, params))
                                           .mat));
        res.max_dev = std::max(
            res.max_dev, max_abs_entry((induced_rep(embed_d(params), params) -
                                        merged_generator(Gen::D, params))
                                           .mat));
        res.count += 2;
    }
    res.pass = res.max_dev == 0.0;
    res.detail = "generator images compared entrywise at zero tolerance for l in {1,2,3}";
    return res;
}

// 5. The boundary restriction is a *-homomorphism onto circle polynomials
// whose kernel is exactly the decaying part, with an exact section.
inline CheckResult check_symbol_sequence(const RunConfig& cfg) {
    CheckResult res{"symbol-sequence"};
    const double mult_tol = 1e-12;
    const RepParams params = cfg.rep_params();
    const int trials = 100;
    std::vector<char> ideal_ok(trials, 0);
    std::vector<double> mult(trials, 0.0);
    parallel_for(trials, [&](long long i) {
        Rng rng = sample_rng(cfg.seed, 501, static_cast<unsigned long long>(i));
        const GElement f =
            embed_normalform(normalize(gen::random_star_poly(rng, 4, 3), params.l), params);
        const GElement g =
            embed_normalform(normalize(gen::random_star_poly(rng, 4, 3), params.l), params);
        ideal_ok[static_cast<std::size_t>(i)] =
            in_ideal(f - lift(symbol(f), params.l), 0.0) ? 1 : 0;
        mult[static_cast<std::size_t>(i)] =
            max_coeff_dev(symbol(convolve(f, g)), symbol(f) * symbol(g));
    });
    long long ideal_failures = 0;
    for (int i = 0; i < trials; ++i) {
        if (!ideal_ok[static_cast<std::size_t>(i)]) ++ideal_failures;
        res.max_dev = std::max(res.max_dev, mult[static_cast<std::size_t>(i)]);
        ++res.count;
    }
    const bool generators_exact =
        max_coeff_dev(symbol(embed_c(params)), CircleLaurent::monomial(1, Complex(1.0, 0.0))) ==
            0.0 &&
        symbol(embed_d(params)).is_zero();
    res.pass = ideal_failures == 0 && res.max_dev <= mult_tol && generators_exact;
    std::ostringstream detail;
    detail << trials << " random elements; " << ideal_failures
           << " kernel failures at zero tolerance; multiplicativity dev " << res.max_dev
           << " (tol " << mult_tol << "); generator symbols "
           << (generators_exact ? "exact" : "WRONG");
    res.detail = detail.str();
    return res;
}

// 6. Loop evaluations all carry the same boundary data: the averaged diagonal
// symbols of the one-parameter operator family match the algebraic symbol
// within the tail bound 2 q^{(N/2)l - l} at N = 64.  The (l, q) grid is
// restricted to pairs where that bound sits above double-precision noise.
inline CheckResult check_matched_symbols(const RunConfig& cfg) {
    CheckResult res{"matched-symbols"};
    const int N = 64, band = 6, deep = N / 2;
    const std::vector<std::pair<int, double>> grid = {
        {1, 0.5}, {1, 0.8}, {2, 0.8}, {3, 0.8}};
    const std::vector<Complex> loops = {Complex(1.0, 0.0), Complex(0.0, 1.0),
                                        std::polar(1.0, 0.3)};
    double worst_ratio = 0.0;
    std::string toeplitz_failure;
    int pair_index = 0;
    for (const auto& [l, q] : grid) {
        RepParams params{q, l, N, cfg.W};
        const double bound = 2.0 * std::pow(q, (deep - 1) * l);
        for (int trial = 0; trial < 8; ++trial) {
            Rng rng = sample_rng(cfg.seed, 600 + static_cast<unsigned long long>(pair_index),
                                 static_cast<unsigned long long>(trial));
            const GElement f =
                embed_normalform(normalize(gen::random_star_poly(rng, 3, 2), l), params);
            const CircleLaurent target = symbol(f);
            for (const Complex& lambda : loops) {
                for (int s = 1; s <= l; ++s) {
                    try {
                        const CircleLaurent extracted =
                            toeplitz_symbol(eval_loop(f, lambda, s, params), band, deep,
                                            32.0 * bound);
                        const double dev = max_coeff_dev(extracted, target);
                        worst_ratio = std::max(worst_ratio, dev / bound);
                    } catch (const toeplitz_error& e) {
                        toeplitz_failure = e.what();
                        worst_ratio = std::max(worst_ratio, 2.0);
                    }
                    ++res.count;
                }
            }
        }
        ++pair_index;
    }
    res.max_dev = worst_ratio;
    res.pass = worst_ratio <= 1.0 && toeplitz_failure.empty();
    std::ostringstream detail;
    detail << res.count << " extractions over {(l,q)} = {(1,0.5),(1,0.8),(2,0.8),(3,0.8)}"
           << "; worst dev/bound ratio " << worst_ratio;
    if (!toeplitz_failure.empty()) detail << "; diagonal drift: " << toeplitz_failure;
    res.detail = detail.str();
    return res;
}

// 7. The graded matrix coefficients do not depend on which diagonal of the
// window they are read from, and the pure indicator maps to the pure shift.
inline CheckResult check_window_independence(const RunConfig& cfg) {
    CheckResult res{"window-independence"};
    RepParams params{cfg.q, cfg.l, 24, 32};
    for (long long n = -3; n <= 3; ++n) {
        GElement f = n >= 0 ? gel_power(embed_c(params), n) : gel_power(embed_d(params), -n);
        f = f + Complex(0.0, 0.5) * chi_element(params.l, n);
        const TruncOp direct = rho_n(f, n, params);
        for (long long m : {0LL, 3LL}) {
            res.max_dev = std::max(
                res.max_dev, max_abs_entry((rho_via_window(f, n, m, params) - direct).mat));
            ++res.count;
        }
        // the indicator must land exactly on the shift power
        const LegsBasis basis = params.legs_basis();
        std::vector<Triplet> entries;
        for (int s = 1; s <= params.l; ++s)
            for (int p = 0; p < params.N; ++p) {
                const long long row = p - n;
                if (row < 0 || row >= params.N) continue;
                entries.emplace_back(static_cast<int>(index_of(basis, s, static_cast<int>(row))),
                                     static_cast<int>(index_of(basis, s, p)), Complex(1.0, 0.0));
            }
        const TruncOp shift = TruncOp::from_triplets(Basis{basis}, entries);
        res.max_dev = std::max(
            res.max_dev,
            max_abs_entry((rho_n(chi_element(params.l, n), n, params) - shift).mat));
        ++res.count;
    }
    res.pass = res.max_dev == 0.0;
    res.detail = "graded matrices for n in [-3,3] at window offsets m in {0,3}, exact equality";
    return res;
}

// 8. The invariant classifies: every admissible invariant survives the
// canonical-form round trip, and direct sums add invariants.
inline CheckResult check_classification(const RunConfig& cfg) {
    CheckResult res{"classification"};
    const int N = 8;
    const double tol = 1e-9;
    long long failures = 0;
    for (int l = 1; l <= 3; ++l) {
        for (int rho = 0; rho <= 3; ++rho) {
            const long long lo = rho == 0 ? 0 : -4;
            std::vector<long long> t(static_cast<std::size_t>(l), lo);
            while (true) {
                const KInvariant inv{rho, t};
                if (!(k_invariant(canonical_projection(inv, l, N), tol) == inv)) ++failures;
                ++res.count;
                int pos = 0;
                while (pos < l && t[static_cast<std::size_t>(pos)] == 4) {
                    t[static_cast<std::size_t>(pos)] = lo;
                    ++pos;
                }
                if (pos == l) break;
                ++t[static_cast<std::size_t>(pos)];
            }
        }
    }
    Rng rng = sample_rng(cfg.seed, 801, 0);
    std::uniform_int_distribution<int> pick_rho(0, 3);
    std::uniform_int_distribution<long long> pick_t(-4, 4);
    for (int trial = 0; trial < 50; ++trial) {
        const int l = 2;
        KInvariant a{pick_rho(rng), {}}, b{pick_rho(rng), {}};
        for (int s = 0; s < l; ++s) {
            a.t.push_back(a.rho == 0 ? std::llabs(pick_t(rng)) : pick_t(rng));
            b.t.push_back(b.rho == 0 ? std::llabs(pick_t(rng)) : pick_t(rng));
        }
        KInvariant expected{a.rho + b.rho, {}};
        for (int s = 0; s < l; ++s)
            expected.t.push_back(a.t[static_cast<std::size_t>(s)] +
                                 b.t[static_cast<std::size_t>(s)]);
        const ProjectionRep sum = direct_sum(canonical_projection(a, l, N),
                                             canonical_projection(b, l, N));
        if (!(k_invariant(sum, tol) == expected)) ++failures;
        ++res.count;
    }
    res.pass = failures == 0;
    std::ostringstream detail;
    detail << res.count << " invariants (full range rho <= 3, |t| <= 4, l <= 3, plus 50 "
           << "direct sums); " << failures << " mismatches";
    res.detail = detail.str();
    return res;
}

// 9. Every winding is realized by a projection with invariant (1; n,...,n),
// the explicit module isomorphism verifies by sampling, and the first
// nontrivial bundle is certified non-free.
inline CheckResult check_line_bundles(const RunConfig& cfg) {
    CheckResult res{"line-bundles"};
    const int N = 32;
    const double tol = 1e-9;
    struct Cell {
        bool ok = true;
        double dev = 0.0;
    };
    std::vector<Cell> cells(27);
    parallel_for(27, [&](long long idx) {
        const int l = static_cast<int>(idx / 9) + 1;
        const long long n = idx % 9 - 4;
        RepParams params{cfg.q, l, N, cfg.W};
        Cell cell;
        const KInvariant expected{1, std::vector<long long>(static_cast<std::size_t>(l), n)};
        cell.ok = k_invariant(line_bundle_projection(n, l, N), tol) == expected;
        const IsoReport iso = verify_line_bundle_iso(n, params, cfg.samples, tol, cfg.seed);
        cell.ok = cell.ok && iso.pass;
        cell.dev = iso.max_dev;
        cells[static_cast<std::size_t>(idx)] = cell;
    });
    bool all_ok = true;
    for (const Cell& cell : cells) {
        all_ok = all_ok && cell.ok;
        res.max_dev = std::max(res.max_dev, cell.dev);
        ++res.count;
    }
    bool non_free = true;
    for (int l = 1; l <= 3; ++l)
        non_free = non_free && !is_isomorphic(line_bundle_projection(1, l, N),
                                              ProjectionRep::identity(l, N, 1), tol);
    res.pass = all_ok && non_free;
    std::ostringstream detail;
    detail << "n in [-4,4] x l in {1,2,3}, " << cfg.samples
           << " samples each; worst witness dev " << res.max_dev << "; winding-one bundle "
           << (non_free ? "certified non-free" : "NOT distinguished from the free module");
    res.detail = detail.str();
    return res;
}

// 10. Degrees add under convolution, and each graded piece lands in its
// operator model: compact corner plus the boundary coefficient on the shift.
inline CheckResult check_degree_structure(const RunConfig& cfg) {
    CheckResult res{"degree-structure"};
    const double grading_tol = 1e-12;
    RepParams params{cfg.q, cfg.l, 32, cfg.W};
    const int trials = 100;
    std::vector<double> devs(trials, 0.0);
    parallel_for(trials, [&](long long i) {
        Rng rng = sample_rng(cfg.seed, 1001, static_cast<unsigned long long>(i));
        const GElement f =
            embed_normalform(normalize(gen::random_star_poly(rng, 4, 2), params.l), params);
        const GElement g =
            embed_normalform(normalize(gen::random_star_poly(rng, 4, 2), params.l), params);
        const GElement product = convolve(f, g);
        std::set<long long> fdeg, gdeg;
        for (const auto& [key, layer] : f.layers()) fdeg.insert(layer_degree(key));
        for (const auto& [key, layer] : g.layers()) gdeg.insert(layer_degree(key));
        GElement rebuilt(params.l, {});
        double dev = 0.0;
        for (long long a : fdeg) {
            for (long long b : gdeg) {
                const GElement piece = convolve(degree_component(f, a), degree_component(g, b));
                if (!is_homogeneous(piece, a + b)) dev = std::max(dev, 1.0);
                rebuilt = rebuilt + piece;
            }
        }
        dev = std::max(dev, detail::eval_grid_dev(product, rebuilt, params.l, 8, 20));
        devs[static_cast<std::size_t>(i)] = dev;
    });
    for (int i = 0; i < trials; ++i) {
        res.max_dev = std::max(res.max_dev, devs[static_cast<std::size_t>(i)]);
        ++res.count;
    }
    const bool grading_ok = res.max_dev <= grading_tol;

    // graded pieces against their operator models
    double worst_ratio = 0.0;
    const int split = 16;
    for (long long n = -3; n <= 3; ++n) {
        Rng rng = sample_rng(cfg.seed, 1002, static_cast<unsigned long long>(n + 8));
        const NormalForm x = normalize(detail::random_homogeneous_text(rng, n), params.l);
        const GElement f = embed_normalform(x, params);
        if (!is_homogeneous(f, n)) {
            worst_ratio = std::max(worst_ratio, 2.0);
            continue;
        }
        const Complex coefficient = symbol(f).coeff(n);
        const TruncOp model = rho_n(chi_element(params.l, n), n, params);
        const TruncOp residue = rho_n(f, n, params) - coefficient * model;
        double bound = 0.0;
        for (const auto& [key, layer] : f.layers()) {
            const long long exponent =
                std::max<long long>(split - std::max<long long>(key.second, 0), 0);
            bound += layer.decay().C * std::pow(layer.decay().r, static_cast<double>(exponent));
        }
        const double far = far_from_compact(residue, split);
        const double allowance = bound * (1.0 + 1e-9) + 1e-15;
        worst_ratio = std::max(worst_ratio, allowance > 0.0 ? far / allowance : 2.0);
        ++res.count;
    }
    res.pass = grading_ok && worst_ratio <= 1.0;
    std::ostringstream detail;
    detail << trials << " product gradings (dev " << res.max_dev << ", tol " << grading_tol
           << "); graded pieces vs operator models: worst residue/bound ratio " << worst_ratio;
    res.detail = detail.str();
    return res;
}

inline std::vector<CheckResult> run_all_checks(const RunConfig& cfg) {
    return {check_relations(cfg),        check_faithfulness(cfg),
            check_groupoid_homomorphism(cfg), check_generator_embedding(cfg),
            check_symbol_sequence(cfg),  check_matched_symbols(cfg),
            check_window_independence(cfg), check_classification(cfg),
            check_line_bundles(cfg),     check_degree_structure(cfg)};
}

}  // namespace qlens
