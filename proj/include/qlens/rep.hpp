#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "qlens/basis.hpp"
#include "qlens/errors.hpp"
#include "qlens/expr.hpp"
#include "qlens/normal_form.hpp"
#include "qlens/trunc_op.hpp"

namespace qlens {

// Numeric truncation parameters shared by every operator model.
struct RepParams {
    double q = 0.5;
    int l = 2;
    int N = 64;
    int W = 16;

    void validate() const {
        if (!(q > 0.0 && q < 1.0)) throw config_error("q must lie in the open interval (0,1)");
        if (l < 1) throw config_error("l must be >= 1");
        if (N < 8) throw config_error("N must be >= 8");
        if (W < 4) throw config_error("W must be >= 4");
    }

    IrrepBasis irrep_basis(int s) const {
        if (s < 1 || s > l) throw domain_error("leg index s out of range");
        return {s, N};
    }
    LegsBasis legs_basis() const { return {l, N}; }
    MergedBasis merged_basis() const { return {l, W, N}; }
};

// The single numeric source for the shift weights and diagonal eigenvalues;
// every model (and the groupoid embedding) calls these, which is what makes
// cross-model entry comparisons exact rather than approximate.
inline double shift_weight(double q, int l, int p, int s) {
    if (p <= 0) return 0.0;  // the bottom level is annihilated
    double acc = 1.0;
    for (int m = 1; m <= l; ++m) {
        double e = 2.0 * (static_cast<double>(p) * l + s - m);
        acc *= std::sqrt(1.0 - std::pow(q, e));
    }
    return acc;
}

inline double level_eigenvalue(double q, int l, int p, int s) {
    return std::pow(q, static_cast<double>(p) * l + s);
}

namespace detail {
inline void require_phase(const Complex& lambda) {
    if (std::abs(std::abs(lambda) - 1.0) > 1e-12)
        throw domain_error("the loop parameter must lie on the unit circle");
}
}  // namespace detail

// Generator images in a single-leg irreducible model: the first generator is
// a backward weighted shift e_p -> w_p e_{p-1} (annihilating e_0), the second
// the diagonal operator lambda q^{pl+s}.
inline TruncOp irrep_generator(Gen g, const RepParams& params, int s,
                               Complex lambda = Complex(1.0, 0.0)) {
    params.validate();
    detail::require_phase(lambda);
    IrrepBasis basis = params.irrep_basis(s);
    std::vector<Triplet> entries;
    if (g == Gen::C) {
        for (int p = 1; p < params.N; ++p)
            entries.emplace_back(p - 1, p, Complex(shift_weight(params.q, params.l, p, s), 0.0));
    } else {
        for (int p = 0; p < params.N; ++p)
            entries.emplace_back(p, p, lambda * level_eigenvalue(params.q, params.l, p, s));
    }
    return TruncOp::from_triplets(Basis(basis), entries);
}

// Generator images on the merged space: the shift acts within each winding
// level, the diagonal generator additionally lowers the winding index.
inline TruncOp merged_generator(Gen g, const RepParams& params) {
    params.validate();
    MergedBasis basis = params.merged_basis();
    std::vector<Triplet> entries;
    for (int t = -params.W; t <= params.W; ++t) {
        for (int s = 1; s <= params.l; ++s) {
            if (g == Gen::C) {
                for (int p = 1; p < params.N; ++p)
                    entries.emplace_back(index_of(basis, t, s, p - 1), index_of(basis, t, s, p),
                                         Complex(shift_weight(params.q, params.l, p, s), 0.0));
            } else if (t - 1 >= -params.W) {
                for (int p = 0; p < params.N; ++p)
                    entries.emplace_back(index_of(basis, t - 1, s, p), index_of(basis, t, s, p),
                                         Complex(level_eigenvalue(params.q, params.l, p, s), 0.0));
            }
        }
    }
    return TruncOp::from_triplets(Basis(basis), entries);
}

// Where an operator image should be built.
struct IrrepTarget {
    int s = 1;
    Complex lambda{1.0, 0.0};
};
struct MergedTarget {};
using RepTarget = std::variant<IrrepTarget, MergedTarget>;

namespace detail {

struct GeneratorImages {
    TruncOp c, d;
};

inline GeneratorImages generator_images(const RepTarget& target, const RepParams& params) {
    if (const auto* irrep = std::get_if<IrrepTarget>(&target)) {
        return {irrep_generator(Gen::C, params, irrep->s, irrep->lambda),
                irrep_generator(Gen::D, params, irrep->s, irrep->lambda)};
    }
    return {merged_generator(Gen::C, params), merged_generator(Gen::D, params)};
}

inline TruncOp op_power(const TruncOp& base, long long n) {
    TruncOp acc = TruncOp::identity(base.basis);
    for (long long i = 0; i < n; ++i) acc = acc * base;
    return acc;
}

}  // namespace detail

// Image of an ordered-form element under the chosen model.
inline TruncOp rep_normalform(const NormalForm& nf, const RepTarget& target,
                              const RepParams& params) {
    params.validate();
    if (nf.l() != params.l) throw domain_error("normal form and parameters disagree on l");
    detail::GeneratorImages gens = detail::generator_images(target, params);
    TruncOp acc(gens.c.basis);
    for (const auto& [mono, coeff] : nf.terms()) {
        TruncOp word = TruncOp::identity(acc.basis);
        if (mono.c_pow >= 0)
            word = word * detail::op_power(gens.c, mono.c_pow);
        else
            word = word * detail::op_power(gens.c.adjoint(), -mono.c_pow);
        if (mono.d_pow > 0) word = word * detail::op_power(gens.d, mono.d_pow);
        if (mono.ds_pow > 0) word = word * detail::op_power(gens.d.adjoint(), mono.ds_pow);
        acc = acc + coeff.eval(params.q) * word;
    }
    return acc;
}

// Image of a raw expression tree, evaluated node by node in operator
// arithmetic.  Deliberately bypasses the rewriting engine so the two paths
// can serve as independent checks of one another.
inline TruncOp rep_expr(const Expr& e, const RepTarget& target, const RepParams& params) {
    params.validate();
    detail::GeneratorImages gens = detail::generator_images(target, params);
    struct Visitor {
        const detail::GeneratorImages& gens;
        const RepParams& params;
        TruncOp run(const Expr& node) const {
            return std::visit([&](const auto& payload) { return (*this)(payload); }, node->payload);
        }
        TruncOp operator()(const ExprNode::Scalar& s) const {
            return s.value.eval(params.q) * TruncOp::identity(gens.c.basis);
        }
        TruncOp operator()(const ExprNode::Generator& g) const {
            return g.g == Gen::C ? gens.c : gens.d;
        }
        TruncOp operator()(const ExprNode::Adjoint& a) const { return run(a.child).adjoint(); }
        TruncOp operator()(const ExprNode::Product& p) const { return run(p.lhs) * run(p.rhs); }
        TruncOp operator()(const ExprNode::Sum& s) const {
            TruncOp lhs = run(s.lhs);
            TruncOp rhs = run(s.rhs);
            return s.subtract ? lhs - rhs : lhs + rhs;
        }
        TruncOp operator()(const ExprNode::Power& p) const {
            return detail::op_power(run(p.base), p.exponent);
        }
    };
    return Visitor{gens, params}.run(e);
}

}  // namespace qlens
