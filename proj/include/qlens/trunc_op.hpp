#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qlens/basis.hpp"
#include "qlens/errors.hpp"
#include "qlens/scalars.hpp"

namespace qlens {

using SpMat = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;

// A finite window of an operator, tagged with the basis it is expressed in.
// Stored sparse: every operator this library produces is a short sum of
// weighted shifts, so density never pays off even at the largest windows.
struct TruncOp {
    Basis basis;
    SpMat mat;

    TruncOp() = default;
    explicit TruncOp(Basis b) : basis(std::move(b)) {
        long n = dim(basis);
        mat = SpMat(n, n);
    }
    TruncOp(Basis b, SpMat m) : basis(std::move(b)), mat(std::move(m)) {}

    long size() const { return dim(basis); }

    TruncOp adjoint() const {
        SpMat a = mat.adjoint();
        return {basis, std::move(a)};
    }

    static TruncOp identity(const Basis& b) {
        TruncOp out(b);
        out.mat.setIdentity();
        return out;
    }
    static TruncOp from_triplets(const Basis& b, const std::vector<Triplet>& entries) {
        TruncOp out(b);
        out.mat.setFromTriplets(entries.begin(), entries.end());
        return out;
    }
};

namespace detail {
inline void require_same_basis(const TruncOp& a, const TruncOp& b) {
    if (!(a.basis == b.basis))
        throw domain_error("operators live in different truncated bases: " +
                           to_string(a.basis) + " vs " + to_string(b.basis));
}
}  // namespace detail

inline TruncOp operator+(const TruncOp& a, const TruncOp& b) {
    detail::require_same_basis(a, b);
    return {a.basis, SpMat(a.mat + b.mat)};
}
inline TruncOp operator-(const TruncOp& a, const TruncOp& b) {
    detail::require_same_basis(a, b);
    return {a.basis, SpMat(a.mat - b.mat)};
}
inline TruncOp operator*(const TruncOp& a, const TruncOp& b) {
    detail::require_same_basis(a, b);
    SpMat prod = (a.mat * b.mat).pruned(0.0);
    return {a.basis, std::move(prod)};
}
inline TruncOp operator*(const Complex& z, const TruncOp& a) { return {a.basis, SpMat(z * a.mat)}; }

// Largest entry magnitude and Frobenius norm; both bound the operator norm
// (from below resp. above) and are exact to machine precision.
inline double max_abs_entry(const SpMat& m) {
    double best = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
    return best;
}
inline double frobenius_norm(const SpMat& m) {
    double acc = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) acc += std::norm(it.value());
    return std::sqrt(acc);
}

namespace detail {

// Power iteration on A*A with a deterministic start vector.  Accurate far
// beyond the tolerances used anywhere in the library; dense SVD handles the
// small windows where clustered spectra would slow convergence.
inline double sparse_operator_norm(const SpMat& a) {
    const long n = a.cols();
    if (n == 0 || a.nonZeros() == 0) return 0.0;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXcd v(n);
    for (long i = 0; i < n; ++i) v[i] = Complex(unit(rng), unit(rng));
    v.normalize();
    double sigma = 0.0;
    int stable = 0;
    for (int iter = 0; iter < 5000; ++iter) {
        Eigen::VectorXcd w = a * v;
        double estimate = w.norm();
        if (estimate == 0.0) return 0.0;
        v = a.adjoint() * w;
        double vn = v.norm();
        if (vn == 0.0) return estimate;
        v /= vn;
        if (std::abs(estimate - sigma) <= 1e-13 * std::max(estimate, 1e-300)) {
            if (++stable >= 4) return estimate;
        } else {
            stable = 0;
        }
        sigma = estimate;
    }
    return sigma;
}

}  // namespace detail

// Operator norm (largest singular value) of the truncated window.
inline double op_norm(const TruncOp& a) {
    const long n = a.size();
    if (a.mat.nonZeros() == 0) return 0.0;
    if (n <= 768) {
        Eigen::MatrixXcd dense(a.mat);
        return dense.jacobiSvd().singularValues()(0);
    }
    return detail::sparse_operator_norm(a.mat);
}

// Zeroes every entry with a row or column outside the edge-safe region.
inline TruncOp edge_safe_mask(const TruncOp& a, int margin) {
    require_usable_margin(a.basis, margin);
    const long n = a.size();
    std::vector<char> safe(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) safe[static_cast<std::size_t>(i)] = edge_safe(a.basis, i, margin);
    std::vector<Triplet> kept;
    kept.reserve(static_cast<std::size_t>(a.mat.nonZeros()));
    for (int k = 0; k < a.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(a.mat, k); it; ++it)
            if (safe[static_cast<std::size_t>(it.row())] && safe[static_cast<std::size_t>(it.col())])
                kept.emplace_back(it.row(), it.col(), it.value());
    return TruncOp::from_triplets(a.basis, kept);
}

// Largest deviation between two operators over the edge-safe region.
inline double edge_safe_max_dev(const TruncOp& a, const TruncOp& b, int margin) {
    detail::require_same_basis(a, b);
    TruncOp diff = edge_safe_mask(a - b, margin);
    return max_abs_entry(diff.mat);
}

inline bool edge_safe_equal(const TruncOp& a, const TruncOp& b, int margin, double tol) {
    return edge_safe_max_dev(a, b, margin) <= tol;
}

// Classifies whether the edge-safe window of `a` has operator norm below
// `threshold`.  Uses the max-entry / Frobenius bracket, falling back to the
// norm itself only when the bracket straddles the threshold.
inline bool edge_safe_norm_below(const TruncOp& a, int margin, double threshold) {
    TruncOp masked = edge_safe_mask(a, margin);
    double lower = max_abs_entry(masked.mat);
    if (lower >= threshold) return false;
    double upper = frobenius_norm(masked.mat);
    if (upper < threshold) return true;
    return op_norm(masked) < threshold;
}

}  // namespace qlens
