#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "qlens/errors.hpp"
#include "qlens/gelement.hpp"
#include "qlens/random_gen.hpp"
#include "qlens/rep.hpp"
#include "qlens/trunc_op.hpp"

namespace qlens {

using DenseMat = Eigen::MatrixXcd;

// Element of the unitized compact-block algebra: a global scalar plus one
// compact (truncated) correction block per leg.  The product follows the
// unitization rule (a + λ)(b + μ) = (ab + λb + μa) + λμ blockwise.
struct UnitizedElement {
    Complex scalar{0.0, 0.0};
    std::vector<DenseMat> legs;

    static UnitizedElement zero(int l, int N) {
        UnitizedElement out;
        out.legs.assign(static_cast<std::size_t>(l), DenseMat::Zero(N, N));
        return out;
    }

    static UnitizedElement unit(int l, int N) {
        UnitizedElement out = zero(l, N);
        out.scalar = Complex(1.0, 0.0);
        return out;
    }

    int leg_count() const { return static_cast<int>(legs.size()); }
    int levels() const { return legs.empty() ? 0 : static_cast<int>(legs.front().rows()); }
};

namespace detail {
inline void require_same_shape(const UnitizedElement& a, const UnitizedElement& b) {
    if (a.leg_count() != b.leg_count() || a.levels() != b.levels())
        throw domain_error("unitized elements have different shapes");
}
}  // namespace detail

inline UnitizedElement operator+(const UnitizedElement& a, const UnitizedElement& b) {
    detail::require_same_shape(a, b);
    UnitizedElement out = a;
    out.scalar += b.scalar;
    for (std::size_t s = 0; s < out.legs.size(); ++s) out.legs[s] += b.legs[s];
    return out;
}

inline UnitizedElement operator-(const UnitizedElement& a, const UnitizedElement& b) {
    detail::require_same_shape(a, b);
    UnitizedElement out = a;
    out.scalar -= b.scalar;
    for (std::size_t s = 0; s < out.legs.size(); ++s) out.legs[s] -= b.legs[s];
    return out;
}

inline UnitizedElement operator*(const UnitizedElement& a, const UnitizedElement& b) {
    detail::require_same_shape(a, b);
    UnitizedElement out = UnitizedElement::zero(a.leg_count(), a.levels());
    out.scalar = a.scalar * b.scalar;
    for (std::size_t s = 0; s < out.legs.size(); ++s)
        out.legs[s] = a.legs[s] * b.legs[s] + a.scalar * b.legs[s] + b.scalar * a.legs[s];
    return out;
}

inline UnitizedElement operator*(Complex z, const UnitizedElement& a) {
    UnitizedElement out = a;
    out.scalar *= z;
    for (auto& leg : out.legs) leg *= z;
    return out;
}

inline UnitizedElement adjoint(const UnitizedElement& a) {
    UnitizedElement out = a;
    out.scalar = std::conj(a.scalar);
    for (std::size_t s = 0; s < out.legs.size(); ++s) out.legs[s] = a.legs[s].adjoint();
    return out;
}

// Norm of the represented operator: on each leg the element acts as
// scalar·I + block on an infinite space, so the scalar survives as a lower
// bound however the truncated block tries to cancel it.
inline double unitized_norm(const UnitizedElement& a) {
    double norm = std::abs(a.scalar);
    const int N = a.levels();
    for (const auto& leg : a.legs) {
        DenseMat full = leg + a.scalar * DenseMat::Identity(N, N);
        norm = std::max(norm, full.operatorNorm());
    }
    return norm;
}

// A matrix of unitized elements presenting a finitely generated projective
// module as the image of a projection.
struct ProjectionRep {
    int l = 1;
    int N = 0;
    int r = 0;
    std::vector<std::vector<UnitizedElement>> entries;

    static ProjectionRep zero(int l, int N, int r) {
        ProjectionRep out;
        out.l = l;
        out.N = N;
        out.r = r;
        out.entries.assign(static_cast<std::size_t>(r),
                           std::vector<UnitizedElement>(static_cast<std::size_t>(r),
                                                        UnitizedElement::zero(l, N)));
        return out;
    }

    static ProjectionRep identity(int l, int N, int r) {
        ProjectionRep out = zero(l, N, r);
        for (int i = 0; i < r; ++i) out.entries[static_cast<std::size_t>(i)]
                                        [static_cast<std::size_t>(i)] =
            UnitizedElement::unit(l, N);
        return out;
    }
};

namespace detail {
inline void require_same_algebra(const ProjectionRep& a, const ProjectionRep& b) {
    if (a.l != b.l || a.N != b.N)
        throw domain_error("projections live over different truncated algebras");
}
}  // namespace detail

inline ProjectionRep mat_mul(const ProjectionRep& a, const ProjectionRep& b) {
    detail::require_same_algebra(a, b);
    if (a.r != b.r) throw domain_error("projection matrix sizes differ");
    ProjectionRep out = ProjectionRep::zero(a.l, a.N, a.r);
    for (int i = 0; i < a.r; ++i) {
        for (int j = 0; j < a.r; ++j) {
            UnitizedElement acc = UnitizedElement::zero(a.l, a.N);
            for (int k = 0; k < a.r; ++k)
                acc = acc + a.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                                b.entries[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            out.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
        }
    }
    return out;
}

inline ProjectionRep mat_adjoint(const ProjectionRep& a) {
    ProjectionRep out = ProjectionRep::zero(a.l, a.N, a.r);
    for (int i = 0; i < a.r; ++i)
        for (int j = 0; j < a.r; ++j)
            out.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                adjoint(a.entries[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
    return out;
}

inline ProjectionRep direct_sum(const ProjectionRep& a, const ProjectionRep& b) {
    detail::require_same_algebra(a, b);
    ProjectionRep out = ProjectionRep::zero(a.l, a.N, a.r + b.r);
    for (int i = 0; i < a.r; ++i)
        for (int j = 0; j < a.r; ++j)
            out.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                a.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    for (int i = 0; i < b.r; ++i)
        for (int j = 0; j < b.r; ++j)
            out.entries[static_cast<std::size_t>(a.r + i)][static_cast<std::size_t>(a.r + j)] =
                b.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return out;
}

inline double max_entry_norm(const ProjectionRep& a) {
    double norm = 0.0;
    for (const auto& row : a.entries)
        for (const auto& e : row) norm = std::max(norm, unitized_norm(e));
    return norm;
}

struct ProjectionReport {
    double idempotent_dev = 0.0;
    double adjoint_dev = 0.0;
    double scalar_dev = 0.0;
    bool pass = false;
};

// Checks P² = P, P* = P, and idempotency of the r×r scalar-part matrix.
inline ProjectionReport verify_projection(const ProjectionRep& P, double tol) {
    ProjectionReport report;
    const ProjectionRep sq = mat_mul(P, P);
    const ProjectionRep adj = mat_adjoint(P);
    for (int i = 0; i < P.r; ++i) {
        for (int j = 0; j < P.r; ++j) {
            const auto& e = P.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            report.idempotent_dev = std::max(
                report.idempotent_dev,
                unitized_norm(sq.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - e));
            report.adjoint_dev = std::max(
                report.adjoint_dev,
                unitized_norm(adj.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - e));
        }
    }
    DenseMat scalar(P.r, P.r);
    for (int i = 0; i < P.r; ++i)
        for (int j = 0; j < P.r; ++j)
            scalar(i, j) = P.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].scalar;
    report.scalar_dev = (scalar * scalar - scalar).operatorNorm();
    report.pass = report.idempotent_dev < tol && report.adjoint_dev < tol &&
                  report.scalar_dev < tol;
    return report;
}

// Complete isomorphism invariant: the free rank rho plus one compact index per
// leg.  A zero free rank forces nonnegative indices (there is nothing to
// subtract a kernel from).
struct KInvariant {
    int rho = 0;
    std::vector<long long> t;

    friend bool operator==(const KInvariant&, const KInvariant&) = default;
};

inline std::string to_string(const KInvariant& inv) {
    std::string out = "(" + std::to_string(inv.rho) + ";";
    for (std::size_t s = 0; s < inv.t.size(); ++s)
        out += (s == 0 ? " " : ",") + std::to_string(inv.t[s]);
    return out + ")";
}

namespace detail {

inline long long round_checked(double re, double im, double tol, const char* what) {
    const double rounded = std::nearbyint(re);
    if (std::abs(re - rounded) > tol || std::abs(im) > tol)
        throw invariant_error(std::string(what) + " trace is not integral: residue " +
                              std::to_string(std::max(std::abs(re - rounded), std::abs(im))));
    return static_cast<long long>(rounded);
}

}  // namespace detail

// The invariant of a projection: rho is the trace of the scalar part, and t_s
// sums the diagonal compact-correction traces on leg s.  Computing t_s from
// the corrections directly (rather than as a difference of large traces)
// keeps the window size out of the arithmetic.
inline KInvariant k_invariant(const ProjectionRep& P, double tol) {
    Complex scalar_trace(0.0, 0.0);
    for (int i = 0; i < P.r; ++i)
        scalar_trace += P.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)].scalar;
    KInvariant inv;
    const long long rho =
        detail::round_checked(scalar_trace.real(), scalar_trace.imag(), tol, "scalar");
    if (rho < 0) throw invariant_error("negative free rank: input is not a projection");
    inv.rho = static_cast<int>(rho);
    for (int s = 0; s < P.l; ++s) {
        Complex leg_trace(0.0, 0.0);
        for (int i = 0; i < P.r; ++i)
            leg_trace +=
                P.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)].legs[static_cast<std::size_t>(s)]
                    .trace();
        inv.t.push_back(detail::round_checked(leg_trace.real(), leg_trace.imag(), tol, "leg"));
    }
    if (inv.rho == 0) {
        for (long long ts : inv.t)
            if (ts < 0)
                throw invariant_error("zero free rank with negative leg index " +
                                      to_string(inv));
    }
    return inv;
}

namespace detail {

// Rank-k level projection: 1 on the first k levels.
inline DenseMat level_projection(int N, long long k) {
    DenseMat out = DenseMat::Zero(N, N);
    for (long long p = 0; p < k; ++p) out(p, p) = Complex(1.0, 0.0);
    return out;
}

}  // namespace detail

// Canonical representative of an invariant: a diagonal block projection
// I_{rho-1} ⊕ (I − ⊕_s P_{n_s}) ⊕ (⊕_s P_{m_s}) with n_s = max(-t_s, 0) and
// m_s = max(t_s, 0), shrunk to ⊕_s P_{t_s} when the free rank is zero and to
// the bare identity I_rho when every index vanishes.
inline ProjectionRep canonical_projection(const KInvariant& inv, int l, int N) {
    if (l < 1 || static_cast<int>(inv.t.size()) != l)
        throw invariant_error("invariant has the wrong number of legs");
    if (inv.rho < 0) throw invariant_error("negative free rank");
    long long max_abs = 0;
    for (long long ts : inv.t) {
        if (inv.rho == 0 && ts < 0)
            throw invariant_error("zero free rank requires nonnegative leg indices");
        max_abs = std::max(max_abs, std::llabs(ts));
    }
    if (max_abs >= N)
        throw truncation_error("leg index " + std::to_string(max_abs) +
                               " does not fit below truncation " + std::to_string(N));

    if (inv.rho == 0) {
        ProjectionRep out = ProjectionRep::zero(l, N, 1);
        for (int s = 0; s < l; ++s)
            out.entries[0][0].legs[static_cast<std::size_t>(s)] =
                detail::level_projection(N, inv.t[static_cast<std::size_t>(s)]);
        return out;
    }

    const bool all_zero =
        std::all_of(inv.t.begin(), inv.t.end(), [](long long ts) { return ts == 0; });
    if (all_zero) return ProjectionRep::identity(l, N, inv.rho);

    ProjectionRep out = ProjectionRep::zero(l, N, inv.rho + 1);
    for (int i = 0; i + 1 < inv.rho; ++i)
        out.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] =
            UnitizedElement::unit(l, N);
    UnitizedElement& hole = out.entries[static_cast<std::size_t>(inv.rho - 1)]
                                       [static_cast<std::size_t>(inv.rho - 1)];
    hole = UnitizedElement::unit(l, N);
    UnitizedElement& excess =
        out.entries[static_cast<std::size_t>(inv.rho)][static_cast<std::size_t>(inv.rho)];
    for (int s = 0; s < l; ++s) {
        const long long ts = inv.t[static_cast<std::size_t>(s)];
        if (ts < 0)
            hole.legs[static_cast<std::size_t>(s)] -= detail::level_projection(N, -ts);
        else
            excess.legs[static_cast<std::size_t>(s)] = detail::level_projection(N, ts);
    }
    return out;
}

inline bool is_isomorphic(const ProjectionRep& P, const ProjectionRep& Q, double tol) {
    return k_invariant(P, tol) == k_invariant(Q, tol);
}

// The projection presenting the degree-n line bundle: I₁ ⊕ (⊕_s P_n) for
// n ≥ 0 (shrunk to I₁ at n = 0) and I − (⊕_s P_{|n|}) for n < 0.  Its
// invariant is (1; n, …, n) — the index relation between winding and rank.
inline ProjectionRep line_bundle_projection(long long n, int l, int N) {
    if (std::llabs(n) >= N)
        throw truncation_error("winding " + std::to_string(n) +
                               " does not fit below truncation " + std::to_string(N));
    if (n == 0) return ProjectionRep::identity(l, N, 1);
    if (n > 0) {
        ProjectionRep out = ProjectionRep::zero(l, N, 2);
        out.entries[0][0] = UnitizedElement::unit(l, N);
        for (int s = 0; s < l; ++s)
            out.entries[1][1].legs[static_cast<std::size_t>(s)] =
                detail::level_projection(N, n);
        return out;
    }
    ProjectionRep out = ProjectionRep::zero(l, N, 1);
    out.entries[0][0] = UnitizedElement::unit(l, N);
    for (int s = 0; s < l; ++s)
        out.entries[0][0].legs[static_cast<std::size_t>(s)] -=
            detail::level_projection(N, -n);
    return out;
}

// Conjugates every entry by one random unitary of the unitized algebra
// (scalar phase times a compactly supported rotation), which must not change
// the invariant.
inline ProjectionRep conjugate_by_random_unitary(const ProjectionRep& P, Rng& rng,
                                                 int support) {
    const int block = std::min(support, P.N);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    const Complex phase = std::polar(1.0, angle(rng));
    UnitizedElement u = UnitizedElement::zero(P.l, P.N);
    u.scalar = phase;
    for (int s = 0; s < P.l; ++s) {
        DenseMat h = DenseMat::Zero(P.N, P.N);
        for (int i = 0; i < block; ++i) {
            for (int j = 0; j <= i; ++j) {
                const Complex v(angle(rng), i == j ? 0.0 : angle(rng));
                h(i, j) = v;
                h(j, i) = std::conj(v);
            }
        }
        Eigen::SelfAdjointEigenSolver<DenseMat> eig(h);
        DenseMat rotated = DenseMat::Zero(P.N, P.N);
        for (int i = 0; i < P.N; ++i)
            rotated += std::polar(1.0, eig.eigenvalues()[i]) * eig.eigenvectors().col(i) *
                       eig.eigenvectors().col(i).adjoint();
        u.legs[static_cast<std::size_t>(s)] = phase * (rotated - DenseMat::Identity(P.N, P.N));
    }
    const UnitizedElement ustar = adjoint(u);
    ProjectionRep out = ProjectionRep::zero(P.l, P.N, P.r);
    for (int i = 0; i < P.r; ++i)
        for (int j = 0; j < P.r; ++j)
            out.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                ustar * P.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * u;
    return out;
}

// --- the operator model of the degree-n module --------------------------------

// Ambient data for the image of the degree-n component under rho_n: compact
// operators plus the scalar line through the pure shift power T.
struct ModuleModel {
    long long n = 0;
    TruncOp T;  // ⊕_s S^n for n >= 0, ⊕_s (S*)^{|n|} for n < 0
    TruncOp P;  // ⊕_s P_{|n|}, the defect projection of T
};

inline ModuleModel line_bundle_model(long long n, const RepParams& params) {
    params.validate();
    if (std::llabs(n) >= params.N)
        throw truncation_error("winding does not fit below truncation");
    ModuleModel model;
    model.n = n;
    model.T = rho_n(chi_element(params.l, n), n, params);
    const LegsBasis basis = params.legs_basis();
    std::vector<Triplet> entries;
    for (int s = 1; s <= params.l; ++s)
        for (long long p = 0; p < std::llabs(n); ++p)
            entries.emplace_back(static_cast<int>(index_of(basis, s, static_cast<int>(p))),
                                 static_cast<int>(index_of(basis, s, static_cast<int>(p))),
                                 Complex(1.0, 0.0));
    model.P = TruncOp::from_triplets(Basis{basis}, entries);
    return model;
}

// Largest entry magnitude outside the square of levels below `split` — the
// residue of an operator that is supposed to be compact-supported.
inline double far_from_compact(const TruncOp& A, int split) {
    double worst = 0.0;
    for (int col = 0; col < A.mat.outerSize(); ++col) {
        for (SpMat::InnerIterator it(A.mat, col); it; ++it) {
            const BasisPoint row_pt = point_of(A.basis, it.row());
            const BasisPoint col_pt = point_of(A.basis, it.col());
            if (row_pt.p >= split || col_pt.p >= split)
                worst = std::max(worst, std::abs(it.value()));
        }
    }
    return worst;
}

// --- explicit isomorphism witnesses -------------------------------------------

struct IsoReport {
    long long n = 0;
    int samples = 0;
    double max_dev = 0.0;
    bool pass = false;
};

namespace detail {

// Random per-leg compact with entries inside [0, support)².
inline TruncOp random_compact(Rng& rng, const RepParams& params, int support) {
    const LegsBasis basis = params.legs_basis();
    std::uniform_int_distribution<int> pick_p(0, support - 1);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::vector<Triplet> entries;
    for (int s = 1; s <= params.l; ++s) {
        for (int draw = 0; draw < 3 * support; ++draw) {
            entries.emplace_back(static_cast<int>(index_of(basis, s, pick_p(rng))),
                                 static_cast<int>(index_of(basis, s, pick_p(rng))),
                                 Complex(coeff(rng), coeff(rng)));
        }
    }
    return TruncOp::from_triplets(Basis{basis}, entries);
}

inline TruncOp scaled_identity(Complex z, const RepParams& params) {
    return z * TruncOp::identity(Basis{params.legs_basis()});
}

}  // namespace detail

// Verifies the explicit module isomorphism for the degree-n line bundle by
// sampling: forward map x ⊗ y ↦ xT + y, inverse map m = k + λT ↦
// (λI + kT*, kP), plus left-linearity over the unitized algebra.  All
// identities are exact at the matrix level as long as compact supports stay
// below N − |n| − 2, so deviations are pure roundoff.
inline IsoReport verify_line_bundle_iso(long long n, const RepParams& params,
                                        int samples, double tol,
                                        std::uint64_t seed = 2026) {
    params.validate();
    if (std::llabs(n) + 2 >= params.N)
        throw truncation_error("winding leaves no compact room below truncation");
    const ModuleModel model = line_bundle_model(n, params);
    const TruncOp& T = model.T;
    const TruncOp Tstar = T.adjoint();
    const TruncOp I = TruncOp::identity(Basis{params.legs_basis()});
    const TruncOp Icompl = I - model.P;
    const int support = params.N - static_cast<int>(std::llabs(n)) - 2;

    Rng rng = sample_rng(seed, 90, static_cast<std::uint64_t>(n + 64));
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);

    IsoReport report;
    report.n = n;
    report.samples = samples;
    auto track = [&report](double dev) { report.max_dev = std::max(report.max_dev, dev); };

    for (int trial = 0; trial < samples; ++trial) {
        const Complex lambda(coeff(rng), coeff(rng));
        const TruncOp k = detail::random_compact(rng, params, support);
        const Complex lx(coeff(rng), coeff(rng));
        const TruncOp kx = detail::random_compact(rng, params, support);
        const TruncOp x = detail::scaled_identity(lx, params) + kx;
        const TruncOp a = detail::scaled_identity(Complex(coeff(rng), coeff(rng)), params) +
                          detail::random_compact(rng, params, support);

        if (n >= 0) {
            // inverse then forward on a model element m = k + lambda T
            const TruncOp m = k + detail::scaled_identity(lambda, params) * T;
            const TruncOp xk = detail::scaled_identity(lambda, params) + k * Tstar;
            const TruncOp yk = k * model.P;
            track(max_abs_entry((xk * T + yk - m).mat));

            // forward then inverse on a module element (x, y)
            const TruncOp y = (detail::scaled_identity(Complex(coeff(rng), coeff(rng)), params) +
                               detail::random_compact(rng, params, support)) *
                              model.P;
            const TruncOp image = x * T + y;
            const TruncOp kprime = image - detail::scaled_identity(lx, params) * T;
            const TruncOp x_back = detail::scaled_identity(lx, params) + kprime * Tstar;
            const TruncOp y_back = kprime * model.P;
            track(max_abs_entry((x_back - x).mat));
            track(max_abs_entry((y_back - y).mat));

            // left-linearity over the unitized algebra
            track(max_abs_entry(((a * x) * T + a * y - a * image).mat));
        } else {
            // inverse then forward on m = k + lambda T
            const TruncOp m = k + detail::scaled_identity(lambda, params) * T;
            const TruncOp z_back = (detail::scaled_identity(lambda, params) + k * Tstar) * Icompl;
            track(max_abs_entry((z_back * T - m).mat));

            // forward then inverse on a module element z = (lx I + kx)(I - P)
            const TruncOp z = x * Icompl;
            const TruncOp image = z * T;
            const TruncOp kprime = image - detail::scaled_identity(lx, params) * T;
            const TruncOp z_round =
                (detail::scaled_identity(lx, params) + kprime * Tstar) * Icompl;
            track(max_abs_entry((z_round - z).mat));

            // the module projection is transparent to the witness shift
            track(max_abs_entry((kx * Icompl * T - kx * T).mat));

            // left-linearity
            track(max_abs_entry(((a * z) * T - a * image).mat));
        }
    }
    report.pass = report.max_dev <= tol;
    return report;
}

}  // namespace qlens
