#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qlens/random_gen.hpp"
#include "qlens/rep.hpp"
#include "qlens/rewrite.hpp"

using namespace qlens;

namespace {
RepParams small_params(double q, int l) { return RepParams{q, l, 16, 6}; }
}  // namespace

TEST_CASE("operator norms of reference operators") {
    RepParams params = small_params(0.5, 1);
    TruncOp id = TruncOp::identity(Basis(params.irrep_basis(1)));
    CHECK(op_norm(id) == Catch::Approx(1.0).margin(1e-12));
    TruncOp zero{Basis(params.irrep_basis(1))};
    CHECK(op_norm(zero) == 0.0);
    TruncOp d = irrep_generator(Gen::D, params, 1);
    CHECK(op_norm(d) == Catch::Approx(0.5).margin(1e-9));
    // Power iteration path must agree with dense SVD on a window > 768.
    RepParams big{0.5, 1, 1024, 6};
    TruncOp dbig = irrep_generator(Gen::D, big, 1);
    CHECK(op_norm(dbig) == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("the shift weight vanishes at the bottom level") {
    for (int l : {1, 2, 3})
        for (int s = 1; s <= l; ++s) CHECK(shift_weight(0.5, l, 0, s) == 0.0);
    RepParams params = small_params(0.5, 2);
    TruncOp c = irrep_generator(Gen::C, params, 1);
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(16);
    e0[0] = 1.0;
    CHECK((c.mat * e0).norm() == 0.0);
}

TEST_CASE("defining relations hold edge-safely in both models") {
    for (int l : {1, 2}) {
        for (double q : {0.4, 0.7}) {
            RepParams params = small_params(q, l);
            for (int rule = 1; rule <= 7; ++rule) {
                Expr diff = parse_expr(gen::relation_difference(rule, l));
                for (int s = 1; s <= l; ++s) {
                    TruncOp op = rep_expr(diff, IrrepTarget{s, Complex(0, 1)}, params);
                    TruncOp zero{op.basis};
                    CHECK(edge_safe_equal(op, zero, 3, 1e-12));
                }
                TruncOp merged = rep_expr(diff, MergedTarget{}, params);
                TruncOp zero{merged.basis};
                CHECK(edge_safe_equal(merged, zero, 3, 1e-12));
            }
        }
    }
}

TEST_CASE("loop parameter scales the diagonal generator exactly") {
    RepParams params = small_params(0.5, 2);
    TruncOp d1 = irrep_generator(Gen::D, params, 1);
    TruncOp di = irrep_generator(Gen::D, params, 1, Complex(0, 1));
    TruncOp diff = di - Complex(0, 1) * d1;
    CHECK(max_abs_entry(diff.mat) == 0.0);
    CHECK_THROWS_AS(irrep_generator(Gen::D, params, 1, Complex(2, 0)), domain_error);
}

TEST_CASE("merged shift approaches the pure shift at deep levels") {
    for (int l : {1, 2}) {
        for (double q : {0.5, 0.8}) {
            RepParams params = small_params(q, l);
            const int P = params.N / 2;
            MergedBasis basis = params.merged_basis();
            TruncOp c = merged_generator(Gen::C, params);
            std::vector<Triplet> shift;
            for (int t = -params.W; t <= params.W; ++t)
                for (int s = 1; s <= params.l; ++s)
                    for (int p = 1; p < params.N; ++p)
                        shift.emplace_back(index_of(basis, t, s, p - 1), index_of(basis, t, s, p),
                                           Complex(1.0, 0.0));
            TruncOp pure = TruncOp::from_triplets(Basis(basis), shift);
            TruncOp diff = c - pure;
            // Restrict to levels p >= P on both sides.
            std::vector<Triplet> kept;
            for (int k = 0; k < diff.mat.outerSize(); ++k)
                for (SpMat::InnerIterator it(diff.mat, k); it; ++it) {
                    if (point_of(diff.basis, it.row()).p >= P &&
                        point_of(diff.basis, it.col()).p >= P)
                        kept.emplace_back(it.row(), it.col(), it.value());
                }
            TruncOp restricted = TruncOp::from_triplets(diff.basis, kept);
            double bound = 2.0 * std::pow(q, 2.0 * (static_cast<double>(P) * l + 1 - l));
            CHECK(op_norm(restricted) <= bound);
        }
    }
}

TEST_CASE("ordered-form image matches direct tree evaluation") {
    RepParams params{0.5, 2, 16, 8};
    for (unsigned long long i = 0; i < 30; ++i) {
        Rng rng = sample_rng(31, 8, i);
        Expr e = parse_expr(gen::random_star_poly(rng, 4, 3));
        NormalForm nf = normalize(e, params.l);
        for (const RepTarget& target :
             {RepTarget(IrrepTarget{1}), RepTarget(IrrepTarget{2, Complex(0, 1)}),
              RepTarget(MergedTarget{})}) {
            TruncOp via_nf = rep_normalform(nf, target, params);
            TruncOp via_tree = rep_expr(e, target, params);
            CHECK(edge_safe_max_dev(via_nf, via_tree, 5) <= 1e-10);
        }
    }
}

TEST_CASE("analytic norm floor never exceeds a masked matrix entry") {
    for (auto [q, l] : {std::pair{0.3, 3}, std::pair{0.5, 2}, std::pair{0.8, 1}}) {
        RepParams params{q, l, 64, 16};
        for (unsigned long long i = 0; i < 40; ++i) {
            Rng rng = sample_rng(47, 11 + static_cast<unsigned long long>(l), i);
            const std::string text = gen::random_star_poly(rng, 6, 4);
            const NormalForm nf = normalize(text, l);
            if (nf.is_zero()) continue;
            const double floor = gen::nf_norm_floor(nf, q);
            const TruncOp op = rep_expr(parse_expr(text), MergedTarget{}, params);
            const double seen = max_abs_entry(edge_safe_mask(op, 8).mat);
            CHECK(floor <= seen * (1 + 1e-9));
        }
    }
}

TEST_CASE("classifiable draws are visibly nonzero or exactly zero") {
    const double q = 0.3;
    const int l = 3;

    // This letter ordering pushes every surviving entry below any usable
    // threshold, so the conditioned generator must reject its like.
    const NormalForm faint = normalize("c . d . d . d . d . d", l);
    REQUIRE_FALSE(faint.is_zero());
    CHECK(gen::nf_norm_floor(faint, q) < 1e-8);

    int nonzero = 0;
    for (unsigned long long i = 0; i < 60; ++i) {
        Rng rng = sample_rng(48, 12, i);
        const std::string text = gen::random_classifiable_poly(rng, l, q, 1e-6, 6, 4);
        const NormalForm nf = normalize(text, l);
        if (nf.is_zero()) continue;
        ++nonzero;
        CHECK(gen::nf_norm_floor(nf, q) >= 1e-6);
    }
    CHECK(nonzero > 30);

    Rng again = sample_rng(48, 12, 7);
    Rng once = sample_rng(48, 12, 7);
    CHECK(gen::random_classifiable_poly(once, l, q, 1e-6, 6, 4) ==
          gen::random_classifiable_poly(again, l, q, 1e-6, 6, 4));
}

TEST_CASE("edge-safe comparison rejects unusable margins and mixed bases") {
    RepParams params = small_params(0.5, 1);
    TruncOp a = irrep_generator(Gen::C, params, 1);
    CHECK_THROWS_AS(edge_safe_equal(a, a, 16, 1e-9), truncation_error);
    CHECK_THROWS_AS(edge_safe_equal(a, a, params.N + 1, 1e-9), truncation_error);
    TruncOp merged = merged_generator(Gen::C, params);
    CHECK_THROWS_AS(edge_safe_max_dev(a, merged, 3), domain_error);
    CHECK_THROWS_AS(edge_safe_equal(merged, merged, 6, 1e-9), truncation_error);  // margin >= W
}

TEST_CASE("truncation parameters are validated") {
    CHECK_THROWS_AS((RepParams{1.2, 2, 16, 6}.validate()), config_error);
    CHECK_THROWS_AS((RepParams{0.5, 0, 16, 6}.validate()), config_error);
    CHECK_THROWS_AS((RepParams{0.5, 2, 4, 6}.validate()), config_error);
    CHECK_THROWS_AS((RepParams{0.5, 2, 16, 2}.validate()), config_error);
    CHECK_THROWS_AS(irrep_generator(Gen::C, RepParams{0.5, 2, 16, 6}, 3), domain_error);
}
