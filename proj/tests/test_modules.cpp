#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "qlens/modules.hpp"
#include "qlens/projection_io.hpp"
#include "qlens/random_gen.hpp"
#include "qlens/rewrite.hpp"

using namespace qlens;

namespace {

double projection_dev(const ProjectionRep& a, const ProjectionRep& b) {
    REQUIRE(a.l == b.l);
    REQUIRE(a.N == b.N);
    REQUIRE(a.r == b.r);
    double dev = 0.0;
    for (int i = 0; i < a.r; ++i) {
        for (int j = 0; j < a.r; ++j) {
            const auto& x = a.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            const auto& y = b.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            dev = std::max(dev, std::abs(x.scalar - y.scalar));
            for (int s = 0; s < a.l; ++s)
                dev = std::max(dev, (x.legs[static_cast<std::size_t>(s)] -
                                     y.legs[static_cast<std::size_t>(s)])
                                        .cwiseAbs()
                                        .maxCoeff());
        }
    }
    return dev;
}

// Diagonal window ⊕_s diag(p in [lo, hi)) used to name truncation artifacts.
TruncOp level_band(const RepParams& params, int lo, int hi) {
    const LegsBasis basis = params.legs_basis();
    std::vector<Triplet> entries;
    for (int s = 1; s <= params.l; ++s)
        for (int p = lo; p < hi; ++p)
            entries.emplace_back(static_cast<int>(index_of(basis, s, p)),
                                 static_cast<int>(index_of(basis, s, p)), Complex(1.0, 0.0));
    return TruncOp::from_triplets(Basis{basis}, entries);
}

}  // namespace

TEST_CASE("projection verification separates projections from pretenders") {
    const ProjectionRep id1 = ProjectionRep::identity(2, 8, 1);
    const ProjectionReport ok = verify_projection(id1, 1e-12);
    CHECK(ok.pass);
    CHECK(ok.idempotent_dev == 0.0);
    CHECK(ok.adjoint_dev == 0.0);
    CHECK(ok.scalar_dev == 0.0);

    ProjectionRep levels = ProjectionRep::zero(2, 8, 1);
    for (int s = 0; s < 2; ++s)
        levels.entries[0][0].legs[static_cast<std::size_t>(s)] =
            detail::level_projection(8, 2);
    CHECK(verify_projection(levels, 1e-12).pass);

    ProjectionRep half = ProjectionRep::zero(2, 8, 1);
    half.entries[0][0].scalar = Complex(0.5, 0.0);
    const ProjectionReport bad = verify_projection(half, 1e-6);
    CHECK_FALSE(bad.pass);
    CHECK(bad.idempotent_dev == Catch::Approx(0.25));
    CHECK(bad.adjoint_dev == 0.0);
    CHECK(bad.scalar_dev == Catch::Approx(0.25));
}

TEST_CASE("the invariant reads free rank and leg indices off the diagonal") {
    const ProjectionRep id1 = ProjectionRep::identity(2, 8, 1);
    const KInvariant unit_inv = k_invariant(id1, 1e-9);
    CHECK(unit_inv == KInvariant{1, {0, 0}});
    CHECK(to_string(unit_inv) == "(1; 0,0)");

    ProjectionRep levels = ProjectionRep::zero(2, 8, 1);
    for (int s = 0; s < 2; ++s)
        levels.entries[0][0].legs[static_cast<std::size_t>(s)] =
            detail::level_projection(8, 2);
    CHECK(k_invariant(levels, 1e-9) == KInvariant{0, {2, 2}});

    ProjectionRep deeper = ProjectionRep::zero(2, 8, 1);
    for (int s = 0; s < 2; ++s)
        deeper.entries[0][0].legs[static_cast<std::size_t>(s)] =
            detail::level_projection(8, 3);
    const ProjectionRep sum = direct_sum(id1, deeper);
    CHECK(k_invariant(sum, 1e-9) == KInvariant{1, {3, 3}});

    ProjectionRep half = ProjectionRep::zero(2, 8, 1);
    half.entries[0][0].scalar = Complex(0.5, 0.0);
    CHECK_THROWS_AS(k_invariant(half, 1e-6), invariant_error);

    ProjectionRep negative = ProjectionRep::zero(2, 8, 1);
    for (int s = 0; s < 2; ++s)
        negative.entries[0][0].legs[static_cast<std::size_t>(s)] =
            -detail::level_projection(8, 1);
    CHECK_THROWS_AS(k_invariant(negative, 1e-9), invariant_error);
}

TEST_CASE("canonical projections realize every admissible invariant") {
    SECTION("zero free rank stacks plain level projections") {
        const ProjectionRep P = canonical_projection(KInvariant{0, {1, 0}}, 2, 8);
        REQUIRE(P.r == 1);
        CHECK(P.entries[0][0].scalar == Complex(0.0, 0.0));
        CHECK(P.entries[0][0].legs[0] == detail::level_projection(8, 1));
        CHECK(P.entries[0][0].legs[1] == DenseMat::Zero(8, 8));
        CHECK(verify_projection(P, 1e-12).pass);
        CHECK(k_invariant(P, 1e-9) == KInvariant{0, {1, 0}});
    }

    SECTION("mixed-sign indices split into a hole and an excess block") {
        const ProjectionRep P = canonical_projection(KInvariant{2, {-1, 3}}, 2, 8);
        REQUIRE(P.r == 3);
        CHECK(P.entries[0][0].scalar == Complex(1.0, 0.0));
        CHECK(P.entries[1][1].scalar == Complex(1.0, 0.0));
        CHECK(P.entries[1][1].legs[0] == DenseMat(-detail::level_projection(8, 1)));
        CHECK(P.entries[1][1].legs[1] == DenseMat::Zero(8, 8));
        CHECK(P.entries[2][2].scalar == Complex(0.0, 0.0));
        CHECK(P.entries[2][2].legs[0] == DenseMat::Zero(8, 8));
        CHECK(P.entries[2][2].legs[1] == detail::level_projection(8, 3));
        CHECK(P.entries[0][1].scalar == Complex(0.0, 0.0));
        CHECK(verify_projection(P, 1e-12).pass);
        CHECK(k_invariant(P, 1e-9) == KInvariant{2, {-1, 3}});
    }

    SECTION("all-zero indices collapse to a bare identity") {
        const ProjectionRep P = canonical_projection(KInvariant{1, {0, 0}}, 2, 8);
        REQUIRE(P.r == 1);
        CHECK(projection_dev(P, ProjectionRep::identity(2, 8, 1)) == 0.0);
    }

    SECTION("random invariants round trip and direct sums add") {
        Rng rng = sample_rng(7, 80, 0);
        std::uniform_int_distribution<int> pick_rho(0, 3);
        std::uniform_int_distribution<int> pick_t(-4, 4);
        const int l = 3, N = 8;
        for (int trial = 0; trial < 24; ++trial) {
            KInvariant a{pick_rho(rng), {}}, b{pick_rho(rng), {}};
            for (int s = 0; s < l; ++s) {
                a.t.push_back(a.rho == 0 ? std::abs(pick_t(rng)) : pick_t(rng));
                b.t.push_back(b.rho == 0 ? std::abs(pick_t(rng)) : pick_t(rng));
            }
            const ProjectionRep P = canonical_projection(a, l, N);
            const ProjectionRep Q = canonical_projection(b, l, N);
            CHECK(verify_projection(P, 1e-12).pass);
            CHECK(k_invariant(P, 1e-9) == a);
            KInvariant both{a.rho + b.rho, {}};
            for (int s = 0; s < l; ++s) both.t.push_back(a.t[static_cast<std::size_t>(s)] +
                                                         b.t[static_cast<std::size_t>(s)]);
            CHECK(k_invariant(direct_sum(P, Q), 1e-9) == both);
        }
    }

    SECTION("inadmissible invariants are rejected") {
        CHECK_THROWS_AS(canonical_projection(KInvariant{1, {0}}, 2, 8), invariant_error);
        CHECK_THROWS_AS(canonical_projection(KInvariant{0, {-1, 0}}, 2, 8), invariant_error);
        CHECK_THROWS_AS(canonical_projection(KInvariant{-1, {0, 0}}, 2, 8), invariant_error);
        CHECK_THROWS_AS(canonical_projection(KInvariant{1, {8, 8}}, 2, 8), truncation_error);
    }
}

TEST_CASE("line bundle projections carry the winding as their invariant") {
    CHECK(k_invariant(line_bundle_projection(2, 3, 8), 1e-9) == KInvariant{1, {2, 2, 2}});
    CHECK(k_invariant(line_bundle_projection(-2, 3, 8), 1e-9) == KInvariant{1, {-2, -2, -2}});
    const ProjectionRep flat = line_bundle_projection(0, 3, 8);
    CHECK(flat.r == 1);
    CHECK(projection_dev(flat, ProjectionRep::identity(3, 8, 1)) == 0.0);
    for (long long n : {2LL, -2LL, 0LL})
        CHECK(verify_projection(line_bundle_projection(n, 3, 8), 1e-12).pass);
    CHECK_THROWS_AS(line_bundle_projection(8, 3, 8), truncation_error);
    CHECK_THROWS_AS(line_bundle_projection(-9, 3, 8), truncation_error);
}

TEST_CASE("isomorphism is detected through the invariant and survives conjugation") {
    const int l = 2, N = 8;
    CHECK(is_isomorphic(canonical_projection(KInvariant{1, {1, 1}}, l, N),
                        line_bundle_projection(1, l, N), 1e-9));
    CHECK_FALSE(is_isomorphic(ProjectionRep::identity(l, N, 1),
                              ProjectionRep::identity(l, N, 2), 1e-9));
    CHECK_FALSE(is_isomorphic(line_bundle_projection(1, l, N),
                              line_bundle_projection(-1, l, N), 1e-9));

    Rng rng = sample_rng(7, 81, 0);
    const ProjectionRep P = line_bundle_projection(2, l, N);
    for (int trial = 0; trial < 3; ++trial) {
        const ProjectionRep Pc = conjugate_by_random_unitary(P, rng, 5);
        const ProjectionReport report = verify_projection(Pc, 1e-9);
        CHECK(report.pass);
        CHECK(is_isomorphic(P, Pc, 1e-6));
        CHECK(projection_dev(P, Pc) > 1e-3);  // the conjugation actually moved it
    }
}

TEST_CASE("shift models square to level projections exactly") {
    RepParams params;
    params.l = 2;
    params.N = 16;
    params.validate();
    const TruncOp I = TruncOp::identity(Basis{params.legs_basis()});

    for (long long n : {0LL, 3LL}) {
        const ModuleModel model = line_bundle_model(n, params);
        const TruncOp Tstar = model.T.adjoint();
        CHECK(max_abs_entry((Tstar * model.T + model.P - I).mat) == 0.0);
        CHECK(max_abs_entry(
                  (model.T * Tstar + level_band(params, params.N - static_cast<int>(n), params.N) - I)
                      .mat) == 0.0);
    }
    for (long long n : {-1LL, -4LL}) {
        const ModuleModel model = line_bundle_model(n, params);
        const TruncOp Tstar = model.T.adjoint();
        CHECK(max_abs_entry((model.T * Tstar + model.P - I).mat) == 0.0);
        CHECK(max_abs_entry(
                  (Tstar * model.T + level_band(params, params.N + static_cast<int>(n), params.N) - I)
                      .mat) == 0.0);
    }
    CHECK_THROWS_AS(line_bundle_model(16, params), truncation_error);
}

TEST_CASE("generator powers approach the pure shift far from the compact corner") {
    RepParams params;
    params.l = 2;
    params.N = 32;
    params.validate();
    const long long n = 2;
    const GElement cc = gel_power(embed_c(params), n);
    const ModuleModel model = line_bundle_model(n, params);
    const TruncOp diff = rho_n(cc, n, params) - model.T;

    const Layer& layer = cc.layers().at({0, -n});
    const DecayCert cert = layer.decay();
    const int split = 8;
    const double bound = cert.C * std::pow(cert.r, split);
    const double far = far_from_compact(diff, split);
    CHECK(far <= bound * (1.0 + 1e-9) + 1e-15);
    CHECK(far > 0.0);                             // the approach is nontrivial ...
    CHECK(max_abs_entry(diff.mat) > 1000 * far);  // ... and the corner is genuinely compact
}

TEST_CASE("module isomorphism witnesses verify by sampling") {
    RepParams params;
    params.q = 0.5;
    params.l = 2;
    params.N = 32;
    params.validate();

    SECTION("positive winding") {
        const IsoReport report = verify_line_bundle_iso(1, params, 40, 1e-9);
        CHECK(report.pass);
        CHECK(report.n == 1);
        CHECK(report.samples == 40);
        CHECK(report.max_dev < 1e-9);
    }
    SECTION("negative winding on a single leg") {
        RepParams single = params;
        single.l = 1;
        const IsoReport report = verify_line_bundle_iso(-3, single, 40, 1e-9);
        CHECK(report.pass);
        CHECK(report.max_dev < 1e-9);
    }
    SECTION("zero winding is the free module") {
        const IsoReport report = verify_line_bundle_iso(0, params, 10, 1e-9);
        CHECK(report.pass);
    }
    SECTION("windings at the truncation edge are refused") {
        CHECK_THROWS_AS(verify_line_bundle_iso(30, params, 1, 1e-9), truncation_error);
    }
}

TEST_CASE("spectral interpolation cuts exact diagonal units out of the gauge operator") {
    RepParams params;
    params.l = 2;
    params.N = 8;
    params.validate();
    const NormalForm gauge = normalize("d . d*", params.l);
    const TruncOp D = rho_n(embed_normalform(gauge, params), 0, params);
    const int dim = params.l * params.N;

    DenseMat dense = DenseMat(D.mat);
    std::vector<Complex> mu(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        mu[static_cast<std::size_t>(i)] = dense(i, i);
        for (int j = 0; j < dim; ++j)
            if (j != i) CHECK(dense(i, j) == Complex(0.0, 0.0));
    }
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            REQUIRE(mu[static_cast<std::size_t>(i)] != mu[static_cast<std::size_t>(j)]);

    for (int unit : {0, 5, dim - 1}) {
        DenseMat interpolant = DenseMat::Identity(dim, dim);
        for (int k = 0; k < dim; ++k) {
            if (k == unit) continue;
            for (int row = 0; row < dim; ++row) {
                const std::size_t r = static_cast<std::size_t>(row);
                interpolant(row, row) *= (mu[r] - mu[static_cast<std::size_t>(k)]) /
                                         (mu[static_cast<std::size_t>(unit)] -
                                          mu[static_cast<std::size_t>(k)]);
            }
        }
        DenseMat expected = DenseMat::Zero(dim, dim);
        expected(unit, unit) = Complex(1.0, 0.0);
        CHECK((interpolant - expected).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("projections survive the document format") {
    Rng rng = sample_rng(7, 82, 0);
    const ProjectionRep P =
        conjugate_by_random_unitary(canonical_projection(KInvariant{2, {-1, 3}}, 2, 6), rng, 6);

    const nlohmann::json doc = projection_to_json(P);
    CHECK(projection_dev(projection_from_json(doc), P) == 0.0);

    const nlohmann::json reparsed = nlohmann::json::parse(doc.dump());
    CHECK(projection_dev(projection_from_json(reparsed), P) == 0.0);

    SECTION("shape violations are reported as configuration errors") {
        nlohmann::json broken = doc;
        broken.erase("r");
        CHECK_THROWS_AS(projection_from_json(broken), config_error);

        broken = doc;
        broken["entries"][0] = nlohmann::json::array();
        CHECK_THROWS_AS(projection_from_json(broken), config_error);

        broken = doc;
        broken["entries"][0][0]["scalar"] = {1.0};
        CHECK_THROWS_AS(projection_from_json(broken), config_error);

        broken = doc;
        REQUIRE(broken["entries"][2][2].contains("compact"));
        broken["entries"][2][2]["compact"][0]["leg"] = 3;
        CHECK_THROWS_AS(projection_from_json(broken), config_error);

        broken = doc;
        broken["entries"][2][2]["compact"][0]["rows"][0][0] = 6;
        CHECK_THROWS_AS(projection_from_json(broken), config_error);
    }
}
