#include <catch2/catch_amalgamated.hpp>

#include <memory>

#include "qlens/expr.hpp"
#include "qlens/normal_form.hpp"
#include "qlens/random_gen.hpp"
#include "qlens/rewrite.hpp"

using namespace qlens;

TEST_CASE("ordered forms of the defining products are frozen") {
    CHECK(to_string(normalize("d . c", 2)) == "q^-2 . c . d");
    CHECK(to_string(normalize("c* . c", 1)) == "1 - q^-2 . d . d*");
    CHECK(to_string(normalize("(c . d)*", 2)) == "q^2 . c* . d*");
    CHECK(to_string(normalize("c . c* + d . d*", 1)) == "1");
    CHECK(to_string(normalize("c . c*", 2)) == "1 + (-1 - q^2) . d . d* + q^2 . d^2 . d*^2");
    CHECK(to_string(normalize("d . c*", 3)) == "q^3 . c* . d");
    CHECK(to_string(normalize("d* . d - d . d*", 3)) == "0");
}

TEST_CASE("printed normal forms re-parse to the same element") {
    for (int l : {1, 2, 3}) {
        for (unsigned long long i = 0; i < 40; ++i) {
            Rng rng = sample_rng(11, 1, i + 100ULL * static_cast<unsigned long long>(l));
            std::string text = gen::random_star_poly(rng);
            NormalForm nf = normalize(text, l);
            CHECK(normalize(to_string(nf), l) == nf);
        }
    }
}

TEST_CASE("reduction result is independent of the reduction order") {
    for (int l : {1, 2, 3}) {
        for (unsigned long long i = 0; i < 40; ++i) {
            Rng rng = sample_rng(13, 2, i + 1000ULL * static_cast<unsigned long long>(l));
            std::string text = gen::random_star_poly(rng);
            Expr e = parse_expr(text);
            NormalForm leftmost = normalize(e, l);
            auto chooser_rng = std::make_shared<Rng>(sample_rng(13, 3, i));
            NormalForm randomized = normalize(e, l, random_redex_chooser(chooser_rng));
            CHECK(leftmost == randomized);
        }
    }
}

TEST_CASE("product is associative through different reduction sequences") {
    for (unsigned long long i = 0; i < 25; ++i) {
        Rng rng = sample_rng(17, 4, i);
        std::string a = gen::random_word(rng, 3);
        std::string b = gen::random_word(rng, 3);
        std::string c = gen::random_word(rng, 3);
        std::string left = "(" + a + ") . ((" + b + ") . (" + c + "))";
        std::string right = "((" + a + ") . (" + b + ")) . (" + c + ")";
        CHECK(normalize(left, 2) == normalize(right, 2));
    }
}

TEST_CASE("adjoint is an involutive antihomomorphism") {
    for (int l : {1, 3}) {
        for (unsigned long long i = 0; i < 25; ++i) {
            Rng rng = sample_rng(19, 5, i + 7ULL * static_cast<unsigned long long>(l));
            NormalForm a = normalize(gen::random_star_poly(rng, 4), l);
            NormalForm b = normalize(gen::random_star_poly(rng, 4), l);
            CHECK(adjoint_nf(adjoint_nf(a)) == a);
            CHECK(adjoint_nf(nf_mul(a, b)) == nf_mul(adjoint_nf(b), adjoint_nf(a)));
        }
    }
}

TEST_CASE("relation-built elements reduce to zero") {
    for (int l : {1, 2, 3}) {
        for (int rule = 1; rule <= 7; ++rule)
            CHECK(normalize(gen::relation_difference(rule, l), l).is_zero());
        for (unsigned long long i = 0; i < 30; ++i) {
            Rng rng = sample_rng(23, 6, i + 50ULL * static_cast<unsigned long long>(l));
            CHECK(normalize(gen::random_zero_poly(rng, l), l).is_zero());
        }
    }
}

TEST_CASE("degree decomposition is a grading") {
    NormalForm x = normalize("c . d", 2);
    auto parts = x.degree_decompose();
    REQUIRE(parts.size() == 1);
    CHECK(parts.begin()->first == 0);

    for (unsigned long long i = 0; i < 25; ++i) {
        Rng rng = sample_rng(29, 7, i);
        NormalForm a = normalize(gen::random_star_poly(rng), 2);
        NormalForm sum(2);
        for (const auto& [n, part] : a.degree_decompose()) {
            for (const auto& [mono, coeff] : part.terms()) CHECK(mono.degree() == n);
            sum += part;
        }
        CHECK(sum == a);

        // Components multiply additively in the degree.
        NormalForm b = normalize(gen::random_word(rng, 3), 2);
        auto pa = a.degree_decompose();
        auto pb = b.degree_decompose();
        NormalForm product = nf_mul(a, b);
        auto pc = product.degree_decompose();
        for (const auto& [n, comp] : pc) {
            NormalForm expect(2);
            for (const auto& [na, ca] : pa)
                for (const auto& [nb, cb] : pb)
                    if (na + nb == n) expect += nf_mul(ca, cb);
            CHECK(expect == comp);
        }
    }
}

TEST_CASE("normal forms at different l cannot be combined") {
    NormalForm a = normalize("c", 1);
    NormalForm b = normalize("c", 2);
    CHECK_THROWS_AS(nf_mul(a, b), domain_error);
    CHECK_THROWS_AS(a + b, domain_error);
}

TEST_CASE("parser reports positions") {
    auto offset_of = [](const std::string& text) {
        try {
            parse_expr(text);
        } catch (const parse_error& e) {
            return static_cast<long>(e.pos);
        }
        return -1L;
    };
    CHECK(offset_of("q . c") == 2);       // 'q' must be followed by '^'
    CHECK(offset_of("c ^ -1") == 4);      // expression powers are nonnegative
    CHECK(offset_of("(c . d") == 6);      // unclosed parenthesis
    CHECK(offset_of("") == 0);            // empty input
    CHECK(offset_of("1/0") == 2);         // zero denominator
    CHECK(offset_of("c . ") == 4);        // dangling product
    CHECK(offset_of("c d") == 2);         // missing operator
    CHECK(offset_of("c . d") == -1);      // well-formed
}

TEST_CASE("scalar literals parse exactly") {
    CHECK(normalize("1/2 . c + 1/2 . c - c", 1).is_zero());
    CHECK(normalize("i . i + 1", 1).is_zero());
    CHECK(normalize("q^3 . q^-3 - 1", 1).is_zero());
    CHECK(normalize("c^2 - c . c", 1).is_zero());
    CHECK(normalize("-c + c", 1).is_zero());
}
