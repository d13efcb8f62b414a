#pragma once

#include <cctype>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qlens/errors.hpp"
#include "qlens/qlaurent.hpp"
#include "qlens/scalars.hpp"

namespace qlens {

// The two distinguished generators of the coordinate algebra.
enum class Gen { C, D };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

// Abstract syntax of the input language:
//   atoms      c  d  1  i  p/q  q^<int>
//   postfix    *        (adjoint)
//   postfix    ^<n>     (nonnegative integer power)
//   infix      .        (product)    + -   (sum, difference)
// Scalars are kept exact; a scalar leaf is a full Laurent term so that
// q-power literals cost nothing to represent.
struct ExprNode {
    struct Scalar {
        QLaurent value;
    };
    struct Generator {
        Gen g;
    };
    struct Adjoint {
        Expr child;
    };
    struct Product {
        Expr lhs, rhs;
    };
    struct Sum {
        Expr lhs, rhs;
        bool subtract = false;
    };
    struct Power {
        Expr base;
        long long exponent;  // >= 0
    };

    using Payload = std::variant<Scalar, Generator, Adjoint, Product, Sum, Power>;
    Payload payload;

    explicit ExprNode(Payload p) : payload(std::move(p)) {}
};

inline Expr make_scalar(QLaurent v) {
    return std::make_shared<ExprNode>(ExprNode::Scalar{std::move(v)});
}
inline Expr make_gen(Gen g) { return std::make_shared<ExprNode>(ExprNode::Generator{g}); }
inline Expr make_adjoint(Expr e) { return std::make_shared<ExprNode>(ExprNode::Adjoint{std::move(e)}); }
inline Expr make_product(Expr a, Expr b) {
    return std::make_shared<ExprNode>(ExprNode::Product{std::move(a), std::move(b)});
}
inline Expr make_sum(Expr a, Expr b, bool subtract = false) {
    return std::make_shared<ExprNode>(ExprNode::Sum{std::move(a), std::move(b), subtract});
}
inline Expr make_power(Expr base, long long exponent) {
    return std::make_shared<ExprNode>(ExprNode::Power{std::move(base), exponent});
}

namespace detail {

// Recursive-descent parser.  Whitespace is insignificant; errors carry the
// offset of the offending character.
class Parser {
  public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

  private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw parse_error(pos_, msg); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool eof() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    long long parse_integer(bool allow_sign) {
        skip_ws();
        std::size_t start = pos_;
        bool negative = false;
        if (allow_sign && pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
            negative = text_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            pos_ = start;
            fail("expected an integer");
        }
        long long value = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            int digit = text_[pos_] - '0';
            if (__builtin_mul_overflow(value, 10LL, &value) ||
                __builtin_add_overflow(value, static_cast<long long>(digit), &value)) {
                pos_ = start;
                fail("integer literal out of range");
            }
            ++pos_;
        }
        return negative ? -value : value;
    }

    Expr parse_sum() {
        Expr lhs = parse_term();
        while (true) {
            if (consume('+')) {
                lhs = make_sum(lhs, parse_term(), false);
            } else if (peek() == '-') {
                ++pos_;
                lhs = make_sum(lhs, parse_term(), true);
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term() {
        Expr lhs = parse_factor();
        while (consume('.')) lhs = make_product(lhs, parse_factor());
        return lhs;
    }

    // factor := primary { '*' | '^' <nonneg int> }
    Expr parse_factor() {
        Expr e = parse_primary();
        while (true) {
            if (consume('*')) {
                e = make_adjoint(e);
            } else if (peek() == '^') {
                ++pos_;
                skip_ws();
                std::size_t at = pos_;
                long long n = parse_integer(/*allow_sign=*/true);
                if (n < 0) throw parse_error(at, "expression powers must be nonnegative");
                e = make_power(e, n);
            } else {
                return e;
            }
        }
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("expected an expression");
        char ch = text_[pos_];
        if (ch == '(') {
            ++pos_;
            Expr inner = parse_sum();
            if (!consume(')')) fail("expected ')'");
            return inner;
        }
        if (ch == '-') {  // unary minus
            ++pos_;
            return make_product(make_scalar(QLaurent(-1)), parse_factor());
        }
        if (ch == 'c') {
            ++pos_;
            return make_gen(Gen::C);
        }
        if (ch == 'd') {
            ++pos_;
            return make_gen(Gen::D);
        }
        if (ch == 'i') {
            ++pos_;
            return make_scalar(QLaurent(GaussianRational::imaginary_unit()));
        }
        if (ch == 'q') {
            ++pos_;
            if (!consume('^')) fail("expected '^' after 'q'");
            return make_scalar(QLaurent::q_power(parse_integer(/*allow_sign=*/true)));
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            long long num = parse_integer(/*allow_sign=*/false);
            if (consume('/')) {
                std::size_t at = pos_;
                long long den = parse_integer(/*allow_sign=*/false);
                if (den == 0) throw parse_error(at, "zero denominator");
                return make_scalar(QLaurent(GaussianRational(Rational(num, den))));
            }
            return make_scalar(QLaurent(GaussianRational(Rational(num))));
        }
        fail(std::string("unexpected character '") + ch + "'");
    }
};

}  // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::Parser(text).parse(); }

}  // namespace qlens
