#pragma once

#include <compare>
#include <string>

#include "qlens/errors.hpp"

namespace qlens {

// Morphism of the discrete transformation groupoid underlying the operator
// model.  A finite morphism (k, m, p)_s acts on the level fiber of leg s,
// carrying source level p to range level p+m and winding by k; the boundary
// fiber at infinity carries only the loop degree m (its winding component is
// trivial).  Validity means both endpoint levels are nonnegative.
class Morphism {
  public:
    static Morphism finite(long long k, long long m, int s, long long p) {
        if (s < 1) throw domain_error("leg index must be >= 1");
        if (p < 0 || p + m < 0)
            throw domain_error("morphism endpoints must be nonnegative levels");
        Morphism out;
        out.k_ = k;
        out.m_ = m;
        out.s_ = s;
        out.p_ = p;
        out.at_infinity_ = false;
        return out;
    }

    static Morphism infinite(long long m) {
        Morphism out;
        out.m_ = m;
        out.at_infinity_ = true;
        return out;
    }

    long long k() const { return k_; }
    long long m() const { return m_; }
    int s() const { return s_; }
    long long source() const { return p_; }
    long long range() const { return p_ + m_; }
    bool at_infinity() const { return at_infinity_; }
    bool is_unit() const { return k_ == 0 && m_ == 0; }

    friend bool operator==(const Morphism&, const Morphism&) = default;

  private:
    long long k_ = 0;
    long long m_ = 0;
    int s_ = 1;
    long long p_ = 0;
    bool at_infinity_ = false;
};

// a after b: defined when b's range is a's source (same fiber).
inline Morphism compose(const Morphism& a, const Morphism& b) {
    if (a.at_infinity() != b.at_infinity())
        throw composition_error("cannot compose across the boundary fiber");
    if (a.at_infinity()) return Morphism::infinite(a.m() + b.m());
    if (a.s() != b.s()) throw composition_error("morphisms live on different legs");
    if (a.source() != b.range())
        throw composition_error("source/range mismatch: " + std::to_string(a.source()) +
                                " != " + std::to_string(b.range()));
    return Morphism::finite(a.k() + b.k(), a.m() + b.m(), b.s(), b.source());
}

inline Morphism inverse(const Morphism& g) {
    if (g.at_infinity()) return Morphism::infinite(-g.m());
    return Morphism::finite(-g.k(), -g.m(), g.s(), g.range());
}

inline std::string to_string(const Morphism& g) {
    if (g.at_infinity()) return "(0," + std::to_string(g.m()) + ",inf)";
    return "(" + std::to_string(g.k()) + "," + std::to_string(g.m()) + "," +
           std::to_string(g.source()) + ")_" + std::to_string(g.s());
}

}  // namespace qlens
