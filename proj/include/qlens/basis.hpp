#pragma once

#include <string>
#include <variant>

#include "qlens/errors.hpp"

namespace qlens {

// Truncated orthonormal bases for the three operator models.
//
// IrrepBasis   e_p                0 <= p < N, one fixed leg s
// LegsBasis    e_{(s,p)}          1 <= s <= l
// MergedBasis  e_{(t,s,p)}        -W <= t <= W, winding index t
//
// Index layouts are row-major in (t, s, p) so that the level index p is
// contiguous; all code goes through index()/point_of() rather than assuming
// a layout.
struct IrrepBasis {
    int s = 1;
    int N = 0;
    friend bool operator==(const IrrepBasis&, const IrrepBasis&) = default;
};

struct LegsBasis {
    int l = 1;
    int N = 0;
    friend bool operator==(const LegsBasis&, const LegsBasis&) = default;
};

struct MergedBasis {
    int l = 1;
    int W = 0;
    int N = 0;
    friend bool operator==(const MergedBasis&, const MergedBasis&) = default;
};

using Basis = std::variant<IrrepBasis, LegsBasis, MergedBasis>;

// A resolved basis point; t is 0 and s is the fixed leg for IrrepBasis.
struct BasisPoint {
    int t = 0;
    int s = 1;
    int p = 0;
};

inline long dim(const Basis& b) {
    return std::visit(
        [](const auto& basis) -> long {
            using T = std::decay_t<decltype(basis)>;
            if constexpr (std::is_same_v<T, IrrepBasis>) return basis.N;
            if constexpr (std::is_same_v<T, LegsBasis>) return static_cast<long>(basis.l) * basis.N;
            if constexpr (std::is_same_v<T, MergedBasis>)
                return static_cast<long>(2 * basis.W + 1) * basis.l * basis.N;
        },
        b);
}

inline long index_of(const IrrepBasis&, int p) { return p; }
inline long index_of(const LegsBasis& b, int s, int p) {
    return static_cast<long>(s - 1) * b.N + p;
}
inline long index_of(const MergedBasis& b, int t, int s, int p) {
    return (static_cast<long>(t + b.W) * b.l + (s - 1)) * b.N + p;
}

inline BasisPoint point_of(const Basis& b, long idx) {
    return std::visit(
        [idx](const auto& basis) -> BasisPoint {
            using T = std::decay_t<decltype(basis)>;
            if constexpr (std::is_same_v<T, IrrepBasis>) {
                return {0, basis.s, static_cast<int>(idx)};
            } else if constexpr (std::is_same_v<T, LegsBasis>) {
                return {0, static_cast<int>(idx / basis.N) + 1, static_cast<int>(idx % basis.N)};
            } else {
                long per_t = static_cast<long>(basis.l) * basis.N;
                int t = static_cast<int>(idx / per_t) - basis.W;
                long rem = idx % per_t;
                return {t, static_cast<int>(rem / basis.N) + 1, static_cast<int>(rem % basis.N)};
            }
        },
        b);
}

// True when a basis point sits far enough from every truncation edge that
// operator products of total shift degree < margin are exact there.
inline bool edge_safe(const Basis& b, long idx, int margin) {
    BasisPoint pt = point_of(b, idx);
    return std::visit(
        [&](const auto& basis) -> bool {
            using T = std::decay_t<decltype(basis)>;
            if constexpr (std::is_same_v<T, MergedBasis>) {
                return pt.p < basis.N - margin && pt.t < basis.W - margin &&
                       pt.t > -(basis.W - margin);
            } else {
                return pt.p < basis.N - margin;
            }
        },
        b);
}

// Raises when the safe region is empty for this margin.
inline void require_usable_margin(const Basis& b, int margin) {
    if (margin < 0) throw truncation_error("margin must be nonnegative");
    std::visit(
        [&](const auto& basis) {
            using T = std::decay_t<decltype(basis)>;
            if (margin >= basis.N)
                throw truncation_error("margin >= N leaves no edge-safe levels");
            if constexpr (std::is_same_v<T, MergedBasis>) {
                if (margin >= basis.W)
                    throw truncation_error("margin >= W leaves no edge-safe window");
            }
        },
        b);
}

inline std::string to_string(const Basis& b) {
    return std::visit(
        [](const auto& basis) -> std::string {
            using T = std::decay_t<decltype(basis)>;
            if constexpr (std::is_same_v<T, IrrepBasis>)
                return "irrep(s=" + std::to_string(basis.s) + ",N=" + std::to_string(basis.N) + ")";
            else if constexpr (std::is_same_v<T, LegsBasis>)
                return "legs(l=" + std::to_string(basis.l) + ",N=" + std::to_string(basis.N) + ")";
            else
                return "merged(l=" + std::to_string(basis.l) + ",W=" + std::to_string(basis.W) +
                       ",N=" + std::to_string(basis.N) + ")";
        },
        b);
}

}  // namespace qlens
