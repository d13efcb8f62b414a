#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "qlens/errors.hpp"
#include "qlens/groupoid.hpp"
#include "qlens/normal_form.hpp"
#include "qlens/rep.hpp"
#include "qlens/trunc_op.hpp"

namespace qlens {

// Certificate that a layer's values approach its boundary value geometrically:
// |value(s, p) - tail| <= C * r^p for every valid level p.  Certificates are
// propagated (never recomputed from samples) so they stay sound under lazy
// composition.
struct DecayCert {
    double C = 0.0;
    double r = 0.5;
};

// One (k, m) layer of a convolution-algebra element: a function of the point
// (s, p), stored either as an explicit finite support or as an evaluation
// closure valid from `horizon` upward together with the boundary value the
// closure approaches.  Layers never apply validity logic themselves; the
// owning element guards every evaluation by morphism validity.
class Layer {
  public:
    using Key = std::pair<int, long long>;  // (leg, level)
    using EvalFn = std::function<Complex(int s, long long p)>;

    static Layer finite(std::map<Key, Complex> values) {
        Layer out;
        out.exceptional_ = std::move(values);
        for (auto it = out.exceptional_.begin(); it != out.exceptional_.end();) {
            if (it->second == Complex(0.0, 0.0)) it = out.exceptional_.erase(it);
            else ++it;
        }
        out.decay_ = finite_cert(out.exceptional_);
        return out;
    }

    static Layer tailed(EvalFn fn, long long horizon, Complex tail, DecayCert cert,
                        std::map<Key, Complex> exceptional = {}) {
        Layer out;
        out.fn_ = std::move(fn);
        out.horizon_ = std::max<long long>(horizon, 0);
        out.tail_ = tail;
        out.decay_ = cert;
        out.exceptional_ = std::move(exceptional);
        return out;
    }

    bool is_finite() const { return !fn_; }

    Complex eval(int s, long long p) const {
        auto it = exceptional_.find({s, p});
        if (it != exceptional_.end()) return it->second;
        if (fn_ && p >= horizon_) return fn_(s, p);
        return Complex(0.0, 0.0);
    }

    Complex tail() const { return tail_; }
    long long horizon() const { return horizon_; }
    const DecayCert& decay() const { return decay_; }
    const std::map<Key, Complex>& exceptional() const { return exceptional_; }

    bool is_trivially_zero() const {
        return is_finite() && exceptional_.empty() && tail_ == Complex(0.0, 0.0);
    }

  private:
    static DecayCert finite_cert(const std::map<Key, Complex>& values) {
        DecayCert cert{0.0, 0.5};
        for (const auto& [key, v] : values) {
            const double scale =
                key.second < 1024 ? std::ldexp(1.0, static_cast<int>(key.second))
                                  : std::numeric_limits<double>::infinity();
            cert.C = std::max(cert.C, std::abs(v) * scale);
        }
        return cert;
    }

    std::map<Key, Complex> exceptional_;
    EvalFn fn_;
    long long horizon_ = 0;
    Complex tail_ = Complex(0.0, 0.0);
    DecayCert decay_{0.0, 0.5};
};

// Element of the convolution algebra of the level groupoid: a finitely
// supported family of (k, m) layers, each a decaying function on the valid
// points of that layer.  Values on morphisms at the boundary fiber are the
// layer tails (nonzero only on the winding-free layers k = 0).  Elements are
// immutable values sharing their payload, so closures over them are safe to
// evaluate from multiple threads.
class GElement {
  public:
    using LayerKey = std::pair<long long, long long>;  // (k, m)
    using LayerMap = std::map<LayerKey, Layer>;

    GElement() : GElement(1, LayerMap{}) {}

    GElement(int legs, LayerMap layers) {
        if (legs < 1) throw domain_error("element needs at least one leg");
        for (auto it = layers.begin(); it != layers.end();) {
            if (it->second.is_trivially_zero()) it = layers.erase(it);
            else ++it;
        }
        for (const auto& [key, layer] : layers) {
            if (key.first != 0 && layer.tail() != Complex(0.0, 0.0))
                throw domain_error("winding layers must vanish at the boundary fiber");
        }
        legs_ = legs;
        layers_ = std::make_shared<const LayerMap>(std::move(layers));
    }

    int legs() const { return legs_; }
    const LayerMap& layers() const { return *layers_; }
    std::shared_ptr<const LayerMap> shared_layers() const { return layers_; }

    // Value at a finite morphism, zero off the support and at invalid points.
    Complex eval(long long k, long long m, int s, long long p) const {
        if (s < 1 || s > legs_ || p < 0 || p + m < 0) return Complex(0.0, 0.0);
        auto it = layers_->find({k, m});
        if (it == layers_->end()) return Complex(0.0, 0.0);
        return it->second.eval(s, p);
    }

    Complex eval(const Morphism& g) const {
        if (g.at_infinity()) return boundary_value(g.m());
        return eval(g.k(), g.m(), g.s(), g.source());
    }

    // Value at the boundary point of loop degree m.
    Complex boundary_value(long long m) const {
        auto it = layers_->find({0, m});
        if (it == layers_->end()) return Complex(0.0, 0.0);
        return it->second.tail();
    }

  private:
    int legs_ = 1;
    std::shared_ptr<const LayerMap> layers_;
};

namespace detail {

// Guarded layer evaluation used inside composition closures: zero whenever
// (k, m, p)_s is not a valid morphism.
inline Complex guarded_eval(const Layer& layer, long long m, int legs, int s, long long p) {
    if (s < 1 || s > legs || p < 0 || p + m < 0) return Complex(0.0, 0.0);
    return layer.eval(s, p);
}

inline double cert_pow(double r, long long e) {
    return std::pow(r, static_cast<double>(e));
}

}  // namespace detail

inline GElement scale(const GElement& f, Complex z) {
    if (z == Complex(0.0, 0.0)) return GElement(f.legs(), {});
    GElement::LayerMap out;
    for (const auto& [key, layer] : f.layers()) {
        if (layer.is_finite()) {
            std::map<Layer::Key, Complex> values;
            for (const auto& [pt, v] : layer.exceptional()) values[pt] = z * v;
            out.emplace(key, Layer::finite(std::move(values)));
        } else {
            DecayCert cert{layer.decay().C * std::abs(z), layer.decay().r};
            auto src = std::make_shared<Layer>(layer);
            out.emplace(key, Layer::tailed(
                                 [src, z](int s, long long p) { return z * src->eval(s, p); },
                                 0, z * layer.tail(), cert));
        }
    }
    return GElement(f.legs(), std::move(out));
}

inline GElement add(const GElement& f, const GElement& g) {
    if (f.legs() != g.legs())
        throw domain_error("cannot add elements with different leg counts");
    GElement::LayerMap out;
    for (const auto& [key, layer] : f.layers()) {
        auto it = g.layers().find(key);
        if (it == g.layers().end()) {
            out.emplace(key, layer);
            continue;
        }
        const Layer& other = it->second;
        if (layer.is_finite() && other.is_finite()) {
            std::map<Layer::Key, Complex> values = layer.exceptional();
            for (const auto& [pt, v] : other.exceptional()) values[pt] += v;
            out.emplace(key, Layer::finite(std::move(values)));
        } else {
            auto a = std::make_shared<Layer>(layer);
            auto b = std::make_shared<Layer>(other);
            DecayCert cert{a->decay().C + b->decay().C,
                           std::max(a->decay().r, b->decay().r)};
            out.emplace(key, Layer::tailed(
                                 [a, b](int s, long long p) {
                                     return a->eval(s, p) + b->eval(s, p);
                                 },
                                 0, a->tail() + b->tail(), cert));
        }
    }
    for (const auto& [key, layer] : g.layers()) {
        if (f.layers().find(key) == f.layers().end()) out.emplace(key, layer);
    }
    return GElement(f.legs(), std::move(out));
}

inline GElement operator+(const GElement& f, const GElement& g) { return add(f, g); }
inline GElement operator*(Complex z, const GElement& f) { return scale(f, z); }

inline GElement operator-(const GElement& f, const GElement& g) {
    return add(f, scale(g, Complex(-1.0, 0.0)));
}

// Convolution product: (f * g)(k, m, (s, p)) sums, over all splittings
// (k, m) = (k1, m1) + (k2, m2) carried by the two supports, the products
// f(k1, m1, (s, p + m2)) * g(k2, m2, (s, p)), with invalid factor morphisms
// contributing zero.  Finite-by-finite layer pairs are combined eagerly;
// anything touching a tailed layer becomes a guarded closure whose decay
// certificate is propagated from the factor certificates.
inline GElement convolve(const GElement& f, const GElement& g) {
    if (f.legs() != g.legs())
        throw domain_error("cannot convolve elements with different leg counts");
    const int legs = f.legs();

    struct Combo {
        GElement::LayerKey left;
        GElement::LayerKey right;
    };
    std::map<GElement::LayerKey, std::vector<Combo>> groups;
    for (const auto& [key1, layer1] : f.layers()) {
        for (const auto& [key2, layer2] : g.layers()) {
            GElement::LayerKey target{key1.first + key2.first, key1.second + key2.second};
            groups[target].push_back(Combo{key1, key2});
        }
    }

    auto fl = f.shared_layers();
    auto gl = g.shared_layers();

    GElement::LayerMap out;
    for (auto& [target, combos] : groups) {
        const long long m = target.second;
        bool all_finite = true;
        for (const Combo& c : combos) {
            if (!fl->at(c.left).is_finite() || !gl->at(c.right).is_finite())
                all_finite = false;
        }

        if (all_finite) {
            std::map<Layer::Key, Complex> values;
            for (const Combo& c : combos) {
                const Layer& l1 = fl->at(c.left);
                const Layer& l2 = gl->at(c.right);
                const long long m2 = c.right.second;
                for (const auto& [pt, v2] : l2.exceptional()) {
                    const auto [s, p] = pt;
                    if (p < 0 || p + m2 < 0 || p + m < 0) continue;
                    const Complex v1 = detail::guarded_eval(l1, c.left.second, legs, s, p + m2);
                    if (v1 == Complex(0.0, 0.0)) continue;
                    values[pt] += v1 * v2;
                }
            }
            Layer layer = Layer::finite(std::move(values));
            if (!layer.is_trivially_zero()) out.emplace(target, std::move(layer));
            continue;
        }

        Complex tail(0.0, 0.0);
        DecayCert cert{0.0, 0.0};
        for (const Combo& c : combos) {
            const Layer& l1 = fl->at(c.left);
            const Layer& l2 = gl->at(c.right);
            const long long m2 = c.right.second;
            const Complex t1 = c.left.first == 0 ? l1.tail() : Complex(0.0, 0.0);
            const Complex t2 = c.right.first == 0 ? l2.tail() : Complex(0.0, 0.0);
            tail += t1 * t2;
            const double C1 = l1.decay().C, r1 = l1.decay().r;
            const double C2 = l2.decay().C, r2 = l2.decay().r;
            const double r = std::max(r1, r2);
            cert.r = std::max(cert.r, r);
            double C = C1 * detail::cert_pow(r1, std::min<long long>(m2, 0)) *
                           (std::abs(t2) + C2) +
                       std::abs(t1) * C2;
            // For m2 < 0 the right factor is evaluated below its valid range
            // when p < -m2, so the product is suppressed to zero there while
            // the tail product is not; cover that gap at the worst level.
            if (m2 < 0)
                C += (std::abs(t1) + C1) * (std::abs(t2) + C2) *
                     detail::cert_pow(r, m2 + 1);
            cert.C += C;
        }
        if (cert.r <= 0.0) cert.r = 0.5;

        std::vector<std::tuple<GElement::LayerKey, GElement::LayerKey>> pairs;
        pairs.reserve(combos.size());
        for (const Combo& c : combos) pairs.emplace_back(c.left, c.right);

        auto fn = [fl, gl, pairs, legs, m](int s, long long p) {
            Complex acc(0.0, 0.0);
            if (p < 0 || p + m < 0) return acc;
            for (const auto& [left, right] : pairs) {
                const long long m1 = left.second;
                const long long m2 = right.second;
                const Complex v2 = detail::guarded_eval(gl->at(right), m2, legs, s, p);
                if (v2 == Complex(0.0, 0.0)) continue;
                const Complex v1 =
                    detail::guarded_eval(fl->at(left), m1, legs, s, p + m2);
                acc += v1 * v2;
            }
            return acc;
        };
        out.emplace(target, Layer::tailed(std::move(fn), 0, tail, cert));
    }
    return GElement(f.legs(), std::move(out));
}

inline GElement operator*(const GElement& f, const GElement& g) { return convolve(f, g); }

// Involution: f*(gamma) = conj(f(gamma^{-1})).  The (k, m) layer of the result
// reads the (-k, -m) layer of the source at the shifted level.
inline GElement involve(const GElement& f) {
    const int legs = f.legs();
    auto fl = f.shared_layers();
    GElement::LayerMap out;
    for (const auto& [key, layer] : f.layers()) {
        const GElement::LayerKey target{-key.first, -key.second};
        const long long m_src = key.second;
        if (layer.is_finite()) {
            std::map<Layer::Key, Complex> values;
            for (const auto& [pt, v] : layer.exceptional()) {
                const auto [s, p_src] = pt;
                if (p_src < 0 || p_src + m_src < 0) continue;
                values[{s, p_src + m_src}] = std::conj(v);
            }
            Layer image = Layer::finite(std::move(values));
            if (!image.is_trivially_zero()) out.emplace(target, std::move(image));
        } else {
            auto src_key = key;
            DecayCert cert{layer.decay().C * detail::cert_pow(layer.decay().r, -m_src),
                           layer.decay().r};
            auto fn = [fl, src_key, legs, m_src](int s, long long p) {
                return std::conj(detail::guarded_eval(fl->at(src_key), m_src, legs, s,
                                                      p - m_src));
            };
            out.emplace(target, Layer::tailed(std::move(fn), 0,
                                              std::conj(layer.tail()), cert));
        }
    }
    return GElement(legs, std::move(out));
}

// --- constructors -----------------------------------------------------------

inline GElement fin_supp(int legs,
                         const std::vector<std::pair<Morphism, Complex>>& points) {
    std::map<GElement::LayerKey, std::map<Layer::Key, Complex>> buckets;
    for (const auto& [mor, v] : points) {
        if (mor.at_infinity())
            throw domain_error("finitely supported elements live over finite morphisms");
        if (mor.s() > legs) throw domain_error("morphism leg exceeds element leg count");
        buckets[{mor.k(), mor.m()}][{mor.s(), mor.source()}] += v;
    }
    GElement::LayerMap layers;
    for (auto& [key, values] : buckets) layers.emplace(key, Layer::finite(std::move(values)));
    return GElement(legs, std::move(layers));
}

inline GElement delta(int legs, const Morphism& g) {
    return fin_supp(legs, {{g, Complex(1.0, 0.0)}});
}

// Indicator of the saturation of levels >= n (boundary point included): the
// layer (0, -n) with constant value 1 on its valid range.
inline GElement chi_element(int legs, long long n) {
    GElement::LayerMap layers;
    layers.emplace(GElement::LayerKey{0, -n},
                   Layer::tailed([](int, long long) { return Complex(1.0, 0.0); },
                                 std::max<long long>(n, 0), Complex(1.0, 0.0),
                                 DecayCert{0.0, 0.5}));
    return GElement(legs, std::move(layers));
}

inline GElement unit_element(int legs) { return chi_element(legs, 0); }

// --- generator embeddings ----------------------------------------------------

inline GElement embed_c(const RepParams& params) {
    params.validate();
    const double q = params.q;
    const int l = params.l;
    DecayCert cert{static_cast<double>(l) * std::pow(q, 2.0 * (1 - l)),
                   std::pow(q, 2.0 * l)};
    GElement::LayerMap layers;
    layers.emplace(GElement::LayerKey{0, -1},
                   Layer::tailed([q, l](int s, long long p) {
                       return Complex(shift_weight(q, l, static_cast<int>(p), s), 0.0);
                   }, 0, Complex(1.0, 0.0), cert));
    return GElement(params.l, std::move(layers));
}

inline GElement embed_d(const RepParams& params) {
    params.validate();
    const double q = params.q;
    const int l = params.l;
    DecayCert cert{q, std::pow(q, static_cast<double>(l))};
    GElement::LayerMap layers;
    layers.emplace(GElement::LayerKey{-1, 0},
                   Layer::tailed([q, l](int s, long long p) {
                       return Complex(level_eigenvalue(q, l, static_cast<int>(p), s), 0.0);
                   }, 0, Complex(0.0, 0.0), cert));
    return GElement(params.l, std::move(layers));
}

inline GElement gel_power(const GElement& base, long long n) {
    GElement acc = unit_element(base.legs());
    for (long long i = 0; i < n; ++i) acc = convolve(acc, base);
    return acc;
}

// Image of a normal form under the embedding that sends the ordered monomial
// c^i d^j d*^k to the corresponding convolution product of generator images.
inline GElement embed_normalform(const NormalForm& nf, const RepParams& params) {
    params.validate();
    if (nf.l() != params.l)
        throw domain_error("normal form and parameters disagree on the order l");
    const GElement c = embed_c(params);
    const GElement cs = involve(c);
    const GElement d = embed_d(params);
    const GElement ds = involve(d);
    GElement acc(params.l, {});
    for (const auto& [mono, coeff] : nf.terms()) {
        GElement word = unit_element(params.l);
        if (mono.c_pow >= 0) word = convolve(word, gel_power(c, mono.c_pow));
        else word = convolve(word, gel_power(cs, -mono.c_pow));
        word = convolve(word, gel_power(d, mono.d_pow));
        word = convolve(word, gel_power(ds, mono.ds_pow));
        acc = add(acc, scale(word, coeff.eval(params.q)));
    }
    return acc;
}

// --- representations ---------------------------------------------------------

// Operator on the merged truncated space: the (k, m) layer contributes the
// value at (k, m, (s, p)) to the matrix entry ((t + k, s, p + m), (t, s, p)).
inline TruncOp induced_rep(const GElement& f, const RepParams& params) {
    params.validate();
    if (f.legs() != params.l)
        throw domain_error("element and parameters disagree on the leg count");
    const MergedBasis basis = params.merged_basis();
    std::vector<Triplet> entries;
    for (const auto& [key, layer] : f.layers()) {
        const auto [k, m] = key;
        const long long p_lo = std::max<long long>(0, -m);
        for (int s = 1; s <= params.l; ++s) {
            for (long long p = p_lo; p < params.N; ++p) {
                if (p + m >= params.N) continue;
                const Complex v = layer.eval(s, p);
                if (v == Complex(0.0, 0.0)) continue;
                for (long long t = -params.W; t <= params.W; ++t) {
                    const long long t_out = t + k;
                    if (t_out < -params.W || t_out > params.W) continue;
                    entries.emplace_back(
                        static_cast<int>(index_of(basis, static_cast<int>(t_out), s,
                                                  static_cast<int>(p + m))),
                        static_cast<int>(index_of(basis, static_cast<int>(t), s,
                                                  static_cast<int>(p))),
                        v);
                }
            }
        }
    }
    return TruncOp::from_triplets(Basis{basis}, entries);
}

inline long long layer_degree(const GElement::LayerKey& key) {
    return key.first - key.second;  // winding minus loop drop
}

inline bool is_homogeneous(const GElement& f, long long n) {
    for (const auto& [key, layer] : f.layers()) {
        if (layer_degree(key) != n) return false;
    }
    return true;
}

inline GElement degree_component(const GElement& f, long long n) {
    GElement::LayerMap out;
    for (const auto& [key, layer] : f.layers()) {
        if (layer_degree(key) == n) out.emplace(key, layer);
    }
    return GElement(f.legs(), std::move(out));
}

// Degree-n representation on the plain legs space: defined for homogeneous
// elements, sending the (m + n, m) layer value at (s, p) to entry
// ((s, p + m), (s, p)).
inline TruncOp rho_n(const GElement& f, long long n, const RepParams& params) {
    params.validate();
    if (f.legs() != params.l)
        throw domain_error("element and parameters disagree on the leg count");
    if (!is_homogeneous(f, n))
        throw grading_error("element is not homogeneous of degree " + std::to_string(n));
    const LegsBasis basis = params.legs_basis();
    std::vector<Triplet> entries;
    for (const auto& [key, layer] : f.layers()) {
        const long long m = key.second;
        const long long p_lo = std::max<long long>(0, -m);
        for (int s = 1; s <= params.l; ++s) {
            for (long long p = p_lo; p < params.N; ++p) {
                if (p + m >= params.N) continue;
                const Complex v = layer.eval(s, p);
                if (v == Complex(0.0, 0.0)) continue;
                entries.emplace_back(
                    static_cast<int>(index_of(basis, s, static_cast<int>(p + m))),
                    static_cast<int>(index_of(basis, s, static_cast<int>(p))), v);
            }
        }
    }
    return TruncOp::from_triplets(Basis{basis}, entries);
}

// The same degree-n representation extracted from the merged model through the
// isometries that pin the winding coordinate to a level window: column p lives
// at winding p + m - n, row p' at winding p' + m.  Requires the winding range
// to contain every touched coordinate, so W >= N - 1 + max(|m|, |m - n|).
inline TruncOp rho_via_window(const GElement& f, long long n, long long m,
                              const RepParams& params) {
    params.validate();
    const long long need = params.N - 1 + std::max(std::llabs(m), std::llabs(m - n));
    if (params.W < need)
        throw truncation_error("winding window too small: need W >= " +
                               std::to_string(need) + ", have " +
                               std::to_string(params.W));
    if (!is_homogeneous(f, n))
        throw grading_error("element is not homogeneous of degree " + std::to_string(n));
    const TruncOp merged = induced_rep(f, params);
    const Basis mbasis{params.merged_basis()};
    const LegsBasis basis = params.legs_basis();
    std::vector<Triplet> entries;
    for (int col = 0; col < merged.mat.outerSize(); ++col) {
        for (SpMat::InnerIterator it(merged.mat, col); it; ++it) {
            const BasisPoint out = point_of(mbasis, it.row());
            const BasisPoint in = point_of(mbasis, it.col());
            if (in.s != out.s) continue;
            if (in.t != in.p + m - n) continue;
            if (out.t != out.p + m) continue;
            entries.emplace_back(static_cast<int>(index_of(basis, out.s, out.p)),
                                 static_cast<int>(index_of(basis, in.s, in.p)),
                                 it.value());
        }
    }
    return TruncOp::from_triplets(Basis{basis}, entries);
}

}  // namespace qlens
