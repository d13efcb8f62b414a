#pragma once

#include <cmath>
#include <map>
#include <string>
#include <variant>

#include "qlens/errors.hpp"
#include "qlens/gelement.hpp"
#include "qlens/rep.hpp"
#include "qlens/trunc_op.hpp"

namespace qlens {

// Laurent polynomial on the unit circle, stored by Fourier coefficient.
// Multiplication is coefficient convolution; zero coefficients are never kept.
class CircleLaurent {
  public:
    using CoeffMap = std::map<long long, Complex>;

    CircleLaurent() = default;
    explicit CircleLaurent(CoeffMap coeffs) : coeffs_(std::move(coeffs)) { prune(); }

    static CircleLaurent monomial(long long n, Complex a) {
        CircleLaurent out;
        if (a != Complex(0.0, 0.0)) out.coeffs_[n] = a;
        return out;
    }

    const CoeffMap& coeffs() const { return coeffs_; }

    Complex coeff(long long n) const {
        auto it = coeffs_.find(n);
        return it == coeffs_.end() ? Complex(0.0, 0.0) : it->second;
    }

    bool is_zero() const { return coeffs_.empty(); }

    Complex eval(Complex z) const {
        if (z == Complex(0.0, 0.0))
            throw domain_error("circle functions cannot be evaluated at zero");
        Complex acc(0.0, 0.0);
        const Complex zinv = Complex(1.0, 0.0) / z;
        for (const auto& [n, a] : coeffs_) {
            Complex zp(1.0, 0.0);
            const Complex base = n >= 0 ? z : zinv;
            for (long long i = std::llabs(n); i > 0; --i) zp *= base;
            acc += a * zp;
        }
        return acc;
    }

    CircleLaurent& operator+=(const CircleLaurent& other) {
        for (const auto& [n, a] : other.coeffs_) coeffs_[n] += a;
        prune();
        return *this;
    }

    friend CircleLaurent operator+(CircleLaurent a, const CircleLaurent& b) {
        a += b;
        return a;
    }

    friend CircleLaurent operator-(const CircleLaurent& a, const CircleLaurent& b) {
        CircleLaurent out = a;
        for (const auto& [n, v] : b.coeffs_) out.coeffs_[n] -= v;
        out.prune();
        return out;
    }

    friend CircleLaurent operator*(const CircleLaurent& a, const CircleLaurent& b) {
        CoeffMap out;
        for (const auto& [n, av] : a.coeffs_)
            for (const auto& [m, bv] : b.coeffs_) out[n + m] += av * bv;
        return CircleLaurent(std::move(out));
    }

    friend CircleLaurent operator*(Complex z, const CircleLaurent& a) {
        CoeffMap out;
        if (z != Complex(0.0, 0.0))
            for (const auto& [n, v] : a.coeffs_) out[n] = z * v;
        return CircleLaurent(std::move(out));
    }

    friend bool operator==(const CircleLaurent&, const CircleLaurent&) = default;

  private:
    void prune() {
        for (auto it = coeffs_.begin(); it != coeffs_.end();) {
            if (it->second == Complex(0.0, 0.0)) it = coeffs_.erase(it);
            else ++it;
        }
    }

    CoeffMap coeffs_;
};

inline double max_coeff_dev(const CircleLaurent& a, const CircleLaurent& b) {
    double dev = 0.0;
    for (const auto& [n, v] : a.coeffs()) dev = std::max(dev, std::abs(v - b.coeff(n)));
    for (const auto& [n, v] : b.coeffs()) dev = std::max(dev, std::abs(a.coeff(n) - v));
    return dev;
}

inline std::string to_string(const CircleLaurent& f) {
    if (f.coeffs().empty()) return "0";
    std::string out;
    for (const auto& [n, a] : f.coeffs()) {
        if (!out.empty()) out += " + ";
        out += "(" + std::to_string(a.real()) + (a.imag() < 0 ? " - " : " + ") +
               std::to_string(std::abs(a.imag())) + "i)";
        if (n != 0) out += " . z^" + std::to_string(n);
    }
    return out;
}

// Boundary restriction: the function on the circle whose n-th Fourier
// coefficient is the boundary value of the loop-degree (-n) layer.  Winding
// layers vanish at the boundary, so only (0, m) layers contribute.
inline CircleLaurent symbol(const GElement& f) {
    CircleLaurent::CoeffMap coeffs;
    for (const auto& [key, layer] : f.layers()) {
        if (key.first != 0) continue;
        const Complex t = layer.tail();
        if (t != Complex(0.0, 0.0)) coeffs[-key.second] += t;
    }
    return CircleLaurent(std::move(coeffs));
}

// One-dimensional character: evaluate the boundary symbol at a circle point.
inline Complex character_pi0(const GElement& f, Complex mu) {
    detail::require_phase(mu);
    return symbol(f).eval(mu);
}

// Membership in the boundary-vanishing ideal: every layer tail must vanish.
inline bool in_ideal(const GElement& f, double tol = 0.0) {
    for (const auto& [key, layer] : f.layers()) {
        if (std::abs(layer.tail()) > tol) return false;
    }
    return true;
}

// Canonical lift of a circle function: z^n pulls back to the saturation
// indicator of degree n, whose boundary value is exactly 1.  symbol(lift(g))
// reproduces g with no rounding, which is what makes f - lift(symbol(f)) an
// exact ideal member.
inline GElement lift(const CircleLaurent& g, int legs) {
    GElement acc(legs, {});
    for (const auto& [n, a] : g.coeffs())
        acc = add(acc, scale(chi_element(legs, n), a));
    return acc;
}

namespace detail {

// Integer powers of a unit-modulus number by repeated multiplication, so that
// the trivial cases stay exact (1^k == 1, i^k exact) instead of passing
// through exp/log.
inline Complex unit_power(Complex lambda, long long k) {
    const Complex base = k >= 0 ? lambda : std::conj(lambda);
    Complex acc(1.0, 0.0);
    for (long long i = std::llabs(k); i > 0; --i) acc *= base;
    return acc;
}

}  // namespace detail

// The loop of operators attached to leg s: winding layers are rotated by
// lambda^{-k} and summed into the single-leg model.  For embedded generator
// expressions this reproduces the irreducible representation with loop
// parameter lambda.
inline TruncOp eval_loop(const GElement& f, Complex lambda, int s,
                         const RepParams& params) {
    params.validate();
    detail::require_phase(lambda);
    if (f.legs() != params.l)
        throw domain_error("element and parameters disagree on the leg count");
    const IrrepBasis basis = params.irrep_basis(s);
    std::vector<Triplet> entries;
    for (const auto& [key, layer] : f.layers()) {
        const auto [k, m] = key;
        const Complex factor = detail::unit_power(lambda, -k);
        for (long long p = std::max<long long>(0, -m); p < params.N; ++p) {
            if (p + m >= params.N) continue;
            const Complex v = layer.eval(s, p);
            if (v == Complex(0.0, 0.0)) continue;
            entries.emplace_back(static_cast<int>(p + m), static_cast<int>(p),
                                 factor * v);
        }
    }
    return TruncOp::from_triplets(Basis{basis}, entries);
}

// Reads the circle function of an asymptotically Toeplitz single-leg operator:
// the coefficient of z^{-j} is the mean of the j-th subdiagonal over the level
// range [margin, N-1-band], and the read is rejected when any kept diagonal
// wanders from its mean by more than var_tol.
inline CircleLaurent toeplitz_symbol(const TruncOp& M, int band, int margin,
                                     double var_tol) {
    if (!std::holds_alternative<IrrepBasis>(M.basis))
        throw domain_error("symbol extraction expects a single-leg operator");
    const int N = std::get<IrrepBasis>(M.basis).N;
    if (band < 0 || margin < band || band + margin >= N)
        throw domain_error("need 0 <= band <= margin and band + margin < N");

    CircleLaurent::CoeffMap coeffs;
    double worst = 0.0;
    for (int j = -band; j <= band; ++j) {
        Complex sum(0.0, 0.0);
        int count = 0;
        for (int p = margin; p <= N - 1 - band; ++p) {
            sum += M.mat.coeff(p + j, p);
            ++count;
        }
        const Complex mean = sum / static_cast<double>(count);
        for (int p = margin; p <= N - 1 - band; ++p)
            worst = std::max(worst, std::abs(M.mat.coeff(p + j, p) - mean));
        if (mean != Complex(0.0, 0.0)) coeffs[-j] = mean;
    }
    if (worst > var_tol)
        throw toeplitz_error(worst, "operator is not Toeplitz at this truncation: "
                                    "diagonal deviation " +
                                        std::to_string(worst));
    return CircleLaurent(std::move(coeffs));
}

}  // namespace qlens
