#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "polyimage/multi_index.hpp"

namespace polyimage {

/// Variable layout of a polynomial: an x-block of `nx` variables followed by a y-block of `ny`.
struct BlockSignature {
    int nx = 0;
    int ny = 0;

    int total() const { return nx + ny; }
    friend bool operator==(const BlockSignature& a, const BlockSignature& b) { return a.nx == b.nx && a.ny == b.ny; }
    friend bool operator!=(const BlockSignature& a, const BlockSignature& b) { return !(a == b); }
};

/// Coefficients whose magnitude falls below this after arithmetic are dropped.
inline constexpr double kCoefficientDropTolerance = 1e-14;

template <typename Scalar>
class SparsePolynomial {
public:
    using TermMap = std::map<MultiIndex, Scalar, GradedLexLess>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    SparsePolynomial() = default;
    explicit SparsePolynomial(BlockSignature sig) : sig_(sig) {}

    static SparsePolynomial constant(BlockSignature sig, Scalar c) {
        SparsePolynomial p(sig);
        p.add_term(MultiIndex(sig.total()), c);
        return p;
    }

    /// The coordinate polynomial for variable `index` (0-based over the concatenated blocks).
    static SparsePolynomial variable(BlockSignature sig, int index) {
        if (index < 0 || index >= sig.total()) throw std::out_of_range("SparsePolynomial::variable: index out of range");
        SparsePolynomial p(sig);
        p.add_term(MultiIndex::unit(sig.total(), index), Scalar(1));
        return p;
    }

    static SparsePolynomial monomial(BlockSignature sig, const MultiIndex& alpha, Scalar c = Scalar(1)) {
        SparsePolynomial p(sig);
        p.add_term(alpha, c);
        return p;
    }

    const BlockSignature& signature() const { return sig_; }
    int dim() const { return sig_.total(); }
    const TermMap& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    /// Maximum term degree; the zero polynomial has degree 0.
    int degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

    Scalar coefficient(const MultiIndex& alpha) const {
        auto it = terms_.find(alpha);
        return it == terms_.end() ? Scalar(0) : it->second;
    }

    void add_term(const MultiIndex& alpha, Scalar c) {
        if (alpha.dim() != dim()) throw std::invalid_argument("SparsePolynomial: term does not match block signature");
        auto [it, inserted] = terms_.try_emplace(alpha, c);
        if (!inserted) it->second += c;
        if (std::abs(it->second) < kCoefficientDropTolerance) terms_.erase(it);
    }

    SparsePolynomial& operator+=(const SparsePolynomial& other) {
        check_signature(other);
        for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
        return *this;
    }

    SparsePolynomial& operator-=(const SparsePolynomial& other) {
        check_signature(other);
        for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
        return *this;
    }

    SparsePolynomial& operator*=(Scalar s) {
        if (s == Scalar(0)) {
            terms_.clear();
            return *this;
        }
        for (auto it = terms_.begin(); it != terms_.end();) {
            it->second *= s;
            if (std::abs(it->second) < kCoefficientDropTolerance)
                it = terms_.erase(it);
            else
                ++it;
        }
        return *this;
    }

    friend SparsePolynomial operator+(SparsePolynomial a, const SparsePolynomial& b) { return a += b; }
    friend SparsePolynomial operator-(SparsePolynomial a, const SparsePolynomial& b) { return a -= b; }
    friend SparsePolynomial operator*(SparsePolynomial a, Scalar s) { return a *= s; }
    friend SparsePolynomial operator*(Scalar s, SparsePolynomial a) { return a *= s; }
    friend SparsePolynomial operator-(SparsePolynomial a) { return a *= Scalar(-1); }

    friend SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b) {
        a.check_signature(b);
        SparsePolynomial out(a.sig_);
        for (const auto& [alpha, ca] : a.terms_)
            for (const auto& [beta, cb] : b.terms_) {
                auto [it, inserted] = out.terms_.try_emplace(alpha + beta, ca * cb);
                if (!inserted) it->second += ca * cb;
            }
        out.prune();
        return out;
    }

    friend bool operator==(const SparsePolynomial& a, const SparsePolynomial& b) {
        return a.sig_ == b.sig_ && a.terms_ == b.terms_;
    }

    /// Direct evaluation: sum of c * prod_i x_i^alpha_i with per-variable power tables.
    Scalar evaluate(const Eigen::Ref<const Vector>& point) const {
        if (point.size() != dim()) throw std::invalid_argument("SparsePolynomial::evaluate: point length mismatch");
        if (terms_.empty()) return Scalar(0);
        const int max_deg = degree();
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> powers(dim(), max_deg + 1);
        for (int i = 0; i < dim(); ++i) {
            powers(i, 0) = Scalar(1);
            for (int k = 1; k <= max_deg; ++k) powers(i, k) = powers(i, k - 1) * point(i);
        }
        Scalar total(0);
        for (const auto& [alpha, c] : terms_) {
            Scalar term = c;
            for (int i = 0; i < dim(); ++i)
                if (alpha[i] != 0) term *= powers(i, alpha[i]);
            total += term;
        }
        return total;
    }

    /// Partial derivative with respect to variable `index`.
    SparsePolynomial derivative(int index) const {
        SparsePolynomial out(sig_);
        for (const auto& [alpha, c] : terms_) {
            const int e = alpha[index];
            if (e == 0) continue;
            std::vector<int> ex = alpha.exponents();
            ex[static_cast<std::size_t>(index)] -= 1;
            out.add_term(MultiIndex(std::move(ex)), c * Scalar(e));
        }
        return out;
    }

    /// Re-express over a larger signature, shifting every variable by `offset`.
    SparsePolynomial embedded(BlockSignature target, int offset) const {
        SparsePolynomial out(target);
        for (const auto& [alpha, c] : terms_) out.terms_.emplace(alpha.embedded(target.total(), offset), c);
        return out;
    }

    /// Rename variables: variable i of this polynomial becomes variable `mapping[i]` of `target`.
    SparsePolynomial remapped(BlockSignature target, const std::vector<int>& mapping) const {
        if (static_cast<int>(mapping.size()) != dim()) throw std::invalid_argument("SparsePolynomial::remapped: bad mapping");
        SparsePolynomial out(target);
        for (const auto& [alpha, c] : terms_) {
            std::vector<int> ex(static_cast<std::size_t>(target.total()), 0);
            for (int i = 0; i < dim(); ++i) ex[static_cast<std::size_t>(mapping[static_cast<std::size_t>(i)])] += alpha[i];
            out.add_term(MultiIndex(std::move(ex)), c);
        }
        return out;
    }

    /// Variables (0-based) that appear with a nonzero exponent in some term.
    std::vector<int> support() const {
        std::vector<bool> used(static_cast<std::size_t>(dim()), false);
        for (const auto& [alpha, c] : terms_)
            for (int i = 0; i < dim(); ++i)
                if (alpha[i] != 0) used[static_cast<std::size_t>(i)] = true;
        std::vector<int> out;
        for (int i = 0; i < dim(); ++i)
            if (used[static_cast<std::size_t>(i)]) out.push_back(i);
        return out;
    }

    Scalar max_abs_coefficient() const {
        Scalar m(0);
        for (const auto& [alpha, c] : terms_) m = std::max(m, Scalar(std::abs(c)));
        return m;
    }

private:
    void check_signature(const SparsePolynomial& other) const {
        if (other.sig_ != sig_) throw std::invalid_argument("SparsePolynomial: block signature mismatch");
    }

    void prune() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (std::abs(it->second) < kCoefficientDropTolerance)
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    BlockSignature sig_;
    TermMap terms_;
};

using Polynomial = SparsePolynomial<double>;

template <typename Scalar>
SparsePolynomial<Scalar> poly_mul(const SparsePolynomial<Scalar>& a, const SparsePolynomial<Scalar>& b) {
    return a * b;
}

template <typename Scalar>
Scalar poly_eval(const SparsePolynomial<Scalar>& p,
                 const Eigen::Ref<const typename SparsePolynomial<Scalar>::Vector>& point) {
    return p.evaluate(point);
}

template <typename Scalar>
SparsePolynomial<Scalar> poly_pow(const SparsePolynomial<Scalar>& p, int exponent) {
    if (exponent < 0) throw std::invalid_argument("poly_pow: negative exponent");
    auto result = SparsePolynomial<Scalar>::constant(p.signature(), Scalar(1));
    auto base = p;
    while (exponent > 0) {
        if (exponent & 1) result = result * base;
        exponent >>= 1;
        if (exponent) base = base * base;
    }
    return result;
}

/// Sum of squares of the coordinates: x_1^2 + ... + x_n^2 (over all variables of `sig`).
inline Polynomial squared_norm(BlockSignature sig) {
    Polynomial p(sig);
    for (int i = 0; i < sig.total(); ++i) {
        std::vector<int> ex(static_cast<std::size_t>(sig.total()), 0);
        ex[static_cast<std::size_t>(i)] = 2;
        p.add_term(MultiIndex(std::move(ex)), 1.0);
    }
    return p;
}

} // namespace polyimage
