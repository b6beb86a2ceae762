#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <vector>

namespace polyimage {

/// Exponent vector of a monomial x^alpha, with its total degree cached.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(int dim);
    explicit MultiIndex(std::vector<int> exponents);
    MultiIndex(std::initializer_list<int> exponents);

    int dim() const { return static_cast<int>(exponents_.size()); }
    int degree() const { return degree_; }
    int operator[](int i) const { return exponents_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& exponents() const { return exponents_; }

    bool is_zero() const { return degree_ == 0; }

    /// Unit index e_i in `dim` variables.
    static MultiIndex unit(int dim, int i);

    MultiIndex operator+(const MultiIndex& other) const;

    /// Copy of this index placed at `offset` inside a longer zero vector of length `dim`.
    MultiIndex embedded(int dim, int offset) const;
    /// Sub-vector [offset, offset + len).
    MultiIndex slice(int offset, int len) const;

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.exponents_ == b.exponents_; }
    friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return !(a == b); }

private:
    std::vector<int> exponents_;
    int degree_ = 0;
};

std::ostream& operator<<(std::ostream& os, const MultiIndex& alpha);

/// Graded lexicographic order: lower total degree first, then x1 > x2 > ... within a degree.
struct GradedLexLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// All alpha in N^dim with |alpha| <= max_deg, in graded lex order.
std::vector<MultiIndex> enumerate_multi_indices(int dim, int max_deg);

/// Binomial coefficient C(n, k) as a 64-bit integer (0 when k < 0 or k > n).
std::int64_t binomial(int n, int k);

} // namespace polyimage
