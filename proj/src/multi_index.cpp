#include "polyimage/multi_index.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace polyimage {

MultiIndex::MultiIndex(int dim) : exponents_(static_cast<std::size_t>(dim), 0) {}

MultiIndex::MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
    for (int e : exponents_) {
        if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
        degree_ += e;
    }
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents) : MultiIndex(std::vector<int>(exponents)) {}

MultiIndex MultiIndex::unit(int dim, int i) {
    MultiIndex out(dim);
    out.exponents_[static_cast<std::size_t>(i)] = 1;
    out.degree_ = 1;
    return out;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
    if (other.dim() != dim()) throw std::invalid_argument("MultiIndex: dimension mismatch in sum");
    MultiIndex out(*this);
    for (std::size_t i = 0; i < exponents_.size(); ++i) out.exponents_[i] += other.exponents_[i];
    out.degree_ = degree_ + other.degree_;
    return out;
}

MultiIndex MultiIndex::embedded(int dim, int offset) const {
    if (offset < 0 || offset + this->dim() > dim) throw std::invalid_argument("MultiIndex: embedding out of range");
    MultiIndex out(dim);
    for (int i = 0; i < this->dim(); ++i) out.exponents_[static_cast<std::size_t>(offset + i)] = (*this)[i];
    out.degree_ = degree_;
    return out;
}

MultiIndex MultiIndex::slice(int offset, int len) const {
    if (offset < 0 || len < 0 || offset + len > dim()) throw std::invalid_argument("MultiIndex: slice out of range");
    return MultiIndex(std::vector<int>(exponents_.begin() + offset, exponents_.begin() + offset + len));
}

std::ostream& operator<<(std::ostream& os, const MultiIndex& alpha) {
    os << '(';
    for (int i = 0; i < alpha.dim(); ++i) os << (i ? "," : "") << alpha[i];
    return os << ')';
}

bool GradedLexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    const auto& ea = a.exponents();
    const auto& eb = b.exponents();
    const std::size_t n = std::min(ea.size(), eb.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (ea[i] != eb[i]) return ea[i] > eb[i];
    }
    return ea.size() < eb.size();
}

namespace {

void enumerate_degree(int dim, int pos, int remaining, std::vector<int>& current, std::vector<MultiIndex>& out) {
    if (pos == dim - 1) {
        current[static_cast<std::size_t>(pos)] = remaining;
        out.emplace_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[static_cast<std::size_t>(pos)] = e;
        enumerate_degree(dim, pos + 1, remaining - e, current, out);
    }
}

} // namespace

std::vector<MultiIndex> enumerate_multi_indices(int dim, int max_deg) {
    if (dim < 1) throw std::invalid_argument("enumerate_multi_indices: dim must be >= 1");
    if (max_deg < 0) return {};
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(binomial(dim + max_deg, max_deg)));
    std::vector<int> current(static_cast<std::size_t>(dim), 0);
    for (int d = 0; d <= max_deg; ++d) enumerate_degree(dim, 0, d, current, out);
    return out;
}

std::int64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t result = 1;
    for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return result;
}

} // namespace polyimage
