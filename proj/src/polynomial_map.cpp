#include "polyimage/polynomial_map.hpp"

#include <map>
#include <stdexcept>

namespace polyimage {

PolynomialMap::PolynomialMap(int n, std::vector<Polynomial> components) : n_(n), components_(std::move(components)) {
    if (n < 1) throw std::invalid_argument("PolynomialMap: n must be >= 1");
    if (components_.empty()) throw std::invalid_argument("PolynomialMap: at least one component required");
    for (const auto& c : components_) {
        if (c.signature() != BlockSignature{n, 0}) throw std::invalid_argument("PolynomialMap: component is not a polynomial in x");
        degree_ = std::max(degree_, c.degree());
    }
}

Eigen::VectorXd PolynomialMap::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::VectorXd out(m());
    for (int j = 0; j < m(); ++j) out(j) = components_[static_cast<std::size_t>(j)].evaluate(x);
    return out;
}

Eigen::MatrixXd PolynomialMap::evaluate_columns(const Eigen::Ref<const Eigen::MatrixXd>& xs) const {
    Eigen::MatrixXd out(m(), xs.cols());
    for (Eigen::Index k = 0; k < xs.cols(); ++k) out.col(k) = evaluate(xs.col(k));
    return out;
}

Eigen::MatrixXd PolynomialMap::jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::MatrixXd J(m(), n_);
    for (int j = 0; j < m(); ++j)
        for (int i = 0; i < n_; ++i) J(j, i) = components_[static_cast<std::size_t>(j)].derivative(i).evaluate(x);
    return J;
}

PolynomialMap projection_map(int n, int m) {
    if (m < 1 || m > n) throw std::invalid_argument("projection_map: need 1 <= m <= n");
    std::vector<Polynomial> comps;
    for (int j = 0; j < m; ++j) comps.push_back(Polynomial::variable({n, 0}, j));
    return PolynomialMap(n, std::move(comps));
}

Polynomial build_h_f(const PolynomialMap& f) {
    const BlockSignature joint{f.n(), f.m()};
    Polynomial h(joint);
    for (int j = 0; j < f.m(); ++j) {
        Polynomial diff = Polynomial::variable(joint, f.n() + j) - f[j].embedded(joint, 0);
        h -= diff * diff;
    }
    return h;
}

std::vector<Polynomial> monomial_images(const PolynomialMap& f, const std::vector<MultiIndex>& betas) {
    const BlockSignature xs{f.n(), 0};
    // Powers f_j^k are cached per component.
    std::vector<std::vector<Polynomial>> powers(static_cast<std::size_t>(f.m()));
    auto power = [&](int j, int k) -> const Polynomial& {
        auto& cache = powers[static_cast<std::size_t>(j)];
        if (cache.empty()) cache.push_back(Polynomial::constant(xs, 1.0));
        while (static_cast<int>(cache.size()) <= k) cache.push_back(cache.back() * f[j]);
        return cache[static_cast<std::size_t>(k)];
    };
    std::map<MultiIndex, Polynomial, GradedLexLess> memo;
    std::vector<Polynomial> out;
    out.reserve(betas.size());
    for (const auto& beta : betas) {
        if (beta.dim() != f.m()) throw std::invalid_argument("monomial_images: index dimension differs from m");
        auto it = memo.find(beta);
        if (it != memo.end()) {
            out.push_back(it->second);
            continue;
        }
        Polynomial p = Polynomial::constant(xs, 1.0);
        for (int j = 0; j < f.m(); ++j)
            if (beta[j] > 0) p = p * power(j, beta[j]);
        memo.emplace(beta, p);
        out.push_back(std::move(p));
    }
    return out;
}

Polynomial poly_compose(const Polynomial& v, const PolynomialMap& f) {
    if (v.signature().nx != 0 || v.signature().ny != f.m())
        throw std::invalid_argument("poly_compose: v must be a polynomial in the y-block with dim equal to m");
    std::vector<MultiIndex> betas;
    for (const auto& [beta, c] : v.terms()) betas.push_back(beta);
    auto images = monomial_images(f, betas);
    Polynomial out({f.n(), 0});
    std::size_t k = 0;
    for (const auto& [beta, c] : v.terms()) out += images[k++] * c;
    return out;
}

} // namespace polyimage
