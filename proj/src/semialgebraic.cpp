#include "polyimage/semialgebraic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace polyimage {

std::optional<double> ball_constant(const Polynomial& g, std::vector<int>* vars) {
    double c = 0.0;
    std::vector<int> found;
    for (const auto& [alpha, coef] : g.terms()) {
        if (alpha.is_zero()) {
            c = coef;
            continue;
        }
        if (alpha.degree() != 2 || coef != -1.0) return std::nullopt;
        int idx = -1;
        for (int i = 0; i < alpha.dim(); ++i)
            if (alpha[i] == 2) idx = i;
        if (idx < 0) return std::nullopt;
        found.push_back(idx);
    }
    if (c <= 0.0 || found.empty()) return std::nullopt;
    std::sort(found.begin(), found.end());
    if (vars) *vars = found;
    return c;
}

SemialgebraicSet::SemialgebraicSet(BlockSignature sig, std::vector<Polynomial> constraints) : sig_(sig) {
    for (auto& g : constraints) add_constraint(std::move(g));
}

void SemialgebraicSet::add_constraint(Polynomial g) {
    if (g.signature() != sig_) throw std::invalid_argument("SemialgebraicSet: constraint signature mismatch");
    half_degrees_.push_back((g.degree() + 1) / 2);
    constraints_.push_back(std::move(g));
}

void SemialgebraicSet::add_equation(Polynomial e) {
    if (e.signature() != sig_) throw std::invalid_argument("SemialgebraicSet: equation signature mismatch");
    if (e.is_zero()) throw std::invalid_argument("SemialgebraicSet: zero equation");
    equations_.push_back(std::move(e));
}

int SemialgebraicSet::max_half_degree() const {
    int r = 0;
    for (int h : half_degrees_) r = std::max(r, h);
    for (const auto& e : equations_) r = std::max(r, (e.degree() + 1) / 2);
    return r;
}

std::optional<double> SemialgebraicSet::ball_constant() const {
    for (const auto& g : constraints_) {
        std::vector<int> vars;
        auto c = polyimage::ball_constant(g, &vars);
        if (c && static_cast<int>(vars.size()) == dim()) return c;
    }
    return std::nullopt;
}

bool SemialgebraicSet::is_archimedean() const {
    std::vector<bool> covered(static_cast<std::size_t>(dim()), false);
    for (const auto& g : constraints_) {
        std::vector<int> vars;
        if (polyimage::ball_constant(g, &vars))
            for (int i : vars) covered[static_cast<std::size_t>(i)] = true;
    }
    return std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
}

double SemialgebraicSet::min_constraint_value(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& g : constraints_) v = std::min(v, g.evaluate(point));
    return v;
}

bool SemialgebraicSet::contains(const Eigen::Ref<const Eigen::VectorXd>& point, double tol) const {
    for (const auto& g : constraints_)
        if (g.evaluate(point) < -tol) return false;
    for (const auto& e : equations_)
        if (std::abs(e.evaluate(point)) > tol + 1e-9) return false;
    return true;
}

std::vector<int> SemialgebraicSet::constraints_supported_on(const std::vector<int>& vars) const {
    std::set<int> allowed(vars.begin(), vars.end());
    std::vector<int> out;
    for (int j = 0; j < size(); ++j) {
        auto sup = constraints_[static_cast<std::size_t>(j)].support();
        if (std::all_of(sup.begin(), sup.end(), [&](int i) { return allowed.count(i) > 0; })) out.push_back(j);
    }
    return out;
}

SemialgebraicSet ensure_archimedean(const SemialgebraicSet& A, double N) {
    if (!(N > 0.0)) throw std::invalid_argument("ensure_archimedean: N must be positive");
    if (A.is_archimedean()) return A;
    SemialgebraicSet out = A;
    out.add_constraint(Polynomial::constant(A.signature(), N) - squared_norm(A.signature()));
    return out;
}

BoundingSet BoundingSet::ball(Eigen::VectorXd center, double radius) {
    if (center.size() < 1) throw std::invalid_argument("BoundingSet::ball: empty center");
    if (!(radius > 0.0)) throw std::invalid_argument("BoundingSet::ball: radius must be positive");
    BoundingSet B;
    B.kind_ = Kind::kBall;
    const int m = static_cast<int>(center.size());
    const BlockSignature sig{0, m};
    Polynomial g = Polynomial::constant(sig, radius * radius);
    for (int i = 0; i < m; ++i) {
        Polynomial d = Polynomial::variable(sig, i) - Polynomial::constant(sig, center(i));
        g -= d * d;
    }
    B.set_ = SemialgebraicSet(sig, {g});
    if (!B.set_.is_archimedean()) {
        const double outer = center.norm() + radius;
        B.set_ = ensure_archimedean(B.set_, 1.1 * outer * outer);
    }
    B.lo_ = center.array() - radius;
    B.hi_ = center.array() + radius;
    B.center_ = std::move(center);
    B.radius_ = radius;
    return B;
}

BoundingSet BoundingSet::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    if (lo.size() < 1 || lo.size() != hi.size()) throw std::invalid_argument("BoundingSet::box: bad bounds");
    if (!(lo.array() < hi.array()).all()) throw std::invalid_argument("BoundingSet::box: need lo < hi componentwise");
    BoundingSet B;
    B.kind_ = Kind::kBox;
    const int m = static_cast<int>(lo.size());
    const BlockSignature sig{0, m};
    std::vector<Polynomial> gs;
    double N = 0.0;
    for (int i = 0; i < m; ++i) {
        Polynomial yi = Polynomial::variable(sig, i);
        gs.push_back((yi - Polynomial::constant(sig, lo(i))) * (Polynomial::constant(sig, hi(i)) - yi));
        N += std::max(lo(i) * lo(i), hi(i) * hi(i));
    }
    B.set_ = ensure_archimedean(SemialgebraicSet(sig, std::move(gs)), 1.1 * N);
    B.center_ = 0.5 * (lo + hi);
    B.lo_ = std::move(lo);
    B.hi_ = std::move(hi);
    return B;
}

double BoundingSet::volume() const {
    if (kind_ == Kind::kBox) return (hi_ - lo_).prod();
    const double m = dim();
    return std::pow(M_PI, m / 2.0) / std::tgamma(m / 2.0 + 1.0) * std::pow(radius_, m);
}

bool BoundingSet::contains(const Eigen::Ref<const Eigen::VectorXd>& y) const {
    if (kind_ == Kind::kBox) return (y.array() >= lo_.array()).all() && (y.array() <= hi_.array()).all();
    return (y - center_).squaredNorm() <= radius_ * radius_;
}

MomentVector::MomentVector(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
    for (const auto& beta : enumerate_multi_indices(dim, max_degree)) values_.emplace(beta, 0.0);
}

double MomentVector::operator[](const MultiIndex& beta) const {
    auto it = values_.find(beta);
    if (it == values_.end()) throw std::out_of_range("MomentVector: index outside truncation");
    return it->second;
}

void MomentVector::set(const MultiIndex& beta, double value) {
    auto it = values_.find(beta);
    if (it == values_.end()) throw std::out_of_range("MomentVector: index outside truncation");
    it->second = value;
}

namespace {

double unit_ball_moment(const MultiIndex& beta) {
    double num = 1.0;
    for (int i = 0; i < beta.dim(); ++i) {
        if (beta[i] % 2 != 0) return 0.0;
        num *= std::tgamma((beta[i] + 1) / 2.0);
    }
    return num / std::tgamma(beta.degree() / 2.0 + beta.dim() / 2.0 + 1.0);
}

} // namespace

MomentVector lebesgue_moments(const BoundingSet& B, int max_deg) {
    if (max_deg < 0) throw std::invalid_argument("lebesgue_moments: negative degree");
    const int m = B.dim();
    MomentVector z(m, max_deg);
    if (B.kind() == BoundingSet::Kind::kBox) {
        for (const auto& [beta, value] : z.values()) {
            double v = 1.0;
            for (int i = 0; i < m; ++i) {
                const int e = beta[i] + 1;
                v *= (std::pow(B.hi()(i), e) - std::pow(B.lo()(i), e)) / e;
            }
            z.set(beta, v);
        }
        return z;
    }
    // Ball: y = c + R u, expand (c + R u)^beta binomially against unit-ball moments of u.
    const double R = B.radius();
    const Eigen::VectorXd& c = B.center();
    for (const auto& [beta, value] : z.values()) {
        double total = 0.0;
        for (const auto& gamma : enumerate_multi_indices(m, beta.degree())) {
            bool below = true;
            for (int i = 0; i < m && below; ++i) below = gamma[i] <= beta[i];
            if (!below) continue;
            const double u = unit_ball_moment(gamma);
            if (u == 0.0) continue;
            double w = u * std::pow(R, gamma.degree());
            for (int i = 0; i < m; ++i)
                w *= static_cast<double>(binomial(beta[i], gamma[i])) * std::pow(c(i), beta[i] - gamma[i]);
            total += w;
        }
        z.set(beta, total * std::pow(R, m));
    }
    return z;
}

SemialgebraicSet make_product_set(const SemialgebraicSet& S, const BoundingSet& B) {
    const BlockSignature joint{S.dim(), B.dim()};
    SemialgebraicSet K(joint);
    for (const auto& g : S.constraints()) K.add_constraint(g.embedded(joint, 0));
    for (const auto& g : B.set().constraints()) K.add_constraint(g.embedded(joint, S.dim()));
    for (const auto& e : S.equations()) K.add_equation(e.embedded(joint, 0));
    return K;
}

std::vector<Polynomial> graph_constraints(const PolynomialMap& f) {
    const BlockSignature joint{f.n(), f.m()};
    std::vector<Polynomial> out;
    for (int j = 0; j < f.m(); ++j) {
        Polynomial diff = Polynomial::variable(joint, f.n() + j) - f[j].embedded(joint, 0);
        out.push_back(diff);
        out.push_back(-diff);
    }
    return out;
}

SemialgebraicSet make_lifted_set(const SemialgebraicSet& S, const PolynomialMap& f, const BoundingSet& B) {
    if (S.dim() != f.n() || B.dim() != f.m()) throw std::invalid_argument("make_lifted_set: dimension mismatch");
    SemialgebraicSet out = make_product_set(S, B);
    for (auto& g : graph_constraints(f)) out.add_constraint(std::move(g));
    return out;
}

const char* method_name(Method m) {
    switch (m) {
    case Method::kMethod1: return "method1";
    case Method::kMethod2: return "method2";
    case Method::kMethod2Lift: return "method2-lift";
    case Method::kProjection: return "projection";
    }
    return "?";
}

std::optional<Method> parse_method(const std::string& name) {
    for (Method m : {Method::kMethod1, Method::kMethod2, Method::kMethod2Lift, Method::kProjection})
        if (name == method_name(m)) return m;
    return std::nullopt;
}

int minimal_order(Method method, const SemialgebraicSet& S, const BoundingSet& B, const PolynomialMap& f) {
    const int d = f.degree();
    const int rs = S.max_half_degree();
    const int rb = B.set().max_half_degree();
    int r = 1;
    switch (method) {
    case Method::kMethod1:
        r = std::max({d, rs, rb});
        break;
    case Method::kMethod2:
        if (d == 0) throw std::invalid_argument("minimal_order: Method 2 needs a map of degree >= 1");
        r = std::max(r, (S.max_half_degree() + d - 1) / d);
        r = std::max(r, rb);
        break;
    case Method::kMethod2Lift:
        r = std::max({(d + 1) / 2, rs, rb});
        break;
    case Method::kProjection:
        r = std::max(rs, rb);
        break;
    }
    return std::max(r, 1);
}

} // namespace polyimage
