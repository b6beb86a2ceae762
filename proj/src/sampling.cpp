#include "polyimage/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyimage/random.hpp"

namespace polyimage {

namespace {

constexpr long long kAbortWindow = 1000000;
constexpr double kMinAcceptance = 1e-4;

void check_abort(long long proposals, long long accepted) {
    if (proposals == kAbortWindow && static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(kAbortWindow))
        throw SamplingAborted("sampling: acceptance rate below 1e-4 after 1e6 proposals; set too thin for rejection sampling");
}

// If g is a univariate quadratic -a x_i^2 + b x_i + c with a > 0, the interval where g >= 0.
bool quadratic_interval(const Polynomial& g, int& var, double& lo, double& hi) {
    const auto support = g.support();
    if (support.size() != 1 || g.degree() != 2) return false;
    var = support[0];
    const int d = g.dim();
    const double a = -g.coefficient(MultiIndex::unit(d, var) + MultiIndex::unit(d, var));
    const double b = g.coefficient(MultiIndex::unit(d, var));
    const double c = g.coefficient(MultiIndex(d));
    if (!(a > 0.0)) return false;
    const double disc = b * b + 4.0 * a * c;
    if (disc < 0.0) return false;
    const double s = std::sqrt(disc);
    lo = (b - s) / (2.0 * a);
    hi = (b + s) / (2.0 * a);
    return true;
}

} // namespace

SampleBox implied_box(const SemialgebraicSet& A, int dims) {
    if (dims < 1 || dims > A.dim()) throw std::invalid_argument("implied_box: bad dimension");
    SampleBox box{Eigen::VectorXd::Constant(A.dim(), -std::numeric_limits<double>::infinity()),
                  Eigen::VectorXd::Constant(A.dim(), std::numeric_limits<double>::infinity())};
    for (const auto& g : A.constraints()) {
        std::vector<int> vars;
        if (auto c = ball_constant(g, &vars)) {
            const double r = std::sqrt(*c);
            for (int i : vars) {
                box.lo(i) = std::max(box.lo(i), -r);
                box.hi(i) = std::min(box.hi(i), r);
            }
            continue;
        }
        int var = 0;
        double lo = 0.0;
        double hi = 0.0;
        if (quadratic_interval(g, var, lo, hi)) {
            box.lo(var) = std::max(box.lo(var), lo);
            box.hi(var) = std::min(box.hi(var), hi);
        }
    }
    box.lo.conservativeResize(dims);
    box.hi.conservativeResize(dims);
    if (!box.lo.allFinite() || !box.hi.allFinite())
        throw std::invalid_argument("implied_box: some variable has no ball or interval constraint");
    if (!(box.lo.array() < box.hi.array()).all()) throw std::invalid_argument("implied_box: empty box");
    return box;
}

SampleBox implied_box(const SemialgebraicSet& A) { return implied_box(A, A.dim()); }

SampleResult sample_set(const SemialgebraicSet& A, const SampleBox& bound, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_set: count must be >= 1");
    if (bound.dim() != A.dim()) throw std::invalid_argument("sample_set: bound dimension mismatch");
    SampleResult out;
    out.seed = seed;
    out.points.resize(A.dim(), count);
    CounterRng rng(seed);
    Eigen::VectorXd x(A.dim());
    int kept = 0;
    while (kept < count) {
        for (int i = 0; i < A.dim(); ++i) x(i) = rng.uniform(bound.lo(i), bound.hi(i));
        ++out.proposals;
        if (A.contains(x)) out.points.col(kept++) = x;
        check_abort(out.proposals, kept);
    }
    out.acceptance_rate = static_cast<double>(kept) / static_cast<double>(out.proposals);
    return out;
}

std::vector<double> real_roots(const std::vector<double>& coefficients) {
    std::vector<double> c = coefficients;
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    const int deg = static_cast<int>(c.size()) - 1;
    std::vector<double> roots;
    if (deg < 1) return roots;
    if (deg == 1) return {-c[0] / c[1]};
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(deg)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    auto eval = [&](double t, double& dp) {
        double p = 0.0;
        dp = 0.0;
        for (int k = deg; k >= 0; --k) {
            dp = dp * t + p;
            p = p * t + c[static_cast<std::size_t>(k)];
        }
        return p;
    };
    for (int i = 0; i < deg; ++i) {
        const auto z = es.eigenvalues()(i);
        // Double roots (x3^2 = p^2 with p = 0) come out with small imaginary parts.
        if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real()))) continue;
        double t = z.real();
        for (int it = 0; it < 3; ++it) {
            double dp = 0.0;
            const double p = eval(t, dp);
            if (dp == 0.0 || std::abs(p) <= 1e-15 * scale) break;
            t -= p / dp;
        }
        roots.push_back(t);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

// Coefficients in x_t of e with coordinates < t fixed from x.
std::vector<double> univariate_slice(const Polynomial& e, int t, const Eigen::VectorXd& x) {
    std::vector<double> coef(static_cast<std::size_t>(e.degree() + 1), 0.0);
    for (const auto& [alpha, c] : e.terms()) {
        double v = c;
        for (int i = 0; i < t; ++i)
            if (alpha[i]) v *= std::pow(x(i), alpha[i]);
        coef[static_cast<std::size_t>(alpha[t])] += v;
    }
    return coef;
}

int max_var(const Polynomial& g) {
    const auto s = g.support();
    return s.empty() ? -1 : s.back();
}

} // namespace

SampleResult sample_lifted(const SemialgebraicSet& A, int base_dim, const std::vector<Polynomial>& equations,
                           const SampleBox& base_bound, int count, std::uint64_t seed, double equality_tol) {
    if (count < 1) throw std::invalid_argument("sample_lifted: count must be >= 1");
    const int n = A.dim();
    if (base_dim < 1 || base_dim > n || base_bound.dim() != base_dim)
        throw std::invalid_argument("sample_lifted: bad base dimension");
    // Equation used for each lifted coordinate, and constraints grouped by the last variable they touch.
    std::vector<const Polynomial*> solver(static_cast<std::size_t>(n), nullptr);
    for (const auto& e : equations) {
        if (e.signature() != A.signature()) throw std::invalid_argument("sample_lifted: equation signature mismatch");
        const int t = max_var(e);
        if (t >= base_dim && !solver[static_cast<std::size_t>(t)]) solver[static_cast<std::size_t>(t)] = &e;
    }
    for (int t = base_dim; t < n; ++t)
        if (!solver[static_cast<std::size_t>(t)])
            throw std::invalid_argument("sample_lifted: no equation determines lifted variable " + std::to_string(t + 1));
    std::vector<std::vector<const Polynomial*>> checks(static_cast<std::size_t>(n));
    for (const auto& g : A.constraints()) checks[static_cast<std::size_t>(std::max(max_var(g), 0))].push_back(&g);

    SampleResult out;
    out.seed = seed;
    out.points.resize(n, count);
    CounterRng rng(seed);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    int kept = 0;
    while (kept < count) {
        ++out.proposals;
        for (int i = 0; i < base_dim; ++i) x(i) = rng.uniform(base_bound.lo(i), base_bound.hi(i));
        bool ok = true;
        for (int i = 0; i < base_dim && ok; ++i)
            for (const Polynomial* g : checks[static_cast<std::size_t>(i)]) ok = ok && g->evaluate(x) >= 0.0;
        for (int t = base_dim; t < n && ok; ++t) {
            ok = false;
            for (double root : real_roots(univariate_slice(*solver[static_cast<std::size_t>(t)], t, x))) {
                x(t) = root;
                bool good = true;
                for (const Polynomial* g : checks[static_cast<std::size_t>(t)]) good = good && g->evaluate(x) >= -equality_tol;
                if (good) {
                    ok = true;
                    break;
                }
            }
        }
        if (ok) out.points.col(kept++) = x;
        check_abort(out.proposals, kept);
    }
    out.acceptance_rate = static_cast<double>(kept) / static_cast<double>(out.proposals);
    return out;
}

} // namespace polyimage
