#include <doctest.h>

#include <set>

#include "polyimage/polynomial.hpp"
#include "polyimage/polynomial_map.hpp"
#include "polyimage/random.hpp"

using namespace polyimage;

namespace {

// Independent count of alpha in N^dim with |alpha| <= r.
long count_indices(int dim, int r) {
    if (dim == 0) return 1;
    long total = 0;
    for (int e = 0; e <= r; ++e) total += count_indices(dim - 1, r - e);
    return total;
}

Polynomial random_poly(CounterRng& rng, BlockSignature sig, int max_deg, int terms) {
    Polynomial p(sig);
    for (int t = 0; t < terms; ++t) {
        std::vector<int> ex(static_cast<std::size_t>(sig.total()), 0);
        int budget = static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_deg + 1));
        while (budget-- > 0) ex[rng.next() % ex.size()] += 1;
        // Integer coefficients keep the distributivity check exact.
        p.add_term(MultiIndex(ex), static_cast<double>(static_cast<int>(rng.next() % 11) - 5));
    }
    return p;
}

Eigen::VectorXd random_point(CounterRng& rng, int dim) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = rng.uniform(-1.0, 1.0);
    return x;
}

PolynomialMap ball_image_map() {
    const BlockSignature xs{2, 0};
    auto x1 = Polynomial::variable(xs, 0);
    auto x2 = Polynomial::variable(xs, 1);
    return PolynomialMap(2, {(x1 + x1 * x2) * 0.5, (x2 - x1 * x1 * x1) * 0.5});
}

} // namespace

TEST_SUITE("poly") {

TEST_CASE("enumerate small cases") {
    auto a = enumerate_multi_indices(1, 1);
    REQUIRE(a.size() == 2);
    CHECK(a[0] == MultiIndex{0});
    CHECK(a[1] == MultiIndex{1});

    auto b = enumerate_multi_indices(2, 2);
    REQUIRE(b.size() == 6);
    CHECK(b.front() == MultiIndex{0, 0});
    CHECK(b[3] == MultiIndex{2, 0});
    CHECK(b[4] == MultiIndex{1, 1});
    CHECK(b.back() == MultiIndex{0, 2});

    CHECK(enumerate_multi_indices(4, 3).size() == static_cast<std::size_t>(count_indices(4, 3)));
    CHECK(count_indices(4, 3) == 35);
    CHECK_THROWS_AS(enumerate_multi_indices(0, 2), std::invalid_argument);
}

TEST_CASE("enumeration count, distinctness and order") {
    for (int dim = 1; dim <= 6; ++dim)
        for (int r = 0; r <= 8; ++r) {
            auto idx = enumerate_multi_indices(dim, r);
            CHECK(static_cast<long>(idx.size()) == count_indices(dim, r));
            CHECK(static_cast<std::int64_t>(idx.size()) == binomial(dim + r, r));
            std::set<std::vector<int>> seen;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                seen.insert(idx[k].exponents());
                if (k > 0) CHECK(GradedLexLess{}(idx[k - 1], idx[k]));
            }
            CHECK(seen.size() == idx.size());
        }
}

TEST_CASE("multi-index degree invariant") {
    MultiIndex a{3, 0, 2};
    CHECK(a.degree() == 5);
    CHECK((a + MultiIndex{1, 1, 1}).degree() == 8);
    CHECK(a.embedded(5, 1) == MultiIndex{0, 3, 0, 2, 0});
    CHECK(a.slice(1, 2) == MultiIndex{0, 2});
    CHECK_THROWS(MultiIndex(std::vector<int>{1, -1}));
}

TEST_CASE("poly_mul examples") {
    const BlockSignature s{2, 0};
    auto x1 = Polynomial::variable(s, 0);
    auto x2 = Polynomial::variable(s, 1);
    auto one = Polynomial::constant(s, 1.0);

    auto p = poly_mul(x1 + one, x1 - one);
    CHECK(p.size() == 2);
    CHECK(p.coefficient(MultiIndex{2, 0}) == 1.0);
    CHECK(p.coefficient(MultiIndex{0, 0}) == -1.0);

    CHECK(poly_mul(x1 + x2, Polynomial(s)).is_zero());
    CHECK(Polynomial(s).degree() == 0);

    // Pascal's triangle as the binomial oracle.
    std::vector<std::vector<double>> pascal{{1}};
    for (int k = 1; k <= 3; ++k) {
        std::vector<double> row(static_cast<std::size_t>(k + 1), 1.0);
        for (int j = 1; j < k; ++j) row[static_cast<std::size_t>(j)] = pascal.back()[static_cast<std::size_t>(j - 1)] + pascal.back()[static_cast<std::size_t>(j)];
        pascal.push_back(row);
    }
    auto cube = poly_pow(x1 + x2, 3);
    CHECK(cube.size() == 4);
    for (int j = 0; j <= 3; ++j) CHECK(cube.coefficient(MultiIndex{3 - j, j}) == pascal[3][static_cast<std::size_t>(j)]);

    CHECK_THROWS_AS(poly_mul(x1, Polynomial::variable({1, 1}, 0)), std::invalid_argument);
}

TEST_CASE("poly_mul properties on random inputs") {
    CounterRng rng(7);
    const BlockSignature s{2, 1};
    for (int trial = 0; trial < 50; ++trial) {
        auto a = random_poly(rng, s, 4, 6);
        auto b = random_poly(rng, s, 4, 6);
        auto c = random_poly(rng, s, 4, 6);
        CHECK(poly_mul(a, b + c) == poly_mul(a, b) + poly_mul(a, c));
        CHECK(poly_mul(a, b) == poly_mul(b, a));
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd pt = random_point(rng, 3);
            const double lhs = poly_eval(poly_mul(a, b), pt);
            const double rhs = poly_eval(a, pt) * poly_eval(b, pt);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST_CASE("poly_eval examples") {
    const BlockSignature s{2, 0};
    auto p = Polynomial::variable(s, 0) * Polynomial::variable(s, 0) + Polynomial::variable(s, 1);
    CHECK(poly_eval(p, Eigen::Vector2d(2, 3)) == 7.0);
    CHECK(poly_eval(Polynomial(s), Eigen::Vector2d(0.3, -4)) == 0.0);
    CHECK_THROWS_AS(poly_eval(p, Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
}

TEST_CASE("derivative") {
    const BlockSignature s{2, 0};
    auto x1 = Polynomial::variable(s, 0);
    auto x2 = Polynomial::variable(s, 1);
    auto p = poly_pow(x1, 3) * x2 + x2 * 2.0;
    auto dp = p.derivative(0);
    CHECK(dp == poly_pow(x1, 2) * x2 * 3.0);
    CHECK(p.derivative(1) == poly_pow(x1, 3) + Polynomial::constant(s, 2.0));
}

TEST_CASE("poly_compose") {
    auto f = ball_image_map();
    const BlockSignature ys{0, 2};
    const BlockSignature xs{2, 0};
    auto x1 = Polynomial::variable(xs, 0);
    auto x2 = Polynomial::variable(xs, 1);

    CHECK(poly_compose(Polynomial::variable(ys, 0), f) == (x1 + x1 * x2) * 0.5);
    CHECK(poly_compose(Polynomial::constant(ys, 1.0), f) == Polynomial::constant(xs, 1.0));
    auto sq = poly_compose(poly_pow(Polynomial::variable(ys, 1), 2), f);
    CHECK(sq == poly_mul(f[1], f[1]));
    CHECK(sq.degree() == 6);
    CHECK_THROWS_AS(poly_compose(Polynomial::variable({0, 3}, 0), f), std::invalid_argument);

    CounterRng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        auto v = random_poly(rng, ys, 4, 5);
        auto vf = poly_compose(v, f);
        CHECK(vf.degree() <= v.degree() * f.degree());
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd x = random_point(rng, 2);
            const double lhs = poly_eval(vf, x);
            const double rhs = poly_eval(v, f.evaluate(x));
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST_CASE("build_h_f") {
    const BlockSignature joint{1, 1};
    PolynomialMap id(1, {Polynomial::variable({1, 0}, 0)});
    auto diff = Polynomial::variable(joint, 1) - Polynomial::variable(joint, 0);
    CHECK(build_h_f(id) == -(diff * diff));

    auto f = ball_image_map();
    auto h = build_h_f(f);
    CHECK(h.signature() == BlockSignature{2, 2});
    CHECK(h.degree() == 6);

    Eigen::Vector2d x0(0.5, 0.5);
    Eigen::Vector4d g0;
    g0 << x0, f.evaluate(x0);
    CHECK(std::abs(poly_eval(h, g0)) <= 1e-15);

    CounterRng rng(3);
    for (int k = 0; k < 1000; ++k) {
        Eigen::VectorXd x = random_point(rng, 2);
        Eigen::VectorXd y = f.evaluate(x);
        Eigen::Vector4d pt;
        pt << x, y;
        CHECK(poly_eval(h, pt) <= 1e-12);
        Eigen::VectorXd dir = random_point(rng, 2);
        dir *= (0.1 + rng.uniform()) / dir.norm();
        pt << x, y + dir;
        CHECK(poly_eval(h, pt) < 0.0);
    }
}

TEST_CASE("coefficient drop tolerance") {
    const BlockSignature s{1, 0};
    auto x = Polynomial::variable(s, 0);
    auto p = x + Polynomial::constant(s, 1.0);
    p -= x * (1.0 - 1e-16);
    CHECK(p.size() == 1);
}

}
