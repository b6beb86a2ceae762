#include <doctest.h>

#include <cmath>

#include "examples.hpp"
#include "polyimage/sampling.hpp"

using namespace polyimage;
using namespace testdata;

TEST_SUITE("sampling") {

TEST_CASE("unit disk acceptance rate") {
    const auto S = unit_disk_x();
    const SampleBox box{Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)};
    const auto res = sample_set(S, box, 20000, 11);
    const double p = M_PI / 4;
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(res.proposals));
    CHECK(std::abs(res.acceptance_rate - p) <= 3 * sigma);
    CHECK(res.points.cols() == 20000);
    for (Eigen::Index k = 0; k < res.points.cols(); ++k) CHECK(S.contains(res.points.col(k)));
    CHECK(res.seed == 11);
}

TEST_CASE("sampling is reproducible per seed") {
    const auto S = unit_disk_x();
    const auto box = implied_box(S);
    const auto a = sample_set(S, box, 500, 3);
    const auto b = sample_set(S, box, 500, 3);
    const auto c = sample_set(S, box, 500, 4);
    CHECK(a.points == b.points);
    CHECK(a.proposals == b.proposals);
    CHECK(a.points != c.points);
}

TEST_CASE("implied boxes") {
    const auto box = implied_box(unit_disk_x());
    CHECK(box.lo == Eigen::Vector2d(-1, -1));
    CHECK(box.hi == Eigen::Vector2d(1, 1));
    const auto pareto = load("pareto.txt");
    const auto pbox = implied_box(pareto.S());
    CHECK(pbox.lo(0) == doctest::Approx(0.0));
    CHECK(pbox.hi(0) == doctest::Approx(5.0));
    CHECK(pbox.hi(1) == doctest::Approx(3.0));
    const BlockSignature xs{2, 0};
    CHECK_THROWS_AS(implied_box(SemialgebraicSet(xs, {Polynomial::variable(xs, 0)})), std::invalid_argument);
}

TEST_CASE("thin sets abort") {
    const BlockSignature xs{2, 0};
    const auto x1 = Polynomial::variable(xs, 0);
    // |x1| <= 1e-6 inside the unit disk.
    SemialgebraicSet thin(xs, {Polynomial::constant(xs, 1.0) - squared_norm(xs), Polynomial::constant(xs, 1e-12) - x1 * x1});
    CHECK_THROWS_AS(sample_set(thin, implied_box(unit_disk_x()), 10, 1), SamplingAborted);
}

TEST_CASE("lifted sampling solves the equations") {
    const auto spec = load("lifted_abs.txt");
    const auto S = spec.S();
    const auto res = sample_lifted(S, 2, spec.equations, implied_box(S, 2), 2000, 9);
    for (Eigen::Index k = 0; k < res.points.cols(); ++k) {
        const Eigen::VectorXd x = res.points.col(k);
        const double p = x(0) + x(0) * x(1) - x(0) * x(0);
        CHECK(std::abs(x(2) - std::abs(p)) <= 1e-9);
        CHECK(S.contains(x, 1e-9));
    }
}

TEST_CASE("real roots") {
    // (t - 1)(t + 2)(t - 3) = t^3 - 2t^2 - 5t + 6
    const auto r = real_roots({6, -5, -2, 1});
    REQUIRE(r.size() == 3);
    CHECK(r[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r[2] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(real_roots({1, 0, 1}).empty());
    const auto lin = real_roots({-4, 2});
    REQUIRE(lin.size() == 1);
    CHECK(lin[0] == 2.0);
}

} // TEST_SUITE
