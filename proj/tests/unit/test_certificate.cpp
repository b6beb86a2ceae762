#include <doctest.h>

#include <cmath>
#include <sstream>

#include "examples.hpp"
#include "polyimage/certificate.hpp"
#include "polyimage/relaxation.hpp"
#include "polyimage/sampling.hpp"
#include "polyimage/sdp_solver.hpp"

using namespace polyimage;
using namespace testdata;

namespace {

Certificate constant_certificate(double c) {
    Certificate cert;
    cert.method = Method::kMethod1;
    cert.n = 2;
    cert.m = 2;
    cert.q = Polynomial::constant(BlockSignature{0, 2}, c);
    return cert;
}

struct Solved {
    ConicProgram prog;
    GramLayout layout;
    SolverResult result;
};

Solved solve_ball_image(int r) {
    auto [prog, layout] = build_method1_primal(unit_disk_x(), unit_disk_y(), ball_image_map(), r, {true, true});
    auto result = solve(prog, {1e-8, 200});
    return {std::move(prog), std::move(layout), std::move(result)};
}

} // namespace

TEST_SUITE("certificate") {

TEST_CASE("solved certificates pass their own residual check") {
    const auto s = solve_ball_image(2);
    REQUIRE(s.result.usable());
    const auto cert = extract_certificate(s.result, s.layout);
    CHECK(cert.accepted());
    CHECK(cert.q.degree() <= 4);
    const auto xs = sample_set(unit_disk_x(), implied_box(unit_disk_x()), 2000, 5).points;
    const auto rep = containment_check(cert, ball_image_map(), xs);
    CHECK(rep.samples == 2000);
    CHECK(rep.violations == 0);
    CHECK(rep.worst_margin >= -1e-6);
}

TEST_CASE("a perturbed Gram matrix shows up in the residual") {
    auto s = solve_ball_image(2);
    REQUIRE(s.result.usable());
    auto bad = s.result;
    bool perturbed = false;
    for (auto& X : bad.X) {
        if (X.rows() > 1) {
            X(0, 1) += 0.05;
            X(1, 0) += 0.05;
            perturbed = true;
            break;
        }
    }
    REQUIRE(perturbed);
    const auto cert = extract_certificate(bad, s.layout);
    CHECK(cert.residual >= 0.05);
    CHECK_FALSE(cert.accepted());
}

TEST_CASE("a negated certificate fails containment") {
    const auto s = solve_ball_image(2);
    REQUIRE(s.result.usable());
    auto cert = extract_certificate(s.result, s.layout);
    cert.q = cert.q * -1.0;
    const auto xs = sample_set(unit_disk_x(), implied_box(unit_disk_x()), 500, 5).points;
    CHECK(containment_check(cert, ball_image_map(), xs).violations > 0);
}

TEST_CASE("grid of a constant certificate") {
    const auto rows = grid_evaluate(constant_certificate(1.0), unit_disk_y(), 3, 3);
    REQUIRE(rows.size() == 9);
    int inside = 0;
    for (const auto& r : rows) inside += r.inside ? 1 : 0;
    CHECK(inside == 5);
    CHECK(rows.front().y1 == -1.0);
    CHECK(rows.front().y2 == -1.0);
    std::ostringstream a;
    std::ostringstream b;
    write_grid_csv(rows, a);
    write_grid_csv(grid_evaluate(constant_certificate(1.0), unit_disk_y(), 3, 3), b);
    CHECK(a.str() == b.str());
    CHECK_THROWS_AS(grid_evaluate(constant_certificate(1.0), unit_disk_y(), 1, 3), std::invalid_argument);
}

TEST_CASE("volume of constant certificates") {
    const auto all = estimate_volume(constant_certificate(1.0), unit_disk_y(), 100000, 3);
    CHECK(std::abs(all.estimate - M_PI) <= 3 * all.std_error + 1e-12);
    const auto none = estimate_volume(constant_certificate(-1.0), unit_disk_y(), 10000, 3);
    CHECK(none.hits == 0);
    CHECK(none.estimate == 0.0);
    const auto again = estimate_volume(constant_certificate(1.0), unit_disk_y(), 100000, 3);
    CHECK(again.estimate == all.estimate);
}

TEST_CASE("empirical h on the graph and for a constant map") {
    const auto S = unit_disk_x();
    const auto f = ball_image_map();
    const auto xs = sample_set(S, implied_box(S), 200, 8).points;
    for (Eigen::Index k = 0; k < 20; ++k) {
        const Eigen::VectorXd y = f.evaluate(xs.col(k));
        CHECK(empirical_h(y, f, S, xs) >= -1e-9);
    }
    const BlockSignature xsig{2, 0};
    const PolynomialMap c(2, {Polynomial::constant(xsig, 0.25), Polynomial::constant(xsig, -0.5)});
    CounterRng rng(4);
    for (int k = 0; k < 10; ++k) {
        const Eigen::VectorXd y = random_point(rng, 2);
        const double expected = -((y(0) - 0.25) * (y(0) - 0.25) + (y(1) + 0.5) * (y(1) + 0.5));
        CHECK(empirical_h(y, c, S, 50, 2) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("image membership") {
    const auto S = unit_disk_x();
    const auto f = ball_image_map();
    const auto xs = sample_set(S, implied_box(S), 500, 8).points;
    Eigen::MatrixXd ys(2, xs.cols());
    for (Eigen::Index k = 0; k < xs.cols(); ++k) ys.col(k) = f.evaluate(xs.col(k));
    CHECK(image_member(f.evaluate(Eigen::Vector2d(0.3, -0.2)), f, S, xs, ys));
    // |f(x)|^2 <= (|x1|(1 + |x2|) + |x2| + |x1|^3) / 2 stays well below 2 on the disk.
    CHECK_FALSE(image_member(Eigen::Vector2d(2.0, 2.0), f, S, xs, ys));
}

} // TEST_SUITE
