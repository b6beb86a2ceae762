#pragma once

// Problem data shared by the unit and acceptance tests.

#include <Eigen/Core>

#include <string>

#include "polyimage/polynomial.hpp"
#include "polyimage/polynomial_map.hpp"
#include "polyimage/problem.hpp"
#include "polyimage/random.hpp"
#include "polyimage/semialgebraic.hpp"

namespace testdata {

using namespace polyimage;

inline std::string fixture(const std::string& name) { return std::string(POLYIMAGE_FIXTURE_DIR) + "/" + name; }

inline ProblemSpec load(const std::string& name) { return parse_problem_file(fixture(name)); }

inline SemialgebraicSet unit_disk_x() {
    const BlockSignature xs{2, 0};
    return SemialgebraicSet(xs, {Polynomial::constant(xs, 1.0) - squared_norm(xs)});
}

inline BoundingSet unit_disk_y() { return BoundingSet::ball(Eigen::VectorXd::Zero(2), 1.0); }

inline PolynomialMap ball_image_map() {
    const BlockSignature xs{2, 0};
    auto x1 = Polynomial::variable(xs, 0);
    auto x2 = Polynomial::variable(xs, 1);
    return PolynomialMap(2, {(x1 + x1 * x2) * 0.5, (x2 - x1 * x1 * x1) * 0.5});
}

inline Eigen::VectorXd random_point(CounterRng& rng, int dim, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = rng.uniform(lo, hi);
    return x;
}

} // namespace testdata
