#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

#include "polyimage/polynomial.hpp"
#include "polyimage/polynomial_map.hpp"
#include "polyimage/semialgebraic.hpp"

namespace polyimage {

/// Line and column are 1-based; line 0 means the whole file.
class ParseError : public std::invalid_argument {
public:
    ParseError(int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// A problem file: S in x-space (lifted variables appended after the base ones), B in y-space, the map f.
struct ProblemSpec {
    std::vector<std::string> x_names;
    std::vector<std::string> y_names;
    /// x-variables declared in [vars]; the rest come from [lift].
    int base_dim = 0;
    /// g >= 0, over {n, 0}.
    std::vector<Polynomial> constraints;
    /// e == 0.
    std::vector<Polynomial> equations;
    BoundingSet::Kind b_kind = BoundingSet::Kind::kBall;
    Eigen::VectorXd b_center;
    double b_radius = 1.0;
    Eigen::VectorXd b_lo;
    Eigen::VectorXd b_hi;
    std::vector<Polynomial> map;
    /// 0-based x indices.
    std::vector<std::vector<int>> cliques;
    bool pareto = false;
    /// Relaxation order for the Pareto bounds (0: the minimal order).
    int pareto_order = 0;
    /// Affine rescaling applied by pareto_scale: f_j = a_j + (b_j - a_j) * ftilde_j.
    std::vector<double> scale_a;
    std::vector<double> scale_b;
    /// The map already holds ftilde; scale_a, scale_b only record how to map back.
    bool scaled = false;

    int n() const { return static_cast<int>(x_names.size()); }
    int m() const { return static_cast<int>(y_names.size()); }
    /// Constraints and equations, lifted variables included.
    SemialgebraicSet S() const;
    BoundingSet B() const;
    PolynomialMap f() const;
    /// True if f_j = x_j for every j (the projection variant applies).
    bool is_projection() const;
    bool has_lift() const { return base_dim < n(); }
};

ProblemSpec parse_problem(const std::string& text);
ProblemSpec parse_problem_file(const std::string& path);
/// Canonical text; parse_problem(emit_problem(p)) reproduces p exactly.
std::string emit_problem(const ProblemSpec& spec);

/// Polynomial as text with the given variable names and shortest round-trip coefficients.
std::string format_polynomial(const Polynomial& p, const std::vector<std::string>& names);

/// Parses one expression over the named variables (signature {names.size(), 0}).
Polynomial parse_expression(const std::string& text, const std::vector<std::string>& names);

} // namespace polyimage
