#pragma once

#include <Eigen/Core>

#include <vector>

#include "polyimage/polynomial.hpp"

namespace polyimage {

/// f : R^n -> R^m with polynomial components in the x-block.
class PolynomialMap {
public:
    PolynomialMap() = default;
    PolynomialMap(int n, std::vector<Polynomial> components);

    int n() const { return n_; }
    int m() const { return static_cast<int>(components_.size()); }
    /// Max component degree.
    int degree() const { return degree_; }
    const std::vector<Polynomial>& components() const { return components_; }
    const Polynomial& operator[](int j) const { return components_[static_cast<std::size_t>(j)]; }

    Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    /// Columns of `xs` are points; returns the images column by column.
    Eigen::MatrixXd evaluate_columns(const Eigen::Ref<const Eigen::MatrixXd>& xs) const;
    /// m x n Jacobian at x.
    Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
    int n_ = 0;
    int degree_ = 0;
    std::vector<Polynomial> components_;
};

/// The coordinate projection x -> (x_1, ..., x_m).
PolynomialMap projection_map(int n, int m);

/// h_f(x, y) = -sum_j (y_j - f_j(x))^2 over the joint signature {n, m}.
Polynomial build_h_f(const PolynomialMap& f);

/// v(f(x)); v lives in a signature with ny == f.m() (nx ignored and must be 0).
Polynomial poly_compose(const Polynomial& v, const PolynomialMap& f);

/// f(x)^beta for every beta in `betas`, sharing partial products. Results live in {n, 0}.
std::vector<Polynomial> monomial_images(const PolynomialMap& f, const std::vector<MultiIndex>& betas);

} // namespace polyimage
