#pragma once

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyimage/polynomial.hpp"
#include "polyimage/polynomial_map.hpp"

namespace polyimage {

/// If g == c - sum_{i in I} x_i^2 with c > 0 and I non-empty, returns c and fills `vars` with I.
std::optional<double> ball_constant(const Polynomial& g, std::vector<int>* vars = nullptr);

/// { z : g_j(z) >= 0 for all j, e_k(z) = 0 for all k } in the variables of a block signature.
/// Equations get free polynomial multipliers in certificates instead of a pair of SOS blocks.
class SemialgebraicSet {
public:
    SemialgebraicSet() = default;
    explicit SemialgebraicSet(BlockSignature sig, std::vector<Polynomial> constraints = {});

    const BlockSignature& signature() const { return sig_; }
    int dim() const { return sig_.total(); }
    int size() const { return static_cast<int>(constraints_.size()); }
    const std::vector<Polynomial>& constraints() const { return constraints_; }
    const Polynomial& constraint(int j) const { return constraints_[static_cast<std::size_t>(j)]; }
    const std::vector<Polynomial>& equations() const { return equations_; }
    int num_equations() const { return static_cast<int>(equations_.size()); }
    /// r_j = ceil(deg g_j / 2), inequalities only.
    const std::vector<int>& half_degrees() const { return half_degrees_; }
    /// Over inequalities and equations.
    int max_half_degree() const;

    void add_constraint(Polynomial g);
    void add_equation(Polynomial e);

    /// N from a constraint N - |z|^2 covering every variable, if present.
    std::optional<double> ball_constant() const;
    /// True if some family of constraints c - sum_{i in I} x_i^2 covers every variable.
    bool is_archimedean() const;

    double min_constraint_value(const Eigen::Ref<const Eigen::VectorXd>& point) const;
    /// Equations count as satisfied within tol + 1e-9.
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& point, double tol = 0.0) const;

    /// Constraints whose support lies entirely in `vars` (0-based).
    std::vector<int> constraints_supported_on(const std::vector<int>& vars) const;

private:
    BlockSignature sig_;
    std::vector<Polynomial> constraints_;
    std::vector<Polynomial> equations_;
    std::vector<int> half_degrees_;
};

/// Appends N - |z|^2 unless the set is already Archimedean.
SemialgebraicSet ensure_archimedean(const SemialgebraicSet& A, double N);

/// The simple set B in y-space: a Euclidean ball or an axis-aligned box.
class BoundingSet {
public:
    enum class Kind { kBall, kBox };

    static BoundingSet ball(Eigen::VectorXd center, double radius);
    static BoundingSet box(Eigen::VectorXd lo, Eigen::VectorXd hi);

    Kind kind() const { return kind_; }
    int dim() const { return set_.dim(); }
    const SemialgebraicSet& set() const { return set_; }
    const Eigen::VectorXd& center() const { return center_; }
    double radius() const { return radius_; }
    /// Bounding rectangle of B (the box itself for boxes).
    const Eigen::VectorXd& lo() const { return lo_; }
    const Eigen::VectorXd& hi() const { return hi_; }

    double volume() const;
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& y) const;

private:
    BoundingSet() = default;

    Kind kind_ = Kind::kBall;
    Eigen::VectorXd center_;
    double radius_ = 0.0;
    Eigen::VectorXd lo_;
    Eigen::VectorXd hi_;
    SemialgebraicSet set_;
};

/// Truncated moment sequence z_beta for |beta| <= max_degree.
class MomentVector {
public:
    MomentVector() = default;
    MomentVector(int dim, int max_degree);

    int dim() const { return dim_; }
    int max_degree() const { return max_degree_; }
    double operator[](const MultiIndex& beta) const;
    void set(const MultiIndex& beta, double value);
    const std::map<MultiIndex, double, GradedLexLess>& values() const { return values_; }

private:
    int dim_ = 0;
    int max_degree_ = 0;
    std::map<MultiIndex, double, GradedLexLess> values_;
};

/// Moments of the Lebesgue measure on B up to degree max_deg.
MomentVector lebesgue_moments(const BoundingSet& B, int max_deg);

/// K = S x B in the joint signature {n, m}: S-constraints first, then B-constraints; S's equations carried over.
SemialgebraicSet make_product_set(const SemialgebraicSet& S, const BoundingSet& B);

/// The 2m constraints y_j - f_j(x) >= 0 and f_j(x) - y_j >= 0 over {n, m}.
std::vector<Polynomial> graph_constraints(const PolynomialMap& f);

/// K plus the graph constraints.
SemialgebraicSet make_lifted_set(const SemialgebraicSet& S, const PolynomialMap& f, const BoundingSet& B);

enum class Method { kMethod1, kMethod2, kMethod2Lift, kProjection };

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

/// Smallest relaxation order for which the method's program is well posed.
int minimal_order(Method method, const SemialgebraicSet& S, const BoundingSet& B, const PolynomialMap& f);

} // namespace polyimage
