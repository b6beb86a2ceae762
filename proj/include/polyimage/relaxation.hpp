#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polyimage/conic_program.hpp"
#include "polyimage/polynomial.hpp"
#include "polyimage/polynomial_map.hpp"
#include "polyimage/semialgebraic.hpp"

namespace polyimage {

/// Raised when a membership target has a monomial that no multiplier can produce.
class InfeasibleMembership : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// constant + sum_k x_k * P_k, where x_k are free scalars of the program.
struct AffinePolynomial {
    Polynomial constant;
    std::vector<std::pair<int, Polynomial>> linear;

    explicit AffinePolynomial(BlockSignature sig = {}) : constant(sig) {}
    Polynomial evaluate(const Eigen::VectorXd& x_free) const;
    int degree() const;
};

struct GramBlockInfo {
    std::string name;
    int membership = 0;
    /// Index of the generator within its membership (0 is the constant 1).
    int generator = 0;
    Polynomial generator_poly;
    std::vector<MultiIndex> basis;
};

struct FreeSlot {
    std::string owner;
    MultiIndex monomial;
};

/// Free polynomial multiplier h of an equation e: the membership identity carries the term h * e.
struct EquationMultiplier {
    std::string name;
    Polynomial equation;
    /// (free column, monomial of h).
    std::vector<std::pair<int, MultiIndex>> terms;
};

struct MembershipInfo {
    std::string name;
    BlockSignature signature;
    AffinePolynomial target;
    int order = 0;
    std::vector<int> blocks;
    std::vector<EquationMultiplier> multipliers;
};

/// Rows belong to groups: membership names for coefficient matching, sequence names for moment programs.
struct RowTag {
    int group = 0;
    MultiIndex monomial;
};

struct SizeBounds {
    long long max_variables = 0;
    long long max_side = 0;
};

/// Everything needed to read certificates back out of a solved program.
struct GramLayout {
    Method method = Method::kMethod1;
    std::string variant;
    int order = 0;
    int module_order = 0;
    BlockSignature signature;
    std::vector<GramBlockInfo> blocks;
    std::vector<FreeSlot> free_slots;
    std::vector<MembershipInfo> memberships;
    std::vector<std::string> row_groups;
    std::vector<RowTag> rows;
    SizeBounds bounds;
};

struct BuildOptions {
    /// Permit orders below the method's minimum; generators with r_j > r are then left out of the module.
    bool allow_low_order = false;
    /// Skip the final row normalization (used when comparing programs entry by entry).
    bool normalize = true;
};

/// Decomposes target in Q_r(A): one Gram block per generator (1 first), one row per reachable monomial.
std::pair<ConicProgram, GramLayout> sos_membership_rows(const Polynomial& target, const SemialgebraicSet& A, int r,
                                                        const BuildOptions& options = {});

/// r_mod = max(r_q, ceil(deg h_f / 2), max r_j^K).
int method1_module_order(const SemialgebraicSet& S, const BoundingSet& B, const PolynomialMap& f, int r_q);

std::pair<ConicProgram, GramLayout> build_method1_primal(const SemialgebraicSet& S, const BoundingSet& B,
                                                         const PolynomialMap& f, int r_q, const BuildOptions& options = {});
std::pair<ConicProgram, GramLayout> build_method1_dual(const SemialgebraicSet& S, const BoundingSet& B,
                                                       const PolynomialMap& f, int r_q, const BuildOptions& options = {});
std::pair<ConicProgram, GramLayout> build_method2_moment(const SemialgebraicSet& S, const BoundingSet& B,
                                                         const PolynomialMap& f, int r, const BuildOptions& options = {});
std::pair<ConicProgram, GramLayout> build_method2_sos(const SemialgebraicSet& S, const BoundingSet& B,
                                                      const PolynomialMap& f, int r, const BuildOptions& options = {});
std::pair<ConicProgram, GramLayout> build_method2_lifted(const SemialgebraicSet& S, const BoundingSet& B,
                                                         const PolynomialMap& f, int r, const BuildOptions& options = {});
/// f is the projection onto the first m coordinates of S.
std::pair<ConicProgram, GramLayout> build_projection(const SemialgebraicSet& S, int m, const BoundingSet& B, int r,
                                                     const BuildOptions& options = {});

/// Variable and block-side bounds for a method at order r (the module order for Method 1).
SizeBounds size_bounds(Method method, const std::string& variant, int n, int m, int d, int r);
/// Throws std::logic_error if the program exceeds its layout's bounds.
void check_size_bounds(const ConicProgram& prog, const GramLayout& layout);

struct LowerBound {
    double value = 0.0;
    bool solved = false;
    /// First-order pseudo-moments of the optimal moment sequence (a candidate minimizer).
    Eigen::VectorXd candidate;
};

/// max lambda s.t. p - lambda in Q_r(S).
LowerBound lower_bound_with_candidate(const Polynomial& p, const SemialgebraicSet& S, int r, double tol = 1e-8);
double lower_bound_on_set(const Polynomial& p, const SemialgebraicSet& S, int r);

} // namespace polyimage
