#pragma once

// Shared assembly helpers for the dense and sparse builders.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "polyimage/relaxation.hpp"

namespace polyimage::detail {

struct Generator {
    Polynomial poly;
    /// Variables the multiplier basis may use.
    std::vector<int> vars;
    std::string label;
    /// e == 0: the multiplier is a free polynomial of degree <= 2r - deg e.
    bool equality = false;
};

std::vector<MultiIndex> monomial_basis(int dim, const std::vector<int>& vars, int degree);
std::vector<int> all_vars(int dim);
std::vector<Generator> dense_generators(const SemialgebraicSet& A);
int half_degree(const Polynomial& g);
void require_archimedean(const SemialgebraicSet& A, const char* what);
void require_order(int r, int minimum, bool allow_low, const char* method);

/// Coefficient-matching programs: target(x_free) = sum_j <Gram_j, basis basis'> g_j + sum_k h_k e_k.
class SosBuilder {
public:
    SosBuilder(Method method, std::string variant);

    int add_free(const std::string& owner, const MultiIndex& monomial, double cost);
    void add_membership(const std::string& name, const AffinePolynomial& target, const std::vector<Generator>& generators,
                        int r, bool allow_low_order);
    GramLayout& layout() { return layout_; }
    std::pair<ConicProgram, GramLayout> finish(bool normalize);

private:
    ConicProgram prog_;
    GramLayout layout_;
};

/// Moment programs: rows are pseudo-moments, blocks are localizing matrices.
class MomentBuilder {
public:
    MomentBuilder(Method method, std::string variant);

    int add_sequence(const std::string& name, BlockSignature sig, int max_degree);
    int row(int group, const MultiIndex& gamma) const;
    /// M_t(g z) >= 0 on the given sequence; returns the layout block index.
    int add_localizing(int group, const Polynomial& g, int t, const std::string& label, int membership, int generator);
    /// L(e x^alpha) = 0 for |alpha| <= degree, recorded as a multiplier of the membership.
    void add_localizing_equation(int group, const Polynomial& e, int degree, const std::string& label, MembershipInfo& info);
    /// Linear condition sum coef * z_row = rhs; returns the free column index.
    int add_equality(const std::vector<std::pair<int, double>>& coefficients, double rhs, const std::string& owner,
                     const MultiIndex& monomial);
    void add_objective(int row, double coefficient);
    GramLayout& layout() { return layout_; }
    std::pair<ConicProgram, GramLayout> finish(bool normalize);

private:
    ConicProgram prog_;
    GramLayout layout_;
    std::map<int, std::map<MultiIndex, int, GradedLexLess>> index_;
    std::vector<BlockSignature> signatures_;
};

} // namespace polyimage::detail
