#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "polyimage/polynomial.hpp"
#include "polyimage/polynomial_map.hpp"
#include "polyimage/relaxation.hpp"
#include "polyimage/sdp_solver.hpp"
#include "polyimage/semialgebraic.hpp"

namespace polyimage {

struct GramFactor {
    std::string name;
    std::string membership;
    Polynomial generator;
    std::vector<MultiIndex> basis;
    Eigen::MatrixXd gram;
};

/// q (Method 1) or (v, w) (Method 2) or w (lifted, projection), as polynomials in y.
/// The outer approximation is { y in B : defining(y) >= threshold }.
struct Certificate {
    Method method = Method::kMethod1;
    std::string variant;
    int order = 0;
    int module_order = 0;
    int n = 0;
    int m = 0;
    Polynomial q;
    Polynomial v;
    Polynomial w;
    std::vector<GramFactor> grams;
    /// Max coefficient gap between each membership target and sum_j s_j g_j.
    double residual = 0.0;
    double objective = 0.0;
    SolverStatus status = SolverStatus::kOptimal;

    double threshold() const { return method == Method::kMethod1 ? 0.0 : 1.0; }
    const Polynomial& defining() const { return method == Method::kMethod1 ? q : w; }
    double margin(const Eigen::Ref<const Eigen::VectorXd>& y) const { return defining().evaluate(y) - threshold(); }
    bool accepted(double tol = 1e-6) const { return residual <= tol; }
};

/// Reads the payload from the free slots and the Grams from the PSD blocks, then recomputes every
/// membership identity with polynomial arithmetic. Throws unless the status is optimal or near optimal.
Certificate extract_certificate(const SolverResult& result, const GramLayout& layout);

struct ContainmentReport {
    int samples = 0;
    int violations = 0;
    double worst_margin = 0.0;
};

/// Margin of the defining inequality at y = f(x) for every column x of xs.
ContainmentReport containment_check(const Certificate& cert, const PolynomialMap& f, const Eigen::MatrixXd& xs,
                                    double tol = 1e-6);

struct VolumeEstimate {
    long long samples = 0;
    long long hits = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t seed = 0;
};

/// Uniform points of B drawn by rejection from its bounding rectangle.
Eigen::MatrixXd sample_bounding_set(const BoundingSet& B, long long count, std::uint64_t seed);

VolumeEstimate volume_from_hits(double volume, long long samples, long long hits, std::uint64_t seed);

/// Monte-Carlo volume of { y in B : cert.margin(y) >= 0 }.
VolumeEstimate estimate_volume(const Certificate& cert, const BoundingSet& B, long long count, std::uint64_t seed);

/// sup over the candidate columns of h_f(x, y), then 50 projected gradient steps (step 1e-2) from the best,
/// backtracking whenever a step leaves S. A lower bound on h(y) = sup_{x in S} h_f(x, y).
double empirical_h(const Eigen::Ref<const Eigen::VectorXd>& y, const PolynomialMap& f, const SemialgebraicSet& S,
                   const Eigen::MatrixXd& candidates);
/// Same, drawing `count` candidates from S (rejection in its implied box).
double empirical_h(const Eigen::Ref<const Eigen::VectorXd>& y, const PolynomialMap& f, const SemialgebraicSet& S,
                   int count, std::uint64_t seed);

/// Finds x in S with |f(x) - y| <= tol by damped Gauss-Newton from the nearest candidate images.
/// False negatives are possible, so the induced volume estimate of f(S) is biased low.
bool image_member(const Eigen::Ref<const Eigen::VectorXd>& y, const PolynomialMap& f, const SemialgebraicSet& S,
                  const Eigen::MatrixXd& candidates, const Eigen::MatrixXd& candidate_images, double tol = 1e-7);

/// Monte-Carlo volume of f(S) within B using image_member.
VolumeEstimate estimate_image_volume(const PolynomialMap& f, const SemialgebraicSet& S, const Eigen::MatrixXd& candidates,
                                     const BoundingSet& B, long long count, std::uint64_t seed);

struct GridRow {
    double y1 = 0.0;
    double y2 = 0.0;
    double value = 0.0;
    bool inside = false;
};

/// Certificate values on a width x height lattice over B's bounding rectangle (m = 2 only).
std::vector<GridRow> grid_evaluate(const Certificate& cert, const BoundingSet& B, int width, int height);
void write_grid_csv(const std::vector<GridRow>& rows, std::ostream& out);

/// Structured text: key = value header lines, then one "[name]" section per payload polynomial
/// with "e_1 ... e_m coefficient" lines in graded lex order.
void write_certificate(const Certificate& cert, std::ostream& out);
Certificate read_certificate(std::istream& in);

} // namespace polyimage
