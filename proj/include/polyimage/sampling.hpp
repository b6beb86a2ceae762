#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "polyimage/polynomial.hpp"
#include "polyimage/semialgebraic.hpp"

namespace polyimage {

/// Raised when rejection sampling accepts fewer than 1e-4 of the first 1e6 proposals.
class SamplingAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SampleBox {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double volume() const { return (hi - lo).prod(); }
};

/// Axis box implied by ball constraints c - sum x_i^2 and univariate quadratics -(x_i - a)(x_i - b).
/// Only variables in [0, dims) are needed; throws if one of them is left unbounded.
SampleBox implied_box(const SemialgebraicSet& A, int dims);
SampleBox implied_box(const SemialgebraicSet& A);

struct SampleResult {
    /// One point per column.
    Eigen::MatrixXd points;
    long long proposals = 0;
    double acceptance_rate = 0.0;
    std::uint64_t seed = 0;
};

/// Uniform proposals in `bound`, kept when every g_j >= 0.
SampleResult sample_set(const SemialgebraicSet& A, const SampleBox& bound, int count, std::uint64_t seed);

/// Sets with lifted variables x_t (t >= base_dim) tied to the base by equations e(x) == 0.
/// Base coordinates are drawn by rejection against the constraints on the base; each lifted coordinate is
/// then the smallest real root of an equation in x_t (all earlier coordinates fixed) satisfying the
/// constraints known so far up to `equality_tol`.
SampleResult sample_lifted(const SemialgebraicSet& A, int base_dim, const std::vector<Polynomial>& equations,
                           const SampleBox& base_bound, int count, std::uint64_t seed, double equality_tol = 1e-9);

/// Real roots of sum_k c_k t^k (companion matrix, Newton polished), ascending.
std::vector<double> real_roots(const std::vector<double>& coefficients);

} // namespace polyimage
