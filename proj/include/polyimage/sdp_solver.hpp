#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "polyimage/conic_program.hpp"

namespace polyimage {

enum class SolverStatus { kOptimal, kNearOptimal, kInfeasible, kUnbounded, kMaxIter };

const char* status_name(SolverStatus s);

struct SolverOptions {
    double tol = 1e-7;
    int max_iter = 200;
    /// Per-iteration trace on stderr.
    bool verbose = false;
};

struct SolverResult {
    SolverStatus status = SolverStatus::kMaxIter;
    /// Objectives of the stored P and D data, and the builder's own objective.
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double objective = 0.0;

    Eigen::VectorXd x_free;
    std::vector<Eigen::MatrixXd> X;
    /// Dual multipliers in the unscaled row convention.
    Eigen::VectorXd y;
    std::vector<Eigen::MatrixXd> S;

    double primal_residual = 0.0;
    double dual_residual = 0.0;
    /// |p - d| / (1 + |p| + |d|).
    double gap = 0.0;
    int iterations = 0;
    double wall_time_seconds = 0.0;

    bool usable() const { return status == SolverStatus::kOptimal || status == SolverStatus::kNearOptimal; }
};

/// Primal-dual interior point method (HKM direction, Mehrotra predictor-corrector).
SolverResult solve(const ConicProgram& prog, const SolverOptions& options = {});

struct FeasibilityReport {
    double max_row_violation = 0.0;
    std::vector<double> min_eigenvalues;

    double min_eigenvalue() const;
    /// max(row violation, -min eigenvalue, 0).
    double worst_violation() const;
};

/// Residuals of (x_free, X) against the equalities of P and the PSD cones.
FeasibilityReport certify_primal(const ConicProgram& prog, const Eigen::VectorXd& x_free,
                                 const std::vector<Eigen::MatrixXd>& X);
/// Residuals of y (unscaled rows) against A_f' y = c_f and C - A*(y) psd.
FeasibilityReport certify_dual(const ConicProgram& prog, const Eigen::VectorXd& y);
/// The check matching the program's form: primal point for kEquality, y for kLmi.
FeasibilityReport certify_feasibility(const ConicProgram& prog, const SolverResult& point);

} // namespace polyimage
