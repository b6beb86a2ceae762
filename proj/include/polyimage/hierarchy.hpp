#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polyimage/certificate.hpp"
#include "polyimage/problem.hpp"
#include "polyimage/sampling.hpp"

namespace polyimage {

enum class SolverMode { kInternal, kExportOnly };

struct RunConfig {
    Method method = Method::kMethod1;
    /// 0: the method's minimal order.
    int order_min = 0;
    int order_max = 0;
    double tol = 1e-7;
    int max_iter = 200;
    SolverMode solver = SolverMode::kInternal;
    /// Image samples for the containment check.
    int samples = 10000;
    long long volume_samples = 100000;
    std::uint64_t seed = 1;
    /// 0 x 0: no grid.
    int grid_width = 0;
    int grid_height = 0;
    /// Empty: nothing is written.
    std::string out_dir;
    bool force_low_order = false;
    bool overwrite = false;
    bool sparse = false;
    /// Also write the .dat-s of every solved order.
    bool write_sdpa = false;
};

struct OrderReport {
    int order = 0;
    bool built = false;
    bool solved = false;
    bool accepted = false;
    std::string status;
    std::string error;
    int rows = 0;
    int free_variables = 0;
    long long scalar_variables = 0;
    int max_side = 0;
    int iterations = 0;
    double objective = 0.0;
    double gap = 0.0;
    double residual = 0.0;
    ContainmentReport containment;
    VolumeEstimate volume;
    std::optional<Certificate> certificate;
    /// Not part of the written report.
    double seconds = 0.0;
};

struct RunReport {
    std::string method;
    std::string variant;
    RunConfig config;
    std::vector<OrderReport> orders;

    /// 0 ok, 1 an accepted certificate has violations, 3 no order solved.
    int exit_code() const;
};

/// Points of S (lifted coordinates solved from the equations), one per column.
SampleResult sample_problem(const ProblemSpec& spec, int count, std::uint64_t seed);

/// Builds, solves (or exports), certifies and checks every order in the configured range.
/// Per-order failures are recorded, not thrown. Throws std::runtime_error if an artifact exists and
/// overwrite is off, and std::invalid_argument for configurations the spec cannot support.
RunReport run_hierarchy(const ProblemSpec& spec, const RunConfig& cfg, std::ostream* log = nullptr);

/// key = value text; contains no timings so identical runs give identical bytes.
void write_report(const RunReport& report, std::ostream& out);

/// Replaces f_j by (f_j - a_j) / (b_j - a_j) and records a, b.
ProblemSpec apply_scaling(const ProblemSpec& spec, const std::vector<double>& a, const std::vector<double>& b);

/// Bicriteria preprocessing: a_j is an SOS lower bound of f_j on S; b_1 = f_1 at an approximate
/// minimizer of f_2 and b_2 = f_2 at one of f_1. When that leaves sampled scaled images outside the
/// unit disk, b_j = a_j + sqrt(2) (u_j - a_j) with u_j an SOS upper bound. B becomes the unit disk.
/// User-supplied a, b are applied as given; an already scaled spec is returned unchanged.
/// r_scale = 0 picks the minimal order.
ProblemSpec pareto_scale(const ProblemSpec& spec, int r_scale, std::uint64_t seed = 1);

} // namespace polyimage
