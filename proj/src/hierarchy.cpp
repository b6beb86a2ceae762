#include "polyimage/hierarchy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "polyimage/relaxation.hpp"
#include "polyimage/sdp_solver.hpp"
#include "polyimage/sdpa_io.hpp"
#include "polyimage/sparsity.hpp"

namespace polyimage {

namespace fs = std::filesystem;

int RunReport::exit_code() const {
    bool any_solved = config.solver == SolverMode::kExportOnly;
    for (const auto& o : orders) {
        if (o.accepted && o.containment.violations > 0) return 1;
        any_solved = any_solved || o.solved;
    }
    return any_solved ? 0 : 3;
}

SampleResult sample_problem(const ProblemSpec& spec, int count, std::uint64_t seed) {
    const SemialgebraicSet S = spec.S();
    if (!spec.has_lift()) return sample_set(S, implied_box(S), count, seed);
    return sample_lifted(S, spec.base_dim, spec.equations, implied_box(S, spec.base_dim), count, seed);
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Seeds of the independent random streams in one run.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)); }

std::pair<ConicProgram, GramLayout> build_order(const ProblemSpec& spec, const RunConfig& cfg, int r) {
    const SemialgebraicSet S = spec.S();
    const BoundingSet B = spec.B();
    const PolynomialMap f = spec.f();
    BuildOptions opt;
    opt.allow_low_order = cfg.force_low_order;
    switch (cfg.method) {
    case Method::kMethod1:
        if (cfg.sparse) return build_method1_sparse(S, B, f, spec.cliques, r, opt);
        return build_method1_primal(S, B, f, r, opt);
    case Method::kMethod2: return build_method2_sos(S, B, f, r, opt);
    case Method::kMethod2Lift: return build_method2_lifted(S, B, f, r, opt);
    case Method::kProjection: return build_projection(S, spec.m(), B, r, opt);
    }
    throw std::invalid_argument("run_hierarchy: unknown method");
}

std::string artifact_stem(const RunConfig& cfg, int r) {
    return std::string(method_name(cfg.method)) + (cfg.sparse ? "-sparse" : "") + "_r" + std::to_string(r);
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

} // namespace

RunReport run_hierarchy(const ProblemSpec& spec, const RunConfig& cfg, std::ostream* log) {
    if (cfg.sparse && cfg.method != Method::kMethod1) throw std::invalid_argument("--sparse applies to method1 only");
    if (cfg.sparse && spec.cliques.empty()) throw std::invalid_argument("--sparse needs a [cliques] section");
    if (cfg.method == Method::kProjection && !spec.is_projection())
        throw std::invalid_argument("projection needs y_j = x_j for every j");
    if (cfg.grid_width != 0 || cfg.grid_height != 0) {
        if (cfg.grid_width < 2 || cfg.grid_height < 2) throw std::invalid_argument("grid needs W, H >= 2");
        if (spec.m() != 2) throw std::invalid_argument("grid needs m = 2");
    }
    const SemialgebraicSet S = spec.S();
    const BoundingSet B = spec.B();
    const PolynomialMap f = spec.f();
    const int minimal = minimal_order(cfg.method, S, B, f);
    const int lo = cfg.order_min > 0 ? cfg.order_min : minimal;
    const int hi = std::max(lo, cfg.order_max > 0 ? cfg.order_max : lo);
    if (lo < minimal && !cfg.force_low_order)
        throw std::invalid_argument("order " + std::to_string(lo) + " is below the minimal order " + std::to_string(minimal) +
                                    " of " + method_name(cfg.method) + " (use --force-low-order)");

    RunReport report;
    report.method = method_name(cfg.method);
    report.variant = cfg.sparse ? "sparse" : "dense";
    report.config = cfg;

    const bool writing = !cfg.out_dir.empty();
    const fs::path dir(cfg.out_dir);
    if (writing) {
        std::vector<fs::path> targets{dir / (std::string(method_name(cfg.method)) + (cfg.sparse ? "-sparse" : "") + "_report.txt")};
        for (int r = lo; r <= hi; ++r) {
            const std::string stem = artifact_stem(cfg, r);
            if (cfg.solver == SolverMode::kExportOnly || cfg.write_sdpa) targets.push_back(dir / (stem + ".dat-s"));
            if (cfg.solver == SolverMode::kInternal) {
                targets.push_back(dir / (stem + ".cert"));
                if (cfg.grid_width > 0) targets.push_back(dir / (stem + "_grid.csv"));
            }
        }
        if (!cfg.overwrite)
            for (const auto& t : targets)
                if (fs::exists(t)) throw std::runtime_error(t.string() + " exists (use --overwrite)");
        fs::create_directories(dir);
    }

    Eigen::MatrixXd xs;
    if (cfg.solver == SolverMode::kInternal && cfg.samples > 0) xs = sample_problem(spec, cfg.samples, stream_seed(cfg.seed, 0)).points;

    for (int r = lo; r <= hi; ++r) {
        OrderReport o;
        o.order = r;
        const auto start = std::chrono::steady_clock::now();
        try {
            auto [prog, layout] = build_order(spec, cfg, r);
            o.built = true;
            o.rows = prog.num_rows();
            o.free_variables = prog.num_free;
            o.scalar_variables = prog.num_scalar_variables();
            for (int s : prog.block_sizes) o.max_side = std::max(o.max_side, s);
            const std::string stem = artifact_stem(cfg, r);
            if (writing && (cfg.solver == SolverMode::kExportOnly || cfg.write_sdpa)) export_sdpa_file(prog, (dir / (stem + ".dat-s")).string());
            if (cfg.solver == SolverMode::kExportOnly) {
                o.status = "exported";
            } else {
                const SolverResult res = solve(prog, {cfg.tol, cfg.max_iter});
                o.status = status_name(res.status);
                o.iterations = res.iterations;
                o.objective = res.objective;
                o.gap = res.gap;
                o.solved = res.usable();
                if (o.solved) {
                    Certificate cert = extract_certificate(res, layout);
                    o.residual = cert.residual;
                    o.accepted = cert.accepted();
                    if (xs.cols() > 0) o.containment = containment_check(cert, f, xs);
                    if (cfg.volume_samples > 0) o.volume = estimate_volume(cert, B, cfg.volume_samples, stream_seed(cfg.seed, 1));
                    if (writing) {
                        auto out = open_output(dir / (stem + ".cert"));
                        write_certificate(cert, out);
                        if (cfg.grid_width > 0) {
                            auto grid = open_output(dir / (stem + "_grid.csv"));
                            write_grid_csv(grid_evaluate(cert, B, cfg.grid_width, cfg.grid_height), grid);
                        }
                    }
                    o.certificate = std::move(cert);
                }
            }
        } catch (const std::invalid_argument& e) {
            o.status = "error";
            o.error = e.what();
        } catch (const InfeasibleMembership& e) {
            o.status = "error";
            o.error = e.what();
        }
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (log) {
            *log << report.method << " r=" << r << " " << o.status;
            if (o.solved)
                *log << " objective=" << fmt(o.objective) << " residual=" << fmt(o.residual) << " violations=" << o.containment.violations
                     << " volume=" << fmt(o.volume.estimate) << "+-" << fmt(o.volume.std_error);
            if (!o.error.empty()) *log << " (" << o.error << ")";
            *log << " [" << fmt(o.seconds) << " s]\n";
        }
        report.orders.push_back(std::move(o));
    }
    if (writing) {
        auto out = open_output(dir / (std::string(method_name(cfg.method)) + (cfg.sparse ? "-sparse" : "") + "_report.txt"));
        write_report(report, out);
    }
    return report;
}

void write_report(const RunReport& report, std::ostream& out) {
    const RunConfig& c = report.config;
    out << "method = " << report.method << "\n";
    out << "variant = " << report.variant << "\n";
    out << "solver = " << (c.solver == SolverMode::kInternal ? "internal" : "export-only") << "\n";
    out << "tol = " << fmt(c.tol) << "\n";
    out << "max_iter = " << c.max_iter << "\n";
    out << "seed = " << c.seed << "\n";
    out << "samples = " << c.samples << "\n";
    out << "volume_samples = " << c.volume_samples << "\n";
    out << "exit_code = " << report.exit_code() << "\n";
    for (const auto& o : report.orders) {
        out << "\n[order " << o.order << "]\n";
        out << "status = " << o.status << "\n";
        if (!o.error.empty()) out << "error = " << o.error << "\n";
        if (!o.built) continue;
        out << "rows = " << o.rows << "\n";
        out << "free_variables = " << o.free_variables << "\n";
        out << "scalar_variables = " << o.scalar_variables << "\n";
        out << "max_side = " << o.max_side << "\n";
        if (c.solver == SolverMode::kExportOnly) continue;
        out << "iterations = " << o.iterations << "\n";
        out << "objective = " << fmt(o.objective) << "\n";
        out << "gap = " << fmt(o.gap) << "\n";
        if (!o.solved) continue;
        out << "residual = " << fmt(o.residual) << "\n";
        out << "accepted = " << (o.accepted ? "yes" : "no") << "\n";
        out << "containment_samples = " << o.containment.samples << "\n";
        out << "violations = " << o.containment.violations << "\n";
        out << "worst_margin = " << fmt(o.containment.worst_margin) << "\n";
        out << "volume = " << fmt(o.volume.estimate) << "\n";
        out << "volume_std_error = " << fmt(o.volume.std_error) << "\n";
        out << "volume_seed = " << o.volume.seed << "\n";
    }
}

ProblemSpec apply_scaling(const ProblemSpec& spec, const std::vector<double>& a, const std::vector<double>& b) {
    if (static_cast<int>(a.size()) != spec.m() || static_cast<int>(b.size()) != spec.m())
        throw std::invalid_argument("apply_scaling: need one a_j and b_j per map component");
    ProblemSpec out = spec;
    for (int j = 0; j < spec.m(); ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (!(b[k] - a[k] >= 1e-9)) throw std::invalid_argument("degenerate scaling: b - a < 1e-9 for y" + std::to_string(j + 1));
        out.map[k] = (spec.map[k] - Polynomial::constant(spec.map[k].signature(), a[k])) * (1.0 / (b[k] - a[k]));
    }
    out.scale_a = a;
    out.scale_b = b;
    out.scaled = true;
    out.pareto = true;
    out.b_kind = BoundingSet::Kind::kBall;
    out.b_center = Eigen::VectorXd::Zero(spec.m());
    out.b_radius = 1.0;
    return out;
}

namespace {

bool images_in_unit_ball(const ProblemSpec& scaled, const Eigen::MatrixXd& xs) {
    const Eigen::MatrixXd ys = scaled.f().evaluate_columns(xs);
    for (Eigen::Index k = 0; k < ys.cols(); ++k)
        if (ys.col(k).norm() > 1.0 + 1e-6) return false;
    return true;
}

} // namespace

ProblemSpec pareto_scale(const ProblemSpec& spec, int r_scale, std::uint64_t seed) {
    if (spec.m() != 2) throw std::invalid_argument("pareto_scale: needs m = 2");
    if (spec.scaled) return spec;
    const Eigen::MatrixXd xs = sample_problem(spec, 10000, stream_seed(seed, 2)).points;
    if (!spec.scale_a.empty()) {
        ProblemSpec out = apply_scaling(spec, spec.scale_a, spec.scale_b);
        if (!images_in_unit_ball(out, xs)) throw std::invalid_argument("pareto_scale: the given a, b leave sampled images outside the unit disk");
        return out;
    }
    const SemialgebraicSet S = spec.S();
    for (const auto& fj : spec.map)
        if (fj.degree() == 0) throw std::invalid_argument("degenerate scaling: constant objective");
    int r = r_scale > 0 ? r_scale : spec.pareto_order;
    if (r <= 0) {
        r = S.max_half_degree();
        for (const auto& fj : spec.map) r = std::max(r, (fj.degree() + 1) / 2);
    }

    std::vector<double> a(2), u(2);
    std::vector<Eigen::VectorXd> argmin(2);
    const Eigen::MatrixXd images = spec.f().evaluate_columns(xs);
    for (int j = 0; j < 2; ++j) {
        const auto k = static_cast<std::size_t>(j);
        const LowerBound lb = lower_bound_with_candidate(spec.map[k], S, r, 1e-9);
        if (!lb.solved) throw std::runtime_error("pareto_scale: lower bound of f" + std::to_string(j + 1) + " did not solve");
        a[k] = lb.value;
        // The moment candidate is trusted only if it lies in S; otherwise the best sample stands in.
        Eigen::Index best = 0;
        images.row(j).minCoeff(&best);
        argmin[k] = S.contains(lb.candidate, 1e-6) ? lb.candidate : Eigen::VectorXd(xs.col(best));
        const LowerBound ub = lower_bound_with_candidate(-spec.map[k], S, r, 1e-9);
        if (!ub.solved) throw std::runtime_error("pareto_scale: upper bound of f" + std::to_string(j + 1) + " did not solve");
        u[k] = -ub.value;
    }
    std::vector<double> b{spec.map[0].evaluate(argmin[1]), spec.map[1].evaluate(argmin[0])};
    for (int j = 0; j < 2; ++j)
        if (b[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j)] < 1e-9) throw std::invalid_argument("degenerate scaling: b - a < 1e-9");
    ProblemSpec out = apply_scaling(spec, a, b);
    if (images_in_unit_ball(out, xs)) return out;
    // f~ in [0, 1/sqrt(2)]^2 on all of S, hence in the unit disk.
    for (int j = 0; j < 2; ++j) {
        const auto k = static_cast<std::size_t>(j);
        b[k] = a[k] + std::sqrt(2.0) * (u[k] - a[k]);
    }
    out = apply_scaling(spec, a, b);
    if (!images_in_unit_ball(out, xs)) throw std::runtime_error("pareto_scale: scaled images leave the unit disk");
    return out;
}

} // namespace polyimage
