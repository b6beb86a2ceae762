// Command-line front end: build, solve, verify, grid, pareto-scale.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "polyimage/certificate.hpp"
#include "polyimage/hierarchy.hpp"
#include "polyimage/problem.hpp"

using namespace polyimage;

namespace {

struct Options {
    std::string problem;
    std::string method = "method1";
    int order_min = 0;
    int order_max = 0;
    double tol = 1e-7;
    int max_iter = 200;
    std::string solver = "internal";
    int samples = 10000;
    long long volume_samples = 100000;
    std::uint64_t seed = 1;
    std::string grid;
    std::string out;
    std::string cert;
    bool force_low_order = false;
    bool overwrite = false;
    bool sparse = false;
    bool sdpa = false;
    int r_scale = 0;
};

void parse_grid(const std::string& text, int& w, int& h) {
    if (text.empty()) return;
    const auto x = text.find('x');
    if (x == std::string::npos) throw std::invalid_argument("--grid expects WxH");
    w = std::stoi(text.substr(0, x));
    h = std::stoi(text.substr(x + 1));
}

RunConfig make_config(const Options& o) {
    RunConfig cfg;
    const auto method = parse_method(o.method);
    if (!method) throw std::invalid_argument("unknown method '" + o.method + "'");
    cfg.method = *method;
    cfg.order_min = o.order_min;
    cfg.order_max = o.order_max;
    cfg.tol = o.tol;
    cfg.max_iter = o.max_iter;
    if (o.solver == "internal") cfg.solver = SolverMode::kInternal;
    else if (o.solver == "export-only") cfg.solver = SolverMode::kExportOnly;
    else throw std::invalid_argument("--solver must be internal or export-only");
    cfg.samples = o.samples;
    cfg.volume_samples = o.volume_samples;
    cfg.seed = o.seed;
    parse_grid(o.grid, cfg.grid_width, cfg.grid_height);
    cfg.out_dir = o.out;
    cfg.force_low_order = o.force_low_order;
    cfg.overwrite = o.overwrite;
    cfg.sparse = o.sparse;
    cfg.write_sdpa = o.sdpa;
    return cfg;
}

// A Pareto problem is solved in its scaled form.
ProblemSpec load(const Options& o) {
    ProblemSpec spec = parse_problem_file(o.problem);
    if (spec.pareto && !spec.scaled) spec = pareto_scale(spec, o.r_scale, o.seed);
    return spec;
}

Certificate load_certificate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open certificate " + path);
    return read_certificate(in);
}

void print_summary(const RunReport& report) {
    std::printf("%-3s %-13s %16s %10s %10s %6s %12s\n", "r", "status", "objective", "gap", "residual", "viol", "volume");
    for (const auto& o : report.orders) {
        if (!o.solved) {
            std::printf("%-3d %-13s %s\n", o.order, o.status.c_str(), o.error.c_str());
            continue;
        }
        std::printf("%-3d %-13s %16.9g %10.2e %10.2e %6d %8.5f+-%.5f\n", o.order, o.status.c_str(), o.objective, o.gap, o.residual,
                    o.containment.violations, o.volume.estimate, o.volume.std_error);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified polynomial outer approximations of images of semi-algebraic sets"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("problem", o.problem, "Problem file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Random seed");
        sub->add_option("--r-scale", o.r_scale, "Relaxation order of the Pareto bounds (0: minimal)");
    };
    auto add_run = [&](CLI::App* sub) {
        add_common(sub);
        sub->add_option("--method", o.method, "method1, method2, method2-lift or projection");
        sub->add_option("--order-min", o.order_min, "First relaxation order (default: minimal)");
        sub->add_option("--order-max", o.order_max, "Last relaxation order");
        sub->add_option("--tol", o.tol, "Solver tolerance");
        sub->add_option("--max-iter", o.max_iter, "Solver iteration limit");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_flag("--force-low-order", o.force_low_order, "Allow orders below the method's minimum");
        sub->add_flag("--overwrite", o.overwrite, "Replace existing artifacts");
        sub->add_flag("--sparse", o.sparse, "Clique-sparse Method 1");
    };

    auto* build = app.add_subcommand("build", "Build the programs and report their sizes; with --out, write .dat-s files");
    add_run(build);

    auto* solve = app.add_subcommand("solve", "Run a hierarchy: solve, certify, check containment and volume");
    add_run(solve);
    solve->add_option("--solver", o.solver, "internal or export-only");
    solve->add_option("--samples", o.samples, "Image samples for the containment check");
    solve->add_option("--volume-samples", o.volume_samples, "Monte-Carlo samples for the volume estimate");
    solve->add_option("--grid", o.grid, "Grid resolution WxH (m = 2)");
    solve->add_flag("--sdpa", o.sdpa, "Also write the .dat-s of every order");

    auto* verify = app.add_subcommand("verify", "Check a certificate file against fresh image samples");
    add_common(verify);
    verify->add_option("--cert", o.cert, "Certificate file")->required()->check(CLI::ExistingFile);
    verify->add_option("--samples", o.samples, "Image samples");
    verify->add_option("--volume-samples", o.volume_samples, "Monte-Carlo samples for the volume estimate");

    auto* grid = app.add_subcommand("grid", "Evaluate a certificate on a grid over B (CSV)");
    add_common(grid);
    grid->add_option("--cert", o.cert, "Certificate file")->required()->check(CLI::ExistingFile);
    grid->add_option("--grid", o.grid, "Resolution WxH")->required();
    grid->add_option("--out", o.out, "CSV file (default: stdout)");
    grid->add_flag("--overwrite", o.overwrite, "Replace an existing file");

    auto* pareto = app.add_subcommand("pareto-scale", "Rescale a bicriteria problem into the unit disk");
    add_common(pareto);
    pareto->add_option("--out", o.out, "Scaled problem file (default: stdout)");
    pareto->add_flag("--overwrite", o.overwrite, "Replace an existing file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*build || *solve) {
            ProblemSpec spec = load(o);
            RunConfig cfg = make_config(o);
            if (*build) {
                cfg.solver = SolverMode::kExportOnly;
                cfg.samples = 0;
                cfg.volume_samples = 0;
            }
            const RunReport report = run_hierarchy(spec, cfg, &std::cerr);
            if (cfg.solver == SolverMode::kExportOnly) {
                std::printf("%-3s %8s %8s %12s %8s\n", "r", "rows", "free", "scalars", "max_side");
                for (const auto& r : report.orders)
                    if (r.built) std::printf("%-3d %8d %8d %12lld %8d\n", r.order, r.rows, r.free_variables, r.scalar_variables, r.max_side);
                    else std::printf("%-3d %s\n", r.order, r.error.c_str());
            } else {
                print_summary(report);
            }
            return report.exit_code();
        }
        if (*verify) {
            const ProblemSpec spec = load(o);
            const Certificate cert = load_certificate(o.cert);
            if (cert.m != spec.m()) throw std::invalid_argument("certificate and problem disagree on m");
            const Eigen::MatrixXd xs = sample_problem(spec, o.samples, o.seed).points;
            const ContainmentReport c = containment_check(cert, spec.f(), xs);
            const VolumeEstimate v = estimate_volume(cert, spec.B(), o.volume_samples, o.seed + 1);
            std::printf("samples = %d\nviolations = %d\nworst_margin = %.10g\nvolume = %.10g\nvolume_std_error = %.10g\nseed = %llu\n",
                        c.samples, c.violations, c.worst_margin, v.estimate, v.std_error, static_cast<unsigned long long>(o.seed));
            return c.violations > 0 ? 1 : 0;
        }
        if (*grid) {
            const ProblemSpec spec = load(o);
            const Certificate cert = load_certificate(o.cert);
            int w = 0, h = 0;
            parse_grid(o.grid, w, h);
            const auto rows = grid_evaluate(cert, spec.B(), w, h);
            if (o.out.empty()) {
                write_grid_csv(rows, std::cout);
            } else {
                if (!o.overwrite && std::ifstream(o.out)) throw std::runtime_error(o.out + " exists (use --overwrite)");
                std::ofstream out(o.out);
                write_grid_csv(rows, out);
            }
            return 0;
        }
        if (*pareto) {
            const ProblemSpec spec = parse_problem_file(o.problem);
            if (!spec.pareto) throw std::invalid_argument("the problem has no [pareto] section");
            const std::string text = emit_problem(pareto_scale(spec, o.r_scale, o.seed));
            if (o.out.empty()) {
                std::cout << text;
            } else {
                if (!o.overwrite && std::ifstream(o.out)) throw std::runtime_error(o.out + " exists (use --overwrite)");
                std::ofstream(o.out) << text;
            }
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << o.problem << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
