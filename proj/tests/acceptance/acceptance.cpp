// One PASS/FAIL line per acceptance criterion. Exit status is 0 iff the set of failing criteria equals
// the set given with --known-failures (empty by default).

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "examples.hpp"
#include "oracles.hpp"
#include "polyimage/certificate.hpp"
#include "polyimage/hierarchy.hpp"
#include "polyimage/relaxation.hpp"
#include "polyimage/sampling.hpp"
#include "polyimage/sdp_solver.hpp"
#include "polyimage/sdpa_io.hpp"
#include "polyimage/sparsity.hpp"

using namespace polyimage;
using namespace testdata;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSolveSeed = 20240611;
constexpr std::uint64_t kCheckSeed = 977;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

struct Solved {
    GramLayout layout;
    SolverResult result;
    std::optional<Certificate> cert;
};

// Every certificate extracted anywhere in this run, for the residual criterion.
std::vector<std::pair<std::string, double>> g_residuals;

Solved solve_and_extract(const std::string& label, std::pair<ConicProgram, GramLayout> built, double tol = 1e-8) {
    Solved s;
    s.layout = std::move(built.second);
    s.result = solve(built.first, {tol, 200});
    if (s.result.usable()) {
        s.cert = extract_certificate(s.result, s.layout);
        g_residuals.emplace_back(label, s.cert->residual);
    }
    return s;
}

double max_abs_coefficient(const Polynomial& p) {
    double m = 0.0;
    for (const auto& [alpha, c] : p.terms()) m = std::max(m, std::abs(c));
    return m;
}

Eigen::MatrixXd fresh_samples(const ProblemSpec& spec, int count, std::uint64_t seed) {
    return sample_problem(spec, count, seed).points;
}

// ---- shared runs ----

struct BallImageRun {
    std::vector<Solved> primal;
    std::vector<Solved> dual;
    double seconds = 0.0;
};

const BallImageRun& ball_image_run() {
    static const BallImageRun run = [] {
        BallImageRun out;
        const auto t0 = std::chrono::steady_clock::now();
        const auto S = unit_disk_x();
        const auto B = unit_disk_y();
        const auto f = ball_image_map();
        const BuildOptions low{true, true};
        for (int r = 1; r <= 4; ++r) {
            out.primal.push_back(solve_and_extract("ball method1 primal r" + std::to_string(r), build_method1_primal(S, B, f, r, low)));
            out.dual.push_back(solve_and_extract("ball method1 dual r" + std::to_string(r), build_method1_dual(S, B, f, r, low)));
        }
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }();
    return run;
}

// ---- criteria ----

Outcome duality_gap() {
    Outcome o;
    const auto& run = ball_image_run();
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
        const auto& p = run.primal[static_cast<std::size_t>(k)].result;
        const auto& d = run.dual[static_cast<std::size_t>(k)].result;
        o.require(p.usable() && d.usable(), "r=" + std::to_string(k + 1) + " did not solve");
        const double rel = std::abs(p.objective - d.objective) / std::max(std::abs(p.objective), std::abs(d.objective));
        worst = std::max(worst, rel);
        o.require(rel <= 1e-5, fmt("r=%.0f relative gap %.3g", k + 1, rel));
    }
    o.require(run.seconds <= 300.0, fmt("runtime %.1f s", run.seconds));
    if (o.pass) o.detail = fmt("max relative difference %.3g over r=1..4, %.1f s", worst, run.seconds);
    return o;
}

void check_containment(Outcome& o, const std::string& name, const Certificate& cert, const PolynomialMap& f,
                       const Eigen::MatrixXd& xs, int& checked) {
    if (!cert.accepted()) return;
    const auto rep = containment_check(cert, f, xs, 1e-6);
    ++checked;
    o.require(rep.violations == 0, name + ": " + std::to_string(rep.violations) + " violations");
}

Outcome containment() {
    Outcome o;
    int checked = 0;
    {
        const auto spec = load("ball_image.txt");
        const auto xs = fresh_samples(spec, 10000, kCheckSeed);
        int here = 0;
        for (const auto& s : ball_image_run().primal)
            if (s.cert) check_containment(o, "ball method1 r" + std::to_string(s.cert->order), *s.cert, spec.f(), xs, here);
        o.require(here > 0, "no accepted method1 certificate");
        checked += here;
    }
    {
        const auto spec = load("projection.txt");
        const auto xs = fresh_samples(spec, 10000, kCheckSeed);
        int here = 0;
        for (int r = 2; r <= 4; ++r) {
            const auto s = solve_and_extract("projection r" + std::to_string(r), build_projection(spec.S(), spec.m(), spec.B(), r));
            if (s.cert) check_containment(o, "projection r" + std::to_string(r), *s.cert, spec.f(), xs, here);
        }
        o.require(here > 0, "no accepted projection certificate");
        checked += here;
    }
    {
        const auto spec = load("lifted_abs.txt");
        const auto xs = fresh_samples(spec, 10000, kCheckSeed);
        int here = 0;
        const auto s = solve_and_extract("lifted abs method2-lift r2", build_method2_lifted(spec.S(), spec.B(), spec.f(), 2));
        if (s.cert) check_containment(o, "lifted abs method2-lift r2", *s.cert, spec.f(), xs, here);
        o.require(here > 0, "no accepted method2-lift certificate");
        checked += here;
    }
    if (o.pass) o.detail = std::to_string(checked) + " accepted certificates, 0 violations on 10^4 image samples each";
    return o;
}

Outcome volume_monotonicity() {
    Outcome o;
    const auto spec = load("ball_image.txt");
    const auto B = spec.B();
    std::vector<VolumeEstimate> v;
    for (const auto& s : ball_image_run().primal) {
        if (!s.cert) {
            o.require(false, "missing certificate");
            return o;
        }
        v.push_back(estimate_volume(*s.cert, B, 1000000, kCheckSeed));
    }
    const auto candidates = fresh_samples(spec, 2000, kCheckSeed + 1);
    const auto image = estimate_image_volume(spec.f(), spec.S(), candidates, B, 200000, kCheckSeed + 2);
    std::string values;
    for (std::size_t k = 0; k < v.size(); ++k) {
        values += fmt("%.4f ", v[k].estimate);
        if (k > 0) {
            const double slack = 3.0 * std::hypot(v[k].std_error, v[k - 1].std_error);
            o.require(v[k].estimate <= v[k - 1].estimate + slack, fmt("volume rises at r=%.0f", static_cast<double>(k + 1)));
        }
        o.require(v[k].estimate >= image.estimate - 3.0 * std::hypot(v[k].std_error, image.std_error),
                  fmt("r=%.0f below the image volume", static_cast<double>(k + 1)));
    }
    if (o.pass) o.detail = "volumes " + values + fmt("(image %.4f +- %.4f)", image.estimate, image.std_error);
    return o;
}

Outcome method_equivalence() {
    Outcome o;
    const auto S = unit_disk_x();
    const auto B = unit_disk_y();
    const auto f = ball_image_map();
    const BuildOptions low{true, true};
    std::string summary;
    for (int r = 1; r <= 3; ++r) {
        const auto a = solve_and_extract("ball method2 r" + std::to_string(r), build_method2_sos(S, B, f, r, low));
        const auto b = solve_and_extract("ball method2-lift r" + std::to_string(r), build_method2_lifted(S, B, f, r, low));
        if (!a.cert || !b.cert) {
            o.require(false, "r=" + std::to_string(r) + " did not solve");
            continue;
        }
        const double rel = std::abs(a.cert->objective - b.cert->objective) /
                           std::max({std::abs(a.cert->objective), std::abs(b.cert->objective), 1e-12});
        const double dw = max_abs_coefficient(a.cert->w - b.cert->w);
        summary += fmt("r=%.0f objectives %.6f / ", r, a.cert->objective) + fmt("%.6f, max w difference %.3g; ", b.cert->objective, dw);
        o.require(rel <= 1e-4, fmt("r=%.0f objectives differ by %.3g relative", r, rel));
        o.require(dw <= 1e-3, fmt("r=%.0f w coefficients differ by %.3g", r, dw));
    }
    o.detail = summary + (o.pass ? "" : "| " + o.detail);
    return o;
}

// Random SOS p = sum_k s_k^2 with deg s_k <= 3; the Gram matrix is read back and p rebuilt independently.
Outcome sos_reconstruction() {
    Outcome o;
    double worst_cert = 0.0;
    for (const auto& [name, res] : g_residuals) {
        worst_cert = std::max(worst_cert, res);
        o.require(res <= 1e-6, name + fmt(" residual %.3g", res));
    }
    auto membership = [](const Polynomial& p, int r) {
        const SemialgebraicSet free_space(p.signature());
        auto built = sos_membership_rows(p, free_space, r);
        auto res = solve(built.first, {1e-10, 200});
        return std::make_pair(std::move(built.second), std::move(res));
    };
    auto rebuilt_gap = [](const Polynomial& p, const GramLayout& layout, const SolverResult& res) {
        const auto& basis = layout.blocks.front().basis;
        const auto& G = res.X.front();
        Polynomial q(p.signature());
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < basis.size(); ++j)
                q += Polynomial::monomial(p.signature(), basis[i] + basis[j], G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().minCoeff();
        return std::max(max_abs_coefficient(q - p), -min_eig);
    };
    const BlockSignature one{1, 0};
    const auto x = Polynomial::variable(one, 0);
    const auto sq = (x + Polynomial::constant(one, 1.0)) * (x + Polynomial::constant(one, 1.0));
    {
        const auto [layout, res] = membership(sq, 1);
        o.require(res.usable() && rebuilt_gap(sq, layout, res) <= 1e-7, "(x+1)^2 not certified");
    }
    {
        const auto [layout, res] = membership(x, 1);
        o.require(res.status == SolverStatus::kInfeasible, std::string("x reported ") + status_name(res.status));
    }
    CounterRng rng(kCheckSeed);
    double worst_random = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + t % 3;
        const int half = 1 + (t / 3) % 3;
        const BlockSignature sig{n, 0};
        Polynomial p(sig);
        for (int k = 0; k < 3; ++k) {
            Polynomial s(sig);
            for (const auto& alpha : enumerate_multi_indices(n, half)) s += Polynomial::monomial(sig, alpha, rng.uniform(-1.0, 1.0));
            p += s * s;
        }
        const auto [layout, res] = membership(p, half);
        if (!res.usable()) {
            o.require(false, "random SOS " + std::to_string(t) + " " + status_name(res.status));
            continue;
        }
        const double gap = rebuilt_gap(p, layout, res);
        worst_random = std::max(worst_random, gap);
        o.require(gap <= 1e-7, fmt("random SOS %.0f residual %.3g", t, gap));
    }
    if (o.pass)
        o.detail = fmt("%.0f certificates, worst residual %.3g; random SOS worst %.3g", static_cast<double>(g_residuals.size()),
                       worst_cert, worst_random);
    return o;
}

Outcome lebesgue_moments_check() {
    Outcome o;
    int compared = 0;
    for (const auto& [lo, hi] : {std::pair{-1.0, 1.0}, std::pair{0.0, 1.0}}) {
        const auto z = lebesgue_moments(BoundingSet::box(Eigen::Vector2d::Constant(lo), Eigen::Vector2d::Constant(hi)), 8);
        for (const auto& [beta, v] : z.values()) {
            double expect = 1.0;
            for (int i = 0; i < 2; ++i) expect *= (std::pow(hi, beta[i] + 1) - std::pow(lo, beta[i] + 1)) / (beta[i] + 1);
            o.require(v == expect, "box moment mismatch");
            ++compared;
        }
    }
    const auto z = lebesgue_moments(unit_disk_y(), 8);
    double worst = 0.0;
    for (const auto& [beta, v] : z.values()) {
        const double q = disk_moment_quadrature(Eigen::Vector2d::Zero(), 1.0, beta[0], beta[1]);
        const double err = std::abs(q) > 1e-12 ? std::abs(v - q) / std::abs(q) : std::abs(v);
        worst = std::max(worst, err);
        o.require(err <= 1e-9, "disk moment mismatch");
        ++compared;
    }
    if (o.pass) o.detail = fmt("%.0f moments compared, worst disk relative error %.3g", compared, worst);
    return o;
}

Outcome sparsity() {
    Outcome o;
    const std::vector<std::pair<std::vector<std::vector<int>>, int>> good{
        {{{0, 1, 2}, {2, 3}}, 4}, {{{0, 1}, {1, 2}, {2, 3}}, 4}, {{{0, 1, 2}, {1, 2, 3}, {2, 4}}, 5}};
    const std::vector<std::pair<std::vector<std::vector<int>>, int>> bad{
        {{{0, 1}, {2, 3}, {1, 3}}, 4}, {{{0, 1}, {1, 2}, {2, 3}, {0, 3}}, 4}, {{{0, 1, 2}, {3, 4}, {2, 4}, {1, 3}}, 5}};
    for (const auto& [c, n] : good) o.require(check_rip(c, n).holds, "RIP positive case rejected");
    for (const auto& [c, n] : bad) o.require(!check_rip(c, n).holds, "RIP negative case accepted");

    const auto spec = load("sparse_chain.txt");
    const auto S = spec.S();
    const auto B = spec.B();
    const auto f = spec.f();
    auto dense_built = build_method1_primal(S, B, f, 3);
    auto sparse_built = build_method1_sparse(S, B, f, spec.cliques, 3);
    const long long dense_vars = dense_built.first.num_scalar_variables();
    const long long sparse_vars = sparse_built.first.num_scalar_variables();
    o.require(sparse_vars < dense_vars, "sparse program is not smaller");
    const auto dense = solve_and_extract("chain dense r3", std::move(dense_built));
    const auto sparse = solve_and_extract("chain sparse r3", std::move(sparse_built));
    if (!dense.cert || !sparse.cert) {
        o.require(false, "chain instance did not solve");
        return o;
    }
    o.require(sparse.cert->objective >= dense.cert->objective - 1e-5,
              fmt("sparse %.8g below dense %.8g", sparse.cert->objective, dense.cert->objective));
    const auto xs = fresh_samples(spec, 10000, kCheckSeed);
    int checked = 0;
    check_containment(o, "chain sparse r3", *sparse.cert, f, xs, checked);
    o.require(checked == 1, "sparse certificate not accepted");
    if (o.pass)
        o.detail = fmt("scalars %.0f sparse vs %.0f dense; objective ", static_cast<double>(sparse_vars), static_cast<double>(dense_vars)) +
                   fmt("%.6f sparse vs %.6f dense", sparse.cert->objective, dense.cert->objective);
    return o;
}

// Every builder that applies to each fixture, at its minimal order and one above.
std::vector<std::pair<std::string, std::pair<ConicProgram, GramLayout>>> fixture_programs() {
    std::vector<std::pair<std::string, std::pair<ConicProgram, GramLayout>>> out;
    for (const char* name : {"ball_image.txt", "projection.txt", "pareto.txt", "lifted_abs.txt", "constant_map.txt",
                             "projection_degenerate.txt", "sparse_chain.txt"}) {
        const auto spec = load(name);
        const auto S = spec.S();
        const auto B = spec.B();
        const auto f = spec.f();
        // Methods that are not well posed for a fixture (Method 2 on a constant map) are skipped.
        auto add = [&](Method m, const std::string& tag, auto build) {
            int r0 = 0;
            try {
                r0 = minimal_order(m, S, B, f);
            } catch (const std::invalid_argument&) {
                return;
            }
            for (int r = r0; r <= r0 + 1; ++r) out.emplace_back(std::string(name) + " " + tag + " r" + std::to_string(r), build(r));
        };
        add(Method::kMethod1, "method1", [&](int r) { return build_method1_primal(S, B, f, r); });
        add(Method::kMethod1, "method1-dual", [&](int r) { return build_method1_dual(S, B, f, r); });
        add(Method::kMethod2, "method2", [&](int r) { return build_method2_sos(S, B, f, r); });
        add(Method::kMethod2, "method2-moment", [&](int r) { return build_method2_moment(S, B, f, r); });
        add(Method::kMethod2Lift, "method2-lift", [&](int r) { return build_method2_lifted(S, B, f, r); });
        if (spec.is_projection())
            add(Method::kProjection, "projection", [&](int r) { return build_projection(S, spec.m(), B, r); });
        if (!spec.cliques.empty())
            add(Method::kMethod1, "method1-sparse", [&](int r) { return build_method1_sparse(S, B, f, spec.cliques, r); });
    }
    return out;
}

Outcome size_bounds_check() {
    Outcome o;
    int built = 0;
    for (const auto& [name, prog_layout] : fixture_programs()) {
        const auto& [prog, layout] = prog_layout;
        ++built;
        bool ok = true;
        try {
            check_size_bounds(prog, layout);
        } catch (const std::logic_error&) {
            ok = false;
        }
        ok = ok && prog.num_free <= layout.bounds.max_variables && prog.max_block_side() <= layout.bounds.max_side;
        o.require(ok, name + " exceeds its bounds");
    }
    if (o.pass) o.detail = std::to_string(built) + " programs within their free-variable and block-side bounds";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome solver_contract() {
    Outcome o;
    // Weak duality: one solve per fixture at the cheapest order that is well posed.
    int solved = 0;
    for (const char* name : {"ball_image.txt", "projection.txt", "pareto.txt", "lifted_abs.txt", "constant_map.txt",
                             "projection_degenerate.txt", "sparse_chain.txt"}) {
        const auto spec = load(name);
        const auto S = spec.S();
        const auto B = spec.B();
        const auto f = spec.f();
        const auto prog = spec.has_lift() ? build_method2_lifted(S, B, f, minimal_order(Method::kMethod2Lift, S, B, f)).first
                                          : build_method1_primal(S, B, f, 1, {true, true}).first;
        const auto res = solve(prog, {1e-8, 200});
        if (!res.usable()) {
            o.require(false, std::string(name) + " " + status_name(res.status));
            continue;
        }
        ++solved;
        const double scale = 1.0 + std::abs(res.primal_objective) + std::abs(res.dual_objective);
        o.require(res.primal_objective >= res.dual_objective - 1e-7 * scale, std::string(name) + " violates weak duality");
        double xs = 0.0;
        for (std::size_t k = 0; k < res.X.size(); ++k) xs += (res.X[k].array() * res.S[k].array()).sum();
        o.require(xs >= -1e-9 * scale, std::string(name) + fmt(" <X, S> = %.3g", xs));
    }

    // Determinism of full runs.
    const auto spec = load("ball_image.txt");
    const fs::path root = fs::temp_directory_path() / "polyimage_acceptance";
    fs::remove_all(root);
    RunConfig cfg;
    cfg.order_min = 1;
    cfg.order_max = 3;
    cfg.force_low_order = true;
    cfg.samples = 2000;
    cfg.volume_samples = 20000;
    cfg.grid_width = 21;
    cfg.grid_height = 21;
    cfg.write_sdpa = true;
    cfg.seed = kSolveSeed;
    std::vector<fs::path> dirs{root / "a", root / "b"};
    for (const auto& d : dirs) {
        cfg.out_dir = d.string();
        run_hierarchy(spec, cfg);
    }
    int files = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
        ++files;
        const auto other = dirs[1] / entry.path().filename();
        o.require(fs::exists(other) && slurp(entry.path()) == slurp(other), entry.path().filename().string() + " differs");
    }
    o.require(files > 0, "no artifacts written");
    fs::remove_all(root);

    // SDPA round trip on every fixture program.
    int round_trips = 0;
    for (const auto& [name, prog_layout] : fixture_programs()) {
        const ConicProgram& p = prog_layout.first;
        std::ostringstream out;
        export_sdpa(p, out);
        std::istringstream in(out.str());
        const ConicProgram q = import_sdpa(in);
        std::ostringstream again;
        export_sdpa(q, again);
        const bool same = q.form == p.form && q.sense == p.sense && q.num_free == p.num_free && q.block_sizes == p.block_sizes &&
                          q.block_names == p.block_names && q.b == p.b && q.c_free == p.c_free && q.c_entries == p.c_entries &&
                          q.free_rows == p.free_rows && q.row_entries == p.row_entries && q.row_scale == p.row_scale &&
                          again.str() == out.str();
        o.require(same, name + " does not round-trip");
        ++round_trips;
    }
    if (o.pass)
        o.detail = fmt("weak duality on %.0f fixtures, %.0f identical artifacts, %.0f SDPA round trips", solved, files, round_trips);
    return o;
}

Outcome pareto_preprocessing() {
    Outcome o;
    const auto scaled = pareto_scale(load("pareto.txt"), 0, kSolveSeed);
    const auto f = scaled.f();
    const auto xs = fresh_samples(scaled, 10000, kCheckSeed);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < xs.cols(); ++k) worst = std::max(worst, f.evaluate(xs.col(k)).norm());
    o.require(worst <= 1.0 + 1e-6, fmt("scaled image reaches norm %.8f", worst));
    if (o.pass)
        o.detail = fmt("max norm %.6f; a = (%.6g, %.6g)", worst, scaled.scale_a[0], scaled.scale_a[1]) +
                   fmt(", b = (%.6g, %.6g)", scaled.scale_b[0], scaled.scale_b[1]);
    return o;
}

std::set<int> parse_list(const std::string& text) {
    std::set<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(std::stoi(item));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> known_failures;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        const std::string prefix = "--known-failures=";
        if (arg.rfind(prefix, 0) == 0) {
            known_failures = parse_list(arg.substr(prefix.size()));
        } else {
            std::fprintf(stderr, "usage: acceptance [--known-failures=N,M]\n");
            return 2;
        }
    }

    // Order matters: the residual criterion looks at every certificate extracted before it.
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, duality_gap},      {2, containment},        {3, volume_monotonicity}, {4, method_equivalence},
        {7, sparsity},         {5, sos_reconstruction}, {6, lebesgue_moments_check}, {8, size_bounds_check},
        {9, solver_contract},  {10, pareto_preprocessing}};
    std::map<int, std::string> lines;
    std::set<int> failed;
    for (const auto& [id, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) failed.insert(id);
        char buf[96];
        std::snprintf(buf, sizeof buf, "criterion %d: %s (%.1f s) ", id, o.pass ? "PASS" : "FAIL", s);
        lines[id] = buf + o.detail;
        std::fprintf(stderr, "%s\n", lines[id].c_str());
    }
    for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
    std::printf("%zu of %zu criteria pass\n", criteria.size() - failed.size(), criteria.size());
    if (failed != known_failures) {
        std::printf("failing set differs from the expected one\n");
        return 1;
    }
    return 0;
}
