#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "examples.hpp"
#include "polyimage/hierarchy.hpp"

using namespace polyimage;
using namespace testdata;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("polyimage_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_run(const fs::path& out) {
    RunConfig cfg;
    cfg.method = Method::kMethod1;
    cfg.order_min = 1;
    cfg.order_max = 2;
    cfg.force_low_order = true;
    cfg.samples = 500;
    cfg.volume_samples = 5000;
    cfg.grid_width = 4;
    cfg.grid_height = 3;
    cfg.out_dir = out.string();
    return cfg;
}

} // namespace

TEST_SUITE("hierarchy") {

TEST_CASE("pareto scaling maps sampled images into the unit disk") {
    const auto spec = load("pareto.txt");
    const auto scaled = pareto_scale(spec, 0, 1);
    REQUIRE(scaled.scaled);
    REQUIRE(scaled.scale_a.size() == 2);
    CHECK(scaled.scale_a[0] < scaled.scale_b[0]);
    CHECK(scaled.scale_a[1] < scaled.scale_b[1]);
    const auto f = scaled.f();
    const auto xs = sample_problem(scaled, 5000, 77).points;
    for (Eigen::Index k = 0; k < xs.cols(); ++k) CHECK(f.evaluate(xs.col(k)).norm() <= 1.0 + 1e-6);
    // Scaling twice is a no-op.
    CHECK(emit_problem(pareto_scale(scaled, 0, 1)) == emit_problem(scaled));
    // Mapping back recovers the original objectives.
    const auto f0 = spec.f();
    const Eigen::VectorXd x = xs.col(0);
    for (int j = 0; j < 2; ++j) {
        const double back = scaled.scale_a[j] + (scaled.scale_b[j] - scaled.scale_a[j]) * f.evaluate(x)(j);
        CHECK(back == doctest::Approx(f0.evaluate(x)(j)).epsilon(1e-9));
    }
}

TEST_CASE("unit scaling leaves the map alone") {
    const auto spec = load("ball_image.txt");
    const auto same = apply_scaling(spec, {0.0, 0.0}, {1.0, 1.0});
    CounterRng rng(6);
    for (int k = 0; k < 10; ++k) {
        const Eigen::VectorXd x = random_point(rng, 2);
        CHECK((same.f().evaluate(x) - spec.f().evaluate(x)).norm() <= 1e-15);
    }
    CHECK_THROWS_AS(apply_scaling(spec, {0.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("constant objectives are degenerate") {
    auto spec = load("constant_map.txt");
    spec.pareto = true;
    CHECK_THROWS_WITH_AS(pareto_scale(spec, 0, 1), doctest::Contains("degenerate"), std::invalid_argument);
}

TEST_CASE("runs are reproducible and refuse to overwrite") {
    const auto spec = load("ball_image.txt");
    const auto a = scratch_dir("a");
    const auto b = scratch_dir("b");
    const auto ra = run_hierarchy(spec, small_run(a));
    const auto rb = run_hierarchy(spec, small_run(b));
    CHECK(ra.exit_code() == 0);
    REQUIRE(ra.orders.size() == 2);
    for (const auto& o : ra.orders) {
        CHECK(o.solved);
        CHECK(o.accepted);
        CHECK(o.containment.violations == 0);
    }
    for (const char* name : {"method1_report.txt", "method1_r1.cert", "method1_r2.cert", "method1_r2_grid.csv"}) {
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    CHECK_THROWS_AS(run_hierarchy(spec, small_run(a)), std::runtime_error);
    auto again = small_run(a);
    again.overwrite = true;
    CHECK(run_hierarchy(spec, again).exit_code() == 0);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("export only writes programs and solves nothing") {
    const auto spec = load("ball_image.txt");
    const auto dir = scratch_dir("export");
    auto cfg = small_run(dir);
    cfg.solver = SolverMode::kExportOnly;
    cfg.grid_width = cfg.grid_height = 0;
    const auto rep = run_hierarchy(spec, cfg);
    CHECK(rep.exit_code() == 0);
    for (const auto& o : rep.orders) {
        CHECK(o.built);
        CHECK_FALSE(o.solved);
        CHECK(o.rows > 0);
    }
    CHECK(fs::exists(dir / "method1_r1.dat-s"));
    CHECK_FALSE(fs::exists(dir / "method1_r1.cert"));
    fs::remove_all(dir);
}

TEST_CASE("configuration errors") {
    const auto spec = load("ball_image.txt");
    RunConfig cfg;
    cfg.order_min = cfg.order_max = 1;
    CHECK_THROWS_AS(run_hierarchy(spec, cfg), std::invalid_argument);
    cfg.force_low_order = true;
    cfg.sparse = true;
    CHECK_THROWS_AS(run_hierarchy(spec, cfg), std::invalid_argument);
    cfg.sparse = false;
    cfg.method = Method::kProjection;
    CHECK_THROWS_AS(run_hierarchy(spec, cfg), std::invalid_argument);
}

TEST_CASE("exit code when nothing solves") {
    RunReport rep;
    rep.orders.resize(2);
    CHECK(rep.exit_code() == 3);
    rep.orders[1].solved = true;
    CHECK(rep.exit_code() == 0);
    rep.orders[1].accepted = true;
    rep.orders[1].containment.violations = 2;
    CHECK(rep.exit_code() == 1);
}

} // TEST_SUITE
