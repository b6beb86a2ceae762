#include "polyimage/certificate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "polyimage/random.hpp"
#include "polyimage/sampling.hpp"

namespace polyimage {

namespace {

// sum_{p,q} G_pq basis_p basis_q
Polynomial gram_polynomial(BlockSignature sig, const std::vector<MultiIndex>& basis, const Eigen::MatrixXd& G) {
    Polynomial s(sig);
    const int k = static_cast<int>(basis.size());
    for (int p = 0; p < k; ++p)
        for (int q = p; q < k; ++q) {
            const double c = (p == q ? 1.0 : 2.0) * G(p, q);
            if (c != 0.0) s.add_term(basis[static_cast<std::size_t>(p)] + basis[static_cast<std::size_t>(q)], c);
        }
    return s;
}

} // namespace

Certificate extract_certificate(const SolverResult& result, const GramLayout& layout) {
    if (!result.usable())
        throw std::runtime_error(std::string("extract_certificate: solver status is ") + status_name(result.status) +
                                 ", no certificate to read");
    if (result.X.size() != layout.blocks.size() || result.x_free.size() != static_cast<Eigen::Index>(layout.free_slots.size()))
        throw std::invalid_argument("extract_certificate: result does not match the layout");

    Certificate cert;
    cert.method = layout.method;
    cert.variant = layout.variant;
    cert.order = layout.order;
    cert.module_order = layout.module_order;
    cert.n = layout.signature.nx;
    cert.m = layout.signature.ny;
    cert.objective = result.objective;
    cert.status = result.status;
    const BlockSignature ys{0, cert.m};
    cert.q = cert.v = cert.w = Polynomial(ys);
    for (std::size_t k = 0; k < layout.free_slots.size(); ++k) {
        const auto& slot = layout.free_slots[k];
        Polynomial* target = slot.owner == "q" ? &cert.q : slot.owner == "v" ? &cert.v : slot.owner == "w" ? &cert.w : nullptr;
        if (!target) continue;
        if (slot.monomial.dim() != cert.m) throw std::logic_error("extract_certificate: payload slot outside y-space");
        target->add_term(slot.monomial, result.x_free(static_cast<Eigen::Index>(k)));
    }

    for (const auto& mem : layout.memberships) {
        Polynomial rest = mem.target.evaluate(result.x_free);
        for (int b : mem.blocks) {
            const auto& info = layout.blocks[static_cast<std::size_t>(b)];
            const Eigen::MatrixXd& G = result.X[static_cast<std::size_t>(b)];
            rest -= info.generator_poly * gram_polynomial(mem.signature, info.basis, G);
            cert.grams.push_back({info.name, mem.name, info.generator_poly, info.basis, G});
        }
        for (const auto& mult : mem.multipliers) {
            Polynomial h(mem.signature);
            for (const auto& [k, alpha] : mult.terms) h.add_term(alpha, result.x_free(static_cast<Eigen::Index>(k)));
            rest -= h * mult.equation;
        }
        cert.residual = std::max(cert.residual, rest.max_abs_coefficient());
    }
    return cert;
}

ContainmentReport containment_check(const Certificate& cert, const PolynomialMap& f, const Eigen::MatrixXd& xs, double tol) {
    if (f.m() != cert.m) throw std::invalid_argument("containment_check: map and certificate dimensions differ");
    if (xs.rows() != f.n()) throw std::invalid_argument("containment_check: sample dimension mismatch");
    ContainmentReport rep;
    rep.samples = static_cast<int>(xs.cols());
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < xs.cols(); ++i) {
        const double margin = cert.margin(f.evaluate(xs.col(i)));
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -tol) ++rep.violations;
    }
    return rep;
}

Eigen::MatrixXd sample_bounding_set(const BoundingSet& B, long long count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_bounding_set: count must be >= 1");
    Eigen::MatrixXd out(B.dim(), count);
    CounterRng rng(seed);
    Eigen::VectorXd y(B.dim());
    for (long long kept = 0; kept < count;) {
        for (int i = 0; i < B.dim(); ++i) y(i) = rng.uniform(B.lo()(i), B.hi()(i));
        if (B.contains(y)) out.col(kept++) = y;
    }
    return out;
}

VolumeEstimate volume_from_hits(double volume, long long samples, long long hits, std::uint64_t seed) {
    VolumeEstimate v;
    v.samples = samples;
    v.hits = hits;
    v.seed = seed;
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    v.estimate = volume * p;
    v.std_error = volume * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    return v;
}

VolumeEstimate estimate_volume(const Certificate& cert, const BoundingSet& B, long long count, std::uint64_t seed) {
    if (count < 1000) throw std::invalid_argument("estimate_volume: need at least 1000 samples");
    if (B.dim() != cert.m) throw std::invalid_argument("estimate_volume: B and certificate dimensions differ");
    // Chunked so 1e6 samples never sit in memory at once; the stream of draws is the same.
    CounterRng rng(seed);
    Eigen::VectorXd y(B.dim());
    long long hits = 0;
    for (long long kept = 0; kept < count;) {
        for (int i = 0; i < B.dim(); ++i) y(i) = rng.uniform(B.lo()(i), B.hi()(i));
        if (!B.contains(y)) continue;
        ++kept;
        if (cert.margin(y) >= 0.0) ++hits;
    }
    return volume_from_hits(B.volume(), count, hits, seed);
}

namespace {

double h_value(const PolynomialMap& f, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return -(y - f.evaluate(x)).squaredNorm();
}

} // namespace

double empirical_h(const Eigen::Ref<const Eigen::VectorXd>& y, const PolynomialMap& f, const SemialgebraicSet& S,
                   const Eigen::MatrixXd& candidates) {
    if (candidates.cols() < 1) throw std::invalid_argument("empirical_h: need at least one candidate");
    if (y.size() != f.m() || candidates.rows() != f.n()) throw std::invalid_argument("empirical_h: dimension mismatch");
    const Eigen::VectorXd yy = y;
    Eigen::Index best_i = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < candidates.cols(); ++i) {
        const double h = h_value(f, candidates.col(i), yy);
        if (h > best) {
            best = h;
            best_i = i;
        }
    }
    Eigen::VectorXd x = candidates.col(best_i);
    for (int step = 0; step < 50; ++step) {
        // grad_x h_f = 2 J(x)' (y - f(x))
        const Eigen::VectorXd grad = 2.0 * f.jacobian(x).transpose() * (yy - f.evaluate(x));
        double t = 1e-2;
        bool moved = false;
        for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
            const Eigen::VectorXd trial = x + t * grad;
            if (!S.contains(trial)) continue;
            const double h = h_value(f, trial, yy);
            if (h >= best) {
                x = trial;
                best = h;
                moved = true;
            }
            break;
        }
        if (!moved) break;
    }
    return std::min(best, 0.0);
}

double empirical_h(const Eigen::Ref<const Eigen::VectorXd>& y, const PolynomialMap& f, const SemialgebraicSet& S,
                   int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("empirical_h: M must be >= 1");
    return empirical_h(y, f, S, sample_set(S, implied_box(S), count, seed).points);
}

bool image_member(const Eigen::Ref<const Eigen::VectorXd>& y, const PolynomialMap& f, const SemialgebraicSet& S,
                  const Eigen::MatrixXd& candidates, const Eigen::MatrixXd& candidate_images, double tol) {
    constexpr int kStarts = 4;
    const Eigen::VectorXd yy = y;
    std::vector<std::pair<double, Eigen::Index>> order;
    order.reserve(static_cast<std::size_t>(candidates.cols()));
    for (Eigen::Index i = 0; i < candidates.cols(); ++i) order.emplace_back((candidate_images.col(i) - yy).squaredNorm(), i);
    const auto starts = std::min<std::size_t>(kStarts, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end());
    for (std::size_t s = 0; s < starts; ++s) {
        Eigen::VectorXd x = candidates.col(order[s].second);
        Eigen::VectorXd r = f.evaluate(x) - yy;
        double lambda = 1e-3;
        for (int it = 0; it < 60 && r.norm() > tol; ++it) {
            const Eigen::MatrixXd J = f.jacobian(x);
            Eigen::MatrixXd H = J.transpose() * J;
            H.diagonal().array() += lambda * (1.0 + H.diagonal().array());
            const Eigen::VectorXd trial = x - H.ldlt().solve(J.transpose() * r);
            const Eigen::VectorXd rt = f.evaluate(trial) - yy;
            if (S.contains(trial) && rt.norm() < r.norm()) {
                x = trial;
                r = rt;
                lambda = std::max(lambda * 0.3, 1e-12);
            } else {
                lambda *= 10.0;
                if (lambda > 1e8) break;
            }
        }
        if (r.norm() <= tol) return true;
    }
    return false;
}

VolumeEstimate estimate_image_volume(const PolynomialMap& f, const SemialgebraicSet& S, const Eigen::MatrixXd& candidates,
                                     const BoundingSet& B, long long count, std::uint64_t seed) {
    if (B.dim() != f.m()) throw std::invalid_argument("estimate_image_volume: B dimension mismatch");
    const Eigen::MatrixXd images = f.evaluate_columns(candidates);
    const Eigen::MatrixXd ys = sample_bounding_set(B, count, seed);
    long long hits = 0;
    for (Eigen::Index i = 0; i < ys.cols(); ++i)
        if (image_member(ys.col(i), f, S, candidates, images)) ++hits;
    return volume_from_hits(B.volume(), count, hits, seed);
}

std::vector<GridRow> grid_evaluate(const Certificate& cert, const BoundingSet& B, int width, int height) {
    if (cert.m != 2 || B.dim() != 2) throw std::invalid_argument("grid_evaluate: needs a planar image (m = 2)");
    if (width < 2 || height < 2) throw std::invalid_argument("grid_evaluate: grid must be at least 2x2");
    std::vector<GridRow> rows;
    rows.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    Eigen::Vector2d y;
    for (int j = 0; j < height; ++j) {
        y(1) = B.lo()(1) + (B.hi()(1) - B.lo()(1)) * j / (height - 1);
        for (int i = 0; i < width; ++i) {
            y(0) = B.lo()(0) + (B.hi()(0) - B.lo()(0)) * i / (width - 1);
            const double value = cert.defining().evaluate(y);
            rows.push_back({y(0), y(1), value, B.contains(y) && value >= cert.threshold()});
        }
    }
    return rows;
}

void write_grid_csv(const std::vector<GridRow>& rows, std::ostream& out) {
    out << "y1,y2,value,inside\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%d\n", r.y1, r.y2, r.value, r.inside ? 1 : 0);
        out << buf;
    }
}

namespace {

void write_poly(std::ostream& out, const std::string& name, const Polynomial& p) {
    out << "[" << name << "]\n";
    char buf[40];
    for (const auto& [alpha, c] : p.terms()) {
        for (int i = 0; i < alpha.dim(); ++i) out << alpha[i] << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", c);
        out << buf << "\n";
    }
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

void write_certificate(const Certificate& cert, std::ostream& out) {
    char buf[40];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "method = " << method_name(cert.method) << "\n";
    out << "variant = " << cert.variant << "\n";
    out << "order = " << cert.order << "\n";
    out << "module_order = " << cert.module_order << "\n";
    out << "n = " << cert.n << "\n";
    out << "m = " << cert.m << "\n";
    out << "status = " << status_name(cert.status) << "\n";
    out << "objective = " << num(cert.objective) << "\n";
    out << "residual = " << num(cert.residual) << "\n";
    out << "threshold = " << num(cert.threshold()) << "\n";
    if (cert.method == Method::kMethod1) {
        write_poly(out, "q", cert.q);
    } else {
        if (cert.method == Method::kMethod2) write_poly(out, "v", cert.v);
        write_poly(out, "w", cert.w);
    }
}

Certificate read_certificate(std::istream& in) {
    Certificate cert;
    std::map<std::string, std::string> header;
    std::string line;
    std::string section;
    std::map<std::string, std::vector<std::string>> sections;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            sections[section];
            continue;
        }
        if (section.empty()) {
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("read_certificate: line " + std::to_string(lineno) + ": expected key = value");
            header[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
        } else {
            sections[section].push_back(t);
        }
    }
    auto get = [&](const char* key) {
        auto it = header.find(key);
        if (it == header.end()) throw std::invalid_argument(std::string("read_certificate: missing key ") + key);
        return it->second;
    };
    const auto method = parse_method(get("method"));
    if (!method) throw std::invalid_argument("read_certificate: unknown method " + get("method"));
    cert.method = *method;
    cert.variant = get("variant");
    cert.order = std::stoi(get("order"));
    cert.module_order = std::stoi(get("module_order"));
    cert.n = std::stoi(get("n"));
    cert.m = std::stoi(get("m"));
    const std::string st = get("status");
    cert.status = st == "optimal" ? SolverStatus::kOptimal : st == "near_optimal" ? SolverStatus::kNearOptimal : SolverStatus::kMaxIter;
    cert.objective = std::stod(get("objective"));
    cert.residual = std::stod(get("residual"));
    if (cert.m < 1) throw std::invalid_argument("read_certificate: m must be >= 1");
    const BlockSignature ys{0, cert.m};
    cert.q = cert.v = cert.w = Polynomial(ys);
    for (const auto& [name, lines] : sections) {
        Polynomial* p = name == "q" ? &cert.q : name == "v" ? &cert.v : name == "w" ? &cert.w : nullptr;
        if (!p) throw std::invalid_argument("read_certificate: unknown section [" + name + "]");
        for (const auto& l : lines) {
            std::istringstream ss(l);
            std::vector<int> ex(static_cast<std::size_t>(cert.m));
            for (auto& e : ex)
                if (!(ss >> e) || e < 0) throw std::invalid_argument("read_certificate: bad exponent line: " + l);
            std::string coef;
            if (!(ss >> coef)) throw std::invalid_argument("read_certificate: missing coefficient: " + l);
            p->add_term(MultiIndex(ex), std::stod(coef));
        }
    }
    return cert;
}

} // namespace polyimage
