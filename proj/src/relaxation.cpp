#include "polyimage/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "polyimage/sdp_solver.hpp"
#include "relaxation_internal.hpp"

namespace polyimage {

Polynomial AffinePolynomial::evaluate(const Eigen::VectorXd& x_free) const {
    Polynomial out = constant;
    for (const auto& [k, P] : linear) out += P * x_free(k);
    return out;
}

int AffinePolynomial::degree() const {
    int d = constant.degree();
    for (const auto& [k, P] : linear) d = std::max(d, P.degree());
    return d;
}

namespace detail {

std::vector<MultiIndex> monomial_basis(int dim, const std::vector<int>& vars, int degree) {
    if (degree < 0) return {};
    if (static_cast<int>(vars.size()) == dim) return enumerate_multi_indices(dim, degree);
    std::vector<MultiIndex> out;
    for (const auto& a : enumerate_multi_indices(static_cast<int>(vars.size()), degree)) {
        std::vector<int> ex(static_cast<std::size_t>(dim), 0);
        for (std::size_t i = 0; i < vars.size(); ++i) ex[static_cast<std::size_t>(vars[i])] = a[static_cast<int>(i)];
        out.emplace_back(std::move(ex));
    }
    // Variable subsets need not be sorted; restore the graded lex order of the ambient space.
    std::sort(out.begin(), out.end(), GradedLexLess{});
    return out;
}

std::vector<int> all_vars(int dim) {
    std::vector<int> v(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

std::vector<Generator> dense_generators(const SemialgebraicSet& A) {
    std::vector<Generator> gens;
    const auto vars = all_vars(A.dim());
    gens.push_back({Polynomial::constant(A.signature(), 1.0), vars, "g0"});
    for (int j = 0; j < A.size(); ++j) gens.push_back({A.constraint(j), vars, "g" + std::to_string(j + 1)});
    for (int k = 0; k < A.num_equations(); ++k)
        gens.push_back({A.equations()[static_cast<std::size_t>(k)], vars, "e" + std::to_string(k + 1), true});
    return gens;
}

int half_degree(const Polynomial& g) { return (g.degree() + 1) / 2; }

SosBuilder::SosBuilder(Method method, std::string variant) {
    prog_.form = ConicProgram::Form::kEquality;
    prog_.sense = ConicProgram::Sense::kMinimize;
    layout_.method = method;
    layout_.variant = std::move(variant);
}

int SosBuilder::add_free(const std::string& owner, const MultiIndex& monomial, double cost) {
    layout_.free_slots.push_back({owner, monomial});
    return prog_.add_free(cost);
}

void SosBuilder::add_membership(const std::string& name, const AffinePolynomial& target,
                                const std::vector<Generator>& generators, int r, bool allow_low_order) {
    const BlockSignature sig = target.constant.signature();
    const int dim = sig.total();
    if (target.degree() > 2 * r)
        throw std::invalid_argument("membership '" + name + "': target degree " + std::to_string(target.degree()) +
                                    " exceeds 2r = " + std::to_string(2 * r));
    const int group = static_cast<int>(layout_.row_groups.size());
    layout_.row_groups.push_back(name);
    MembershipInfo info;
    info.name = name;
    info.signature = sig;
    info.target = target;
    info.order = r;

    struct RowData {
        std::vector<std::pair<int, double>> free;
        std::vector<SymEntry> entries;
        double constant = 0.0;
    };
    std::map<MultiIndex, RowData, GradedLexLess> rows;

    for (std::size_t gi = 0; gi < generators.size(); ++gi) {
        const auto& gen = generators[gi];
        if (gen.poly.signature() != sig) throw std::invalid_argument("membership '" + name + "': generator signature mismatch");
        const int rj = half_degree(gen.poly);
        if (rj > r) {
            if (allow_low_order) continue;
            throw std::invalid_argument("membership '" + name + "': order " + std::to_string(r) +
                                        " is below the half-degree of generator " + gen.label);
        }
        if (gen.equality) {
            EquationMultiplier mult{name + ":" + gen.label, gen.poly, {}};
            for (const auto& alpha : monomial_basis(dim, gen.vars, 2 * r - gen.poly.degree())) {
                const int k = add_free("h:" + mult.name, alpha, 0.0);
                for (const auto& [delta, c] : gen.poly.terms()) rows[alpha + delta].free.emplace_back(k, -c);
                mult.terms.emplace_back(k, alpha);
            }
            info.multipliers.push_back(std::move(mult));
            continue;
        }
        auto basis = monomial_basis(dim, gen.vars, r - rj);
        const int block = prog_.add_block(name + ":" + gen.label, static_cast<int>(basis.size()));
        for (int a = 0; a < static_cast<int>(basis.size()); ++a)
            for (int b = a; b < static_cast<int>(basis.size()); ++b) {
                const MultiIndex ab = basis[static_cast<std::size_t>(a)] + basis[static_cast<std::size_t>(b)];
                for (const auto& [delta, c] : gen.poly.terms()) rows[ab + delta].entries.push_back({block, a, b, -c});
            }
        info.blocks.push_back(static_cast<int>(layout_.blocks.size()));
        layout_.blocks.push_back({prog_.block_names.back(), group, static_cast<int>(gi), gen.poly, std::move(basis)});
    }
    for (const auto& [gamma, c] : target.constant.terms()) rows[gamma].constant += c;
    for (const auto& [k, P] : target.linear)
        for (const auto& [gamma, c] : P.terms()) rows[gamma].free.emplace_back(k, c);

    for (auto& [gamma, data] : rows) {
        if (data.entries.empty() && data.free.empty()) {
            if (data.constant != 0.0) {
                std::ostringstream os;
                os << "membership '" << name << "': target monomial " << gamma << " is not reachable by any multiplier";
                throw InfeasibleMembership(os.str());
            }
            continue;
        }
        const int row = prog_.add_row(-data.constant);
        for (const auto& [k, v] : data.free) prog_.add_free_coefficient(row, k, v);
        for (const auto& e : data.entries) prog_.add_entry(row, e.block, e.row, e.col, e.value);
        layout_.rows.push_back({group, gamma});
    }
    layout_.memberships.push_back(std::move(info));
}

std::pair<ConicProgram, GramLayout> SosBuilder::finish(bool normalize) {
    prog_.finalize();
    if (normalize) prog_.normalize_rows();
    return {std::move(prog_), std::move(layout_)};
}

MomentBuilder::MomentBuilder(Method method, std::string variant) {
    prog_.form = ConicProgram::Form::kLmi;
    prog_.sense = ConicProgram::Sense::kMaximize;
    layout_.method = method;
    layout_.variant = std::move(variant);
}

int MomentBuilder::add_sequence(const std::string& name, BlockSignature sig, int max_degree) {
    const int group = static_cast<int>(layout_.row_groups.size());
    layout_.row_groups.push_back(name);
    auto& index = index_[group];
    for (const auto& gamma : enumerate_multi_indices(sig.total(), max_degree)) {
        index.emplace(gamma, prog_.add_row(0.0));
        layout_.rows.push_back({group, gamma});
    }
    signatures_.push_back(sig);
    return group;
}

int MomentBuilder::row(int group, const MultiIndex& gamma) const {
    const auto& index = index_.at(group);
    auto it = index.find(gamma);
    if (it == index.end()) throw std::logic_error("moment index outside the truncated sequence");
    return it->second;
}

int MomentBuilder::add_localizing(int group, const Polynomial& g, int t, const std::string& label, int membership,
                                  int generator) {
    auto basis = monomial_basis(g.dim(), all_vars(g.dim()), t);
    const int block = prog_.add_block(layout_.row_groups[static_cast<std::size_t>(group)] + ":" + label,
                                      static_cast<int>(basis.size()));
    for (int a = 0; a < static_cast<int>(basis.size()); ++a)
        for (int b = a; b < static_cast<int>(basis.size()); ++b) {
            const MultiIndex ab = basis[static_cast<std::size_t>(a)] + basis[static_cast<std::size_t>(b)];
            for (const auto& [delta, c] : g.terms()) prog_.add_entry(row(group, ab + delta), block, a, b, -c);
        }
    const int info_index = static_cast<int>(layout_.blocks.size());
    layout_.blocks.push_back({prog_.block_names.back(), membership, generator, g, std::move(basis)});
    return info_index;
}

void MomentBuilder::add_localizing_equation(int group, const Polynomial& e, int degree, const std::string& label,
                                            MembershipInfo& info) {
    EquationMultiplier mult{info.name + ":" + label, e, {}};
    for (const auto& alpha : monomial_basis(e.dim(), all_vars(e.dim()), degree)) {
        std::vector<std::pair<int, double>> coefs;
        for (const auto& [delta, c] : e.terms()) coefs.emplace_back(row(group, alpha + delta), -c);
        mult.terms.emplace_back(add_equality(coefs, 0.0, "h:" + mult.name, alpha), alpha);
    }
    info.multipliers.push_back(std::move(mult));
}

int MomentBuilder::add_equality(const std::vector<std::pair<int, double>>& coefficients, double rhs,
                                const std::string& owner, const MultiIndex& monomial) {
    const int k = prog_.add_free(rhs);
    for (const auto& [r, v] : coefficients) prog_.add_free_coefficient(r, k, v);
    layout_.free_slots.push_back({owner, monomial});
    return k;
}

void MomentBuilder::add_objective(int row, double coefficient) { prog_.b(row) += coefficient; }

std::pair<ConicProgram, GramLayout> MomentBuilder::finish(bool normalize) {
    prog_.finalize();
    if (normalize) prog_.normalize_rows();
    return {std::move(prog_), std::move(layout_)};
}

void require_archimedean(const SemialgebraicSet& A, const char* what) {
    if (!A.is_archimedean())
        throw std::invalid_argument(std::string(what) + " is not Archimedean: add a ball constraint N - |x|^2 >= 0");
}

void require_order(int r, int minimum, bool allow_low, const char* method) {
    if (r < 1) throw std::invalid_argument(std::string(method) + ": relaxation order must be >= 1");
    if (r < minimum && !allow_low)
        throw std::invalid_argument(std::string(method) + ": order " + std::to_string(r) + " is below the minimal order " +
                                    std::to_string(minimum));
}

} // namespace detail

using namespace detail;

std::pair<ConicProgram, GramLayout> sos_membership_rows(const Polynomial& target, const SemialgebraicSet& A, int r,
                                                        const BuildOptions& options) {
    if (target.signature() != A.signature()) throw std::invalid_argument("sos_membership_rows: signature mismatch");
    SosBuilder builder(Method::kMethod1, "membership");
    AffinePolynomial t(A.signature());
    t.constant = target;
    builder.add_membership("target", t, dense_generators(A), r, options.allow_low_order);
    auto out = builder.finish(options.normalize);
    out.second.order = r;
    out.second.module_order = r;
    out.second.signature = A.signature();
    return out;
}

int method1_module_order(const SemialgebraicSet& S, const BoundingSet& B, const PolynomialMap& f, int r_q) {
    const int hf_half = (build_h_f(f).degree() + 1) / 2;
    return std::max({r_q, hf_half, S.max_half_degree(), B.set().max_half_degree()});
}

namespace {

void check_inputs(const SemialgebraicSet& S, const BoundingSet& B, const PolynomialMap& f) {
    if (S.signature() != BlockSignature{f.n(), 0}) throw std::invalid_argument("S must live in the x-space of f");
    if (B.dim() != f.m()) throw std::invalid_argument("B must live in the y-space of f");
    require_archimedean(S, "S");
    require_archimedean(B.set(), "B");
}

std::vector<MultiIndex> y_monomials(int m, int degree) { return enumerate_multi_indices(m, degree); }

} // namespace

std::pair<ConicProgram, GramLayout> build_method1_primal(const SemialgebraicSet& S, const BoundingSet& B,
                                                         const PolynomialMap& f, int r_q, const BuildOptions& options) {
    check_inputs(S, B, f);
    if (r_q < 1) throw std::invalid_argument("build_method1_primal: order must be >= 1");
    const int r_mod = method1_module_order(S, B, f, r_q);
    const int n = f.n();
    const int m = f.m();
    const BlockSignature joint{n, m};
    const auto zB = lebesgue_moments(B, 2 * r_q);

    SosBuilder builder(Method::kMethod1, "primal");
    AffinePolynomial target(joint);
    target.constant = -build_h_f(f);
    for (const auto& beta : y_monomials(m, 2 * r_q)) {
        const int k = builder.add_free("q", beta, zB[beta]);
        target.linear.emplace_back(k, Polynomial::monomial(joint, beta.embedded(n + m, n)));
    }
    builder.add_membership("q-h", target, dense_generators(make_product_set(S, B)), r_mod, false);
    auto out = builder.finish(options.normalize);
    out.second.order = r_q;
    out.second.module_order = r_mod;
    out.second.signature = joint;
    out.second.bounds = size_bounds(Method::kMethod1, "primal", n, m, f.degree(), r_mod);
    check_size_bounds(out.first, out.second);
    return out;
}

std::pair<ConicProgram, GramLayout> build_method1_dual(const SemialgebraicSet& S, const BoundingSet& B,
                                                       const PolynomialMap& f, int r_q, const BuildOptions& options) {
    check_inputs(S, B, f);
    if (r_q < 1) throw std::invalid_argument("build_method1_dual: order must be >= 1");
    const int r_mod = method1_module_order(S, B, f, r_q);
    const int n = f.n();
    const int m = f.m();
    const BlockSignature joint{n, m};
    const auto zB = lebesgue_moments(B, 2 * r_q);
    const auto K = make_product_set(S, B);
    const Polynomial h = build_h_f(f);

    MomentBuilder builder(Method::kMethod1, "dual");
    const int z = builder.add_sequence("z", joint, 2 * r_mod);
    MembershipInfo info;
    info.name = "q-h";
    info.signature = joint;
    info.order = r_mod;
    info.target = AffinePolynomial(joint);
    info.target.constant = -h;

    const auto gens = dense_generators(K);
    for (std::size_t j = 0; j < gens.size(); ++j)
        if (!gens[j].equality)
            info.blocks.push_back(
                builder.add_localizing(z, gens[j].poly, r_mod - half_degree(gens[j].poly), gens[j].label, 0, static_cast<int>(j)));
    // Marginal conditions: the y-moments of z are those of the Lebesgue measure on B.
    for (const auto& beta : y_monomials(m, 2 * r_q)) {
        const MultiIndex full = beta.embedded(n + m, n);
        const int k = builder.add_equality({{builder.row(z, full), 1.0}}, zB[beta], "q", beta);
        info.target.linear.emplace_back(k, Polynomial::monomial(joint, full));
    }
    // Equation multipliers come after the payload, as in the coefficient-matching form.
    for (const auto& g : gens)
        if (g.equality) builder.add_localizing_equation(z, g.poly, 2 * r_mod - g.poly.degree(), g.label, info);
    for (const auto& [gamma, c] : h.terms()) builder.add_objective(builder.row(z, gamma), c);
    builder.layout().memberships.push_back(std::move(info));

    auto out = builder.finish(options.normalize);
    out.second.order = r_q;
    out.second.module_order = r_mod;
    out.second.signature = joint;
    out.second.bounds = size_bounds(Method::kMethod1, "dual", n, m, f.degree(), r_mod);
    check_size_bounds(out.first, out.second);
    return out;
}

std::pair<ConicProgram, GramLayout> build_method2_sos(const SemialgebraicSet& S, const BoundingSet& B,
                                                      const PolynomialMap& f, int r, const BuildOptions& options) {
    check_inputs(S, B, f);
    require_order(r, minimal_order(Method::kMethod2, S, B, f), options.allow_low_order, "build_method2_sos");
    const int n = f.n();
    const int m = f.m();
    const int d = f.degree();
    const BlockSignature xs{n, 0};
    const BlockSignature ys{0, m};
    const auto zB = lebesgue_moments(B, 2 * r);
    const auto betas = y_monomials(m, 2 * r);
    const auto images = monomial_images(f, betas);

    SosBuilder builder(Method::kMethod2, "sos");
    std::vector<int> v_idx, w_idx;
    for (const auto& beta : betas) v_idx.push_back(builder.add_free("v", beta, 0.0));
    for (const auto& beta : betas) w_idx.push_back(builder.add_free("w", beta, zB[beta]));

    AffinePolynomial vf(xs);
    AffinePolynomial wv(ys);
    AffinePolynomial w(ys);
    wv.constant = Polynomial::constant(ys, -1.0);
    for (std::size_t k = 0; k < betas.size(); ++k) {
        const Polynomial yb = Polynomial::monomial(ys, betas[k]);
        vf.linear.emplace_back(v_idx[k], images[k]);
        wv.linear.emplace_back(w_idx[k], yb);
        wv.linear.emplace_back(v_idx[k], -yb);
        w.linear.emplace_back(w_idx[k], yb);
    }
    builder.add_membership("vf", vf, dense_generators(S), r * d, options.allow_low_order);
    builder.add_membership("w-1-v", wv, dense_generators(B.set()), r, options.allow_low_order);
    builder.add_membership("w", w, dense_generators(B.set()), r, options.allow_low_order);
    auto out = builder.finish(options.normalize);
    out.second.order = r;
    out.second.module_order = r * d;
    out.second.signature = {n, m};
    out.second.bounds = size_bounds(Method::kMethod2, "sos", n, m, d, r);
    check_size_bounds(out.first, out.second);
    return out;
}

std::pair<ConicProgram, GramLayout> build_method2_moment(const SemialgebraicSet& S, const BoundingSet& B,
                                                         const PolynomialMap& f, int r, const BuildOptions& options) {
    check_inputs(S, B, f);
    require_order(r, minimal_order(Method::kMethod2, S, B, f), options.allow_low_order, "build_method2_moment");
    const int n = f.n();
    const int m = f.m();
    const int d = f.degree();
    const BlockSignature xs{n, 0};
    const BlockSignature ys{0, m};
    const auto zB = lebesgue_moments(B, 2 * r);
    const auto betas = y_monomials(m, 2 * r);
    const auto images = monomial_images(f, betas);

    MomentBuilder builder(Method::kMethod2, "moment");
    const int z0 = builder.add_sequence("z0", xs, 2 * r * d);
    const int z1 = builder.add_sequence("z1", ys, 2 * r);
    const int zh = builder.add_sequence("zhat1", ys, 2 * r);

    MembershipInfo vf{"vf", xs, AffinePolynomial(xs), r * d, {}, {}};
    MembershipInfo wv{"w-1-v", ys, AffinePolynomial(ys), r, {}, {}};
    MembershipInfo w{"w", ys, AffinePolynomial(ys), r, {}, {}};
    wv.target.constant = Polynomial::constant(ys, -1.0);

    auto add_all = [&](int seq, const SemialgebraicSet& A, int order, MembershipInfo& info, int membership) {
        const auto gens = dense_generators(A);
        for (std::size_t j = 0; j < gens.size(); ++j) {
            if (gens[j].equality) continue;
            const int rj = half_degree(gens[j].poly);
            if (rj > order) {
                if (options.allow_low_order) continue;
                throw std::invalid_argument("build_method2_moment: order too small for " + gens[j].label);
            }
            info.blocks.push_back(builder.add_localizing(seq, gens[j].poly, order - rj, gens[j].label, membership,
                                                         static_cast<int>(j)));
        }
    };
    add_all(z0, S, r * d, vf, 0);
    add_all(z1, B.set(), r, wv, 1);
    add_all(zh, B.set(), r, w, 2);

    // v_beta: L_{z0}(f^beta) - z1_beta = 0; w_beta: z1_beta + zhat1_beta = zB_beta.
    for (std::size_t k = 0; k < betas.size(); ++k) {
        std::vector<std::pair<int, double>> coefs;
        for (const auto& [alpha, c] : images[k].terms()) coefs.emplace_back(builder.row(z0, alpha), c);
        coefs.emplace_back(builder.row(z1, betas[k]), -1.0);
        const int kv = builder.add_equality(coefs, 0.0, "v", betas[k]);
        const Polynomial yb = Polynomial::monomial(ys, betas[k]);
        vf.target.linear.emplace_back(kv, images[k]);
        wv.target.linear.emplace_back(kv, -yb);
    }
    for (std::size_t k = 0; k < betas.size(); ++k) {
        const int kw = builder.add_equality({{builder.row(z1, betas[k]), 1.0}, {builder.row(zh, betas[k]), 1.0}},
                                            zB[betas[k]], "w", betas[k]);
        const Polynomial yb = Polynomial::monomial(ys, betas[k]);
        wv.target.linear.emplace_back(kw, yb);
        w.target.linear.emplace_back(kw, yb);
    }
    for (const auto& g : dense_generators(S)) {
        if (!g.equality) continue;
        if (half_degree(g.poly) > r * d) {
            if (options.allow_low_order) continue;
            throw std::invalid_argument("build_method2_moment: order too small for " + g.label);
        }
        builder.add_localizing_equation(z0, g.poly, 2 * r * d - g.poly.degree(), g.label, vf);
    }
    builder.add_objective(builder.row(z1, MultiIndex(m)), 1.0);
    builder.layout().memberships = {vf, wv, w};

    auto out = builder.finish(options.normalize);
    out.second.order = r;
    out.second.module_order = r * d;
    out.second.signature = {n, m};
    out.second.bounds = size_bounds(Method::kMethod2, "moment", n, m, d, r);
    check_size_bounds(out.first, out.second);
    return out;
}

std::pair<ConicProgram, GramLayout> build_method2_lifted(const SemialgebraicSet& S, const BoundingSet& B,
                                                         const PolynomialMap& f, int r, const BuildOptions& options) {
    check_inputs(S, B, f);
    require_order(r, minimal_order(Method::kMethod2Lift, S, B, f), options.allow_low_order, "build_method2_lifted");
    const int n = f.n();
    const int m = f.m();
    const BlockSignature joint{n, m};
    const BlockSignature ys{0, m};
    const auto zB = lebesgue_moments(B, 2 * r);

    // Module for w - 1: the S constraints and the graph constraints y_j = f_j(x).
    std::vector<Generator> lifted;
    const auto vars = all_vars(n + m);
    lifted.push_back({Polynomial::constant(joint, 1.0), vars, "g0"});
    for (int j = 0; j < S.size(); ++j) lifted.push_back({S.constraint(j).embedded(joint, 0), vars, "g" + std::to_string(j + 1)});
    const auto graph = graph_constraints(f);
    for (std::size_t j = 0; j < graph.size(); ++j)
        lifted.push_back({graph[j], vars, (j % 2 == 0 ? "graph+" : "graph-") + std::to_string(j / 2 + 1)});
    for (int k = 0; k < S.num_equations(); ++k)
        lifted.push_back({S.equations()[static_cast<std::size_t>(k)].embedded(joint, 0), vars, "e" + std::to_string(k + 1), true});

    SosBuilder builder(Method::kMethod2Lift, "lifted");
    AffinePolynomial w1(joint);
    AffinePolynomial w(ys);
    w1.constant = Polynomial::constant(joint, -1.0);
    for (const auto& beta : y_monomials(m, 2 * r)) {
        const int k = builder.add_free("w", beta, zB[beta]);
        w1.linear.emplace_back(k, Polynomial::monomial(joint, beta.embedded(n + m, n)));
        w.linear.emplace_back(k, Polynomial::monomial(ys, beta));
    }
    builder.add_membership("w-1", w1, lifted, r, options.allow_low_order);
    builder.add_membership("w", w, dense_generators(B.set()), r, options.allow_low_order);
    auto out = builder.finish(options.normalize);
    out.second.order = r;
    out.second.module_order = r;
    out.second.signature = {n, m};
    out.second.bounds = size_bounds(Method::kMethod2Lift, "lifted", n, m, f.degree(), r);
    check_size_bounds(out.first, out.second);
    return out;
}

std::pair<ConicProgram, GramLayout> build_projection(const SemialgebraicSet& S, int m, const BoundingSet& B, int r,
                                                     const BuildOptions& options) {
    const int n = S.dim();
    if (m < 1 || m > n) throw std::invalid_argument("build_projection: need 1 <= m <= n");
    if (S.signature() != BlockSignature{n, 0}) throw std::invalid_argument("build_projection: S must be an x-space set");
    if (B.dim() != m) throw std::invalid_argument("build_projection: B must have dimension m");
    require_archimedean(S, "S");
    require_archimedean(B.set(), "B");
    const PolynomialMap f = projection_map(n, m);
    require_order(r, minimal_order(Method::kProjection, S, B, f), options.allow_low_order, "build_projection");
    const BlockSignature xs{n, 0};
    const BlockSignature ys{0, m};
    const auto zB = lebesgue_moments(B, 2 * r);

    SosBuilder builder(Method::kProjection, "projection");
    AffinePolynomial w1(xs);
    AffinePolynomial w(ys);
    w1.constant = Polynomial::constant(xs, -1.0);
    for (const auto& beta : y_monomials(m, 2 * r)) {
        const int k = builder.add_free("w", beta, zB[beta]);
        w1.linear.emplace_back(k, Polynomial::monomial(xs, beta.embedded(n, 0)));
        w.linear.emplace_back(k, Polynomial::monomial(ys, beta));
    }
    builder.add_membership("w-1", w1, dense_generators(S), r, options.allow_low_order);
    builder.add_membership("w", w, dense_generators(B.set()), r, options.allow_low_order);
    auto out = builder.finish(options.normalize);
    out.second.order = r;
    out.second.module_order = r;
    out.second.signature = {n, m};
    out.second.bounds = size_bounds(Method::kProjection, "projection", n, m, 1, r);
    check_size_bounds(out.first, out.second);
    return out;
}

SizeBounds size_bounds(Method method, const std::string& variant, int n, int m, int d, int r) {
    (void)variant;
    SizeBounds sb;
    switch (method) {
    case Method::kMethod1:
        sb.max_variables = binomial(n + m + 2 * r, 2 * r);
        sb.max_side = binomial(n + m + r, r);
        break;
    case Method::kMethod2:
        sb.max_variables = binomial(n + 2 * r * d, 2 * r * d) + 2 * binomial(m + 2 * r, 2 * r);
        sb.max_side = std::max(binomial(n + r * d, r * d), binomial(m + r, r));
        break;
    case Method::kMethod2Lift:
        sb.max_variables = binomial(n + m + 2 * r, 2 * r) + binomial(m + 2 * r, 2 * r);
        sb.max_side = binomial(n + m + r, r);
        break;
    case Method::kProjection:
        sb.max_variables = binomial(n + 2 * r, 2 * r) + binomial(m + 2 * r, 2 * r);
        sb.max_side = binomial(n + r, r);
        break;
    }
    return sb;
}

void check_size_bounds(const ConicProgram& prog, const GramLayout& layout) {
    // Moment-side variable count: one per equality row of the coefficient-matching form.
    const long long vars = prog.num_rows();
    if (vars > layout.bounds.max_variables || prog.num_free > layout.bounds.max_variables)
        throw std::logic_error(std::string(method_name(layout.method)) + " " + layout.variant + ": " +
                               std::to_string(vars) + " variables exceed the bound " +
                               std::to_string(layout.bounds.max_variables));
    if (prog.max_block_side() > layout.bounds.max_side)
        throw std::logic_error(std::string(method_name(layout.method)) + " " + layout.variant + ": block side " +
                               std::to_string(prog.max_block_side()) + " exceeds the bound " +
                               std::to_string(layout.bounds.max_side));
}

LowerBound lower_bound_with_candidate(const Polynomial& p, const SemialgebraicSet& S, int r, double tol) {
    if (p.signature() != S.signature()) throw std::invalid_argument("lower_bound_on_set: signature mismatch");
    require_archimedean(S, "S");
    if (p.degree() > 2 * r) throw std::invalid_argument("lower_bound_on_set: need 2r >= deg p");
    SosBuilder builder(Method::kMethod1, "lower-bound");
    const int lam = builder.add_free("lambda", MultiIndex(S.dim()), -1.0);
    AffinePolynomial t(S.signature());
    t.constant = p;
    t.linear.emplace_back(lam, Polynomial::constant(S.signature(), -1.0));
    builder.add_membership("p-lambda", t, dense_generators(S), r, false);
    auto [prog, layout] = builder.finish(true);
    prog.sense = ConicProgram::Sense::kMaximize;
    const auto res = solve(prog, {tol, 200});
    LowerBound out;
    out.solved = res.usable();
    out.value = res.objective;
    // Rows are pseudo-moments; the degree-one rows give a minimizer candidate when the moment matrix is near rank one.
    out.candidate = Eigen::VectorXd::Zero(S.dim());
    double y0 = 0.0;
    for (std::size_t i = 0; i < layout.rows.size(); ++i) {
        const auto& mono = layout.rows[i].monomial;
        if (mono.is_zero()) y0 = res.y(static_cast<Eigen::Index>(i));
        if (mono.degree() == 1)
            for (int v = 0; v < S.dim(); ++v)
                if (mono[v] == 1) out.candidate(v) = res.y(static_cast<Eigen::Index>(i));
    }
    if (y0 != 0.0) out.candidate /= y0;
    return out;
}

double lower_bound_on_set(const Polynomial& p, const SemialgebraicSet& S, int r) {
    const auto lb = lower_bound_with_candidate(p, S, r);
    if (!lb.solved) return -std::numeric_limits<double>::infinity();
    return lb.value;
}

} // namespace polyimage
