#include "polyimage/sparsity.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include "relaxation_internal.hpp"

namespace polyimage {

namespace {

bool subset(const std::set<int>& a, const std::set<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace

RipResult check_rip(const std::vector<std::vector<int>>& cliques, int n) {
    if (cliques.empty()) throw std::invalid_argument("check_rip: empty clique list");
    std::set<int> covered;
    std::vector<std::set<int>> sets;
    for (const auto& c : cliques) {
        std::set<int> s(c.begin(), c.end());
        if (s.empty()) throw std::invalid_argument("check_rip: empty clique");
        for (int i : s)
            if (i < 0 || i >= n) throw std::invalid_argument("check_rip: variable index out of range");
        covered.insert(s.begin(), s.end());
        sets.push_back(std::move(s));
    }
    if (static_cast<int>(covered.size()) != n) throw std::invalid_argument("check_rip: cliques do not cover every variable");

    RipResult out;
    std::set<int> seen = sets[0];
    for (std::size_t j = 1; j < sets.size(); ++j) {
        std::set<int> overlap;
        std::set_intersection(sets[j].begin(), sets[j].end(), seen.begin(), seen.end(),
                              std::inserter(overlap, overlap.begin()));
        bool fits = false;
        for (std::size_t l = 0; l < j && !fits; ++l) fits = subset(overlap, sets[l]);
        if (!fits) {
            out.holds = false;
            out.violating_clique = static_cast<int>(j);
            return out;
        }
        seen.insert(sets[j].begin(), sets[j].end());
    }
    return out;
}

std::pair<ConicProgram, GramLayout> build_method1_sparse(const SemialgebraicSet& S, const BoundingSet& B,
                                                         const PolynomialMap& f, const std::vector<std::vector<int>>& cliques,
                                                         int r_q, const BuildOptions& options) {
    using namespace detail;
    const int n = f.n();
    const int m = f.m();
    if (S.signature() != BlockSignature{n, 0} || B.dim() != m) throw std::invalid_argument("build_method1_sparse: dimension mismatch");
    if (r_q < 1) throw std::invalid_argument("build_method1_sparse: order must be >= 1");
    require_archimedean(B.set(), "B");

    const RipResult rip = check_rip(cliques, n);
    if (!rip.holds)
        throw std::invalid_argument("build_method1_sparse: running intersection property fails at clique " +
                                    std::to_string(rip.violating_clique + 1));
    std::vector<std::set<int>> sets;
    for (const auto& c : cliques) sets.emplace_back(c.begin(), c.end());
    auto home = [&](const std::vector<int>& support) {
        const std::set<int> s(support.begin(), support.end());
        for (std::size_t k = 0; k < sets.size(); ++k)
            if (subset(s, sets[k])) return static_cast<int>(k);
        return -1;
    };
    for (int j = 0; j < m; ++j)
        if (home(f[j].support()) < 0)
            throw std::invalid_argument("build_method1_sparse: component f" + std::to_string(j + 1) + " is not supported on a single clique");
    std::vector<int> owner(static_cast<std::size_t>(S.size()));
    for (int j = 0; j < S.size(); ++j) {
        owner[static_cast<std::size_t>(j)] = home(S.constraint(j).support());
        if (owner[static_cast<std::size_t>(j)] < 0)
            throw std::invalid_argument("build_method1_sparse: constraint g" + std::to_string(j + 1) + " is not supported on a single clique");
    }
    std::vector<int> eq_owner;
    for (int k = 0; k < S.num_equations(); ++k) {
        eq_owner.push_back(home(S.equations()[static_cast<std::size_t>(k)].support()));
        if (eq_owner.back() < 0)
            throw std::invalid_argument("build_method1_sparse: equation e" + std::to_string(k + 1) + " is not supported on a single clique");
    }
    for (std::size_t k = 0; k < sets.size(); ++k) {
        bool has_ball = false;
        for (const auto& g : S.constraints()) {
            std::vector<int> vars;
            if (ball_constant(g, &vars) && std::set<int>(vars.begin(), vars.end()) == sets[k]) has_ball = true;
        }
        if (!has_ball)
            throw std::invalid_argument("build_method1_sparse: clique " + std::to_string(k + 1) +
                                        " has no ball constraint N - sum x_i^2 over its variables");
    }

    const int r_mod = method1_module_order(S, B, f, r_q);
    const BlockSignature joint{n, m};
    const auto zB = lebesgue_moments(B, 2 * r_q);

    std::vector<Generator> gens;
    for (std::size_t k = 0; k < sets.size(); ++k) {
        std::vector<int> vars(sets[k].begin(), sets[k].end());
        for (int j = 0; j < m; ++j) vars.push_back(n + j);
        const std::string suffix = sets.size() > 1 ? "@" + std::to_string(k + 1) : "";
        gens.push_back({Polynomial::constant(joint, 1.0), vars, "g0" + suffix});
        for (int j = 0; j < S.size(); ++j)
            if (owner[static_cast<std::size_t>(j)] == static_cast<int>(k))
                gens.push_back({S.constraint(j).embedded(joint, 0), vars, "g" + std::to_string(j + 1) + suffix});
        if (k == 0)
            for (int j = 0; j < B.set().size(); ++j)
                gens.push_back({B.set().constraint(j).embedded(joint, n), vars, "g" + std::to_string(S.size() + j + 1) + suffix});
        for (int j = 0; j < S.num_equations(); ++j)
            if (eq_owner[static_cast<std::size_t>(j)] == static_cast<int>(k))
                gens.push_back({S.equations()[static_cast<std::size_t>(j)].embedded(joint, 0), vars, "e" + std::to_string(j + 1) + suffix, true});
    }

    SosBuilder builder(Method::kMethod1, "sparse");
    AffinePolynomial target(joint);
    target.constant = -build_h_f(f);
    for (const auto& beta : enumerate_multi_indices(m, 2 * r_q)) {
        const int k = builder.add_free("q", beta, zB[beta]);
        target.linear.emplace_back(k, Polynomial::monomial(joint, beta.embedded(n + m, n)));
    }
    builder.add_membership("q-h", target, gens, r_mod, false);
    auto out = builder.finish(options.normalize);
    out.second.order = r_q;
    out.second.module_order = r_mod;
    out.second.signature = joint;
    out.second.bounds = size_bounds(Method::kMethod1, "sparse", n, m, f.degree(), r_mod);
    check_size_bounds(out.first, out.second);
    return out;
}

} // namespace polyimage
