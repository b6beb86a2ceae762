#pragma once

#include <utility>
#include <vector>

#include "polyimage/relaxation.hpp"

namespace polyimage {

struct RipResult {
    bool holds = true;
    /// Index (0-based) of the first clique whose overlap with the earlier ones fits in no single earlier clique.
    int violating_clique = -1;
};

/// Running intersection property for cliques over variables {0..n-1}.
RipResult check_rip(const std::vector<std::vector<int>>& cliques, int n);

/// Method 1 with one multiplier family per extended clique I_k + {y}.
std::pair<ConicProgram, GramLayout> build_method1_sparse(const SemialgebraicSet& S, const BoundingSet& B,
                                                         const PolynomialMap& f, const std::vector<std::vector<int>>& cliques,
                                                         int r_q, const BuildOptions& options = {});

} // namespace polyimage
