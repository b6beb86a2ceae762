#include "polyimage/sdp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace polyimage {

const char* status_name(SolverStatus s) {
    switch (s) {
    case SolverStatus::kOptimal: return "optimal";
    case SolverStatus::kNearOptimal: return "near_optimal";
    case SolverStatus::kInfeasible: return "infeasible";
    case SolverStatus::kUnbounded: return "unbounded";
    case SolverStatus::kMaxIter: return "max_iter";
    }
    return "?";
}

namespace {

using Blocks = std::vector<Eigen::MatrixXd>;

struct FullEntry {
    int p;
    int q;
    double a;
};

// Row coefficients restricted to one block, with both (p,q) and (q,p) listed.
struct BlockRows {
    std::vector<int> rows;
    std::vector<std::vector<FullEntry>> entries;
};

class Operators {
public:
    explicit Operators(const ConicProgram& prog) : prog_(prog) {
        const int m = prog.num_rows();
        Af_ = Eigen::MatrixXd::Zero(m, prog.num_free);
        for (int i = 0; i < m; ++i)
            for (const auto& [k, v] : prog.free_rows[static_cast<std::size_t>(i)]) Af_(i, k) += v;
        for (int k = 0; k < prog.num_blocks(); ++k) C_.push_back(assemble_block(prog.c_entries, k, side(k)));
        per_block_.resize(static_cast<std::size_t>(prog.num_blocks()));
        for (int i = 0; i < m; ++i) {
            for (const auto& e : prog.row_entries[static_cast<std::size_t>(i)]) {
                auto& br = per_block_[static_cast<std::size_t>(e.block)];
                if (br.rows.empty() || br.rows.back() != i) {
                    br.rows.push_back(i);
                    br.entries.emplace_back();
                }
                br.entries.back().push_back({e.row, e.col, e.value});
                if (e.row != e.col) br.entries.back().push_back({e.col, e.row, e.value});
            }
        }
    }

    int side(int k) const { return prog_.block_sizes[static_cast<std::size_t>(k)]; }
    int blocks() const { return prog_.num_blocks(); }
    const Eigen::MatrixXd& Af() const { return Af_; }
    const Blocks& C() const { return C_; }
    const std::vector<BlockRows>& per_block() const { return per_block_; }

    // A(X) for symmetric X.
    Eigen::VectorXd apply(const Blocks& X) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(prog_.num_rows());
        for (int i = 0; i < prog_.num_rows(); ++i) {
            double s = 0.0;
            for (const auto& e : prog_.row_entries[static_cast<std::size_t>(i)]) {
                const auto& Xk = X[static_cast<std::size_t>(e.block)];
                s += (e.row == e.col ? 1.0 : 2.0) * e.value * Xk(e.row, e.col);
            }
            out(i) = s;
        }
        return out;
    }

    // A*(y) = sum_i y_i A_i.
    Blocks adjoint(const Eigen::VectorXd& y) const {
        Blocks out;
        for (int k = 0; k < blocks(); ++k) out.push_back(Eigen::MatrixXd::Zero(side(k), side(k)));
        for (int i = 0; i < prog_.num_rows(); ++i) {
            const double yi = y(i);
            if (yi == 0.0) continue;
            for (const auto& e : prog_.row_entries[static_cast<std::size_t>(i)]) {
                auto& M = out[static_cast<std::size_t>(e.block)];
                M(e.row, e.col) += yi * e.value;
                if (e.row != e.col) M(e.col, e.row) += yi * e.value;
            }
        }
        return out;
    }

private:
    const ConicProgram& prog_;
    Eigen::MatrixXd Af_;
    Blocks C_;
    std::vector<BlockRows> per_block_;
};

double frob(const Blocks& B) {
    double s = 0.0;
    for (const auto& M : B) s += M.squaredNorm();
    return std::sqrt(s);
}

double inner(const Blocks& A, const Blocks& B) {
    double s = 0.0;
    for (std::size_t k = 0; k < A.size(); ++k) s += A[k].cwiseProduct(B[k]).sum();
    return s;
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

// Largest t with X + t dX psd, given the Cholesky factor of X (infinity if unbounded).
double max_step(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& dX) {
    Eigen::MatrixXd A1 = chol.matrixL().solve(dX);
    Eigen::MatrixXd T = chol.matrixL().solve(A1.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(T), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (!(lmin < 0.0)) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

// Cholesky with diagonal shift fallback for the (near-singular) Schur system.
class RobustSolver {
public:
    explicit RobustSolver(const Eigen::MatrixXd& M) {
        if (M.rows() == 0) return;
        const double scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
        double shift = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd Ms = M;
            Ms.diagonal().array() += shift;
            llt_.compute(Ms);
            if (llt_.info() == Eigen::Success) return;
            shift = shift == 0.0 ? 1e-14 * scale : shift * 100.0;
        }
        use_ldlt_ = true;
        ldlt_.compute(M);
    }

    template <typename Rhs>
    Eigen::MatrixXd solve(const Rhs& rhs) const {
        return use_ldlt_ ? Eigen::MatrixXd(ldlt_.solve(rhs)) : Eigen::MatrixXd(llt_.solve(rhs));
    }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    bool use_ldlt_ = false;
};

Eigen::MatrixXd schur_matrix(const Operators& ops, const Blocks& X, const Blocks& Sinv, int m) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < ops.blocks(); ++k) {
        const auto& br = ops.per_block()[static_cast<std::size_t>(k)];
        const auto& Xk = X[static_cast<std::size_t>(k)];
        const auto& Sk = Sinv[static_cast<std::size_t>(k)];
        const int n = ops.side(k);
        Eigen::MatrixXd G(n, n);
        for (std::size_t jj = 0; jj < br.rows.size(); ++jj) {
            // G = X A_j S^{-1}
            G.setZero();
            for (const auto& e : br.entries[jj]) G.noalias() += e.a * Xk.col(e.p) * Sk.row(e.q);
            const int j = br.rows[jj];
            for (std::size_t ii = 0; ii <= jj; ++ii) {
                double s = 0.0;
                for (const auto& e : br.entries[ii]) s += e.a * G(e.p, e.q);
                const int i = br.rows[ii];
                M(i, j) += s;
                if (i != j) M(j, i) += s;
            }
        }
    }
    return M;
}

struct Iterate {
    Eigen::VectorXd x;
    Blocks X;
    Eigen::VectorXd y;
    Blocks S;
};

struct Measures {
    double pobj = 0.0;
    double dobj = 0.0;
    double relp = 0.0;
    double reld = 0.0;
    double gap = 0.0;
    double merit() const { return std::max({relp, reld, gap}); }
};

} // namespace

SolverResult solve(const ConicProgram& prog, const SolverOptions& options) {
    prog.validate();
    if (!(options.tol > 0.0) || options.tol > 1e-2) throw std::invalid_argument("solve: tol must lie in (0, 1e-2]");
    if (options.max_iter < 1) throw std::invalid_argument("solve: max_iter must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();

    const Operators ops(prog);
    const int m = prog.num_rows();
    const int nf = prog.num_free;
    const int nb = prog.num_blocks();
    const Eigen::MatrixXd& Af = ops.Af();
    const Blocks& C = ops.C();
    const Eigen::VectorXd& b = prog.b;
    const Eigen::VectorXd& cf = prog.c_free;

    int total_side = 0;
    for (int k = 0; k < nb; ++k) total_side += ops.side(k);

    const double norm_b = b.norm();
    const double norm_c = std::sqrt(frob(C) * frob(C) + cf.squaredNorm());

    // Starting point: scaled identities, following the usual infeasible-start heuristics.
    Iterate it;
    it.x = Eigen::VectorXd::Zero(nf);
    it.y = Eigen::VectorXd::Zero(m);
    {
        std::vector<double> row_norm_block(static_cast<std::size_t>(m * std::max(nb, 1)), 0.0);
        for (int k = 0; k < nb; ++k) {
            const int n = ops.side(k);
            const auto& br = ops.per_block()[static_cast<std::size_t>(k)];
            double xi = std::max(10.0, std::sqrt(static_cast<double>(n)));
            double eta = std::max({10.0, std::sqrt(static_cast<double>(n)), C[static_cast<std::size_t>(k)].norm()});
            for (std::size_t ii = 0; ii < br.rows.size(); ++ii) {
                double nrm = 0.0;
                for (const auto& e : br.entries[ii]) nrm += e.a * e.a;
                nrm = std::sqrt(nrm);
                xi = std::max(xi, std::sqrt(static_cast<double>(n)) * (1.0 + std::abs(b(br.rows[ii]))) / (1.0 + nrm));
                eta = std::max(eta, nrm);
            }
            it.X.push_back(xi * Eigen::MatrixXd::Identity(n, n));
            it.S.push_back(eta * Eigen::MatrixXd::Identity(n, n));
        }
    }

    SolverResult result;
    std::optional<Iterate> best;
    Measures best_measures;
    double best_merit = std::numeric_limits<double>::infinity();
    double gamma = 0.9;
    int stalls = 0;
    int best_iter = 0;
    SolverStatus status = SolverStatus::kMaxIter;
    int iter = 0;
    Measures meas;

    for (iter = 0; iter <= options.max_iter; ++iter) {
        const Eigen::VectorXd AX = ops.apply(it.X);
        const Eigen::VectorXd rp = b - Af * it.x - AX;
        const Blocks Aty = ops.adjoint(it.y);
        Blocks Rd(static_cast<std::size_t>(nb));
        for (int k = 0; k < nb; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            Rd[kk] = C[kk] - Aty[kk] - it.S[kk];
        }
        const Eigen::VectorXd rf = cf - Af.transpose() * it.y;

        meas.pobj = cf.dot(it.x) + inner(C, it.X);
        meas.dobj = b.dot(it.y);
        meas.relp = rp.norm() / (1.0 + norm_b);
        meas.reld = std::sqrt(frob(Rd) * frob(Rd) + rf.squaredNorm()) / (1.0 + norm_c);
        meas.gap = std::abs(meas.pobj - meas.dobj) / (1.0 + std::abs(meas.pobj) + std::abs(meas.dobj));

        if (options.verbose)
            std::fprintf(stderr, "%3d  p=% .10e d=% .10e relp=%.2e reld=%.2e gap=%.2e\n", iter, meas.pobj, meas.dobj,
                         meas.relp, meas.reld, meas.gap);
        if (meas.merit() < best_merit) {
            best_merit = meas.merit();
            best = it;
            best_measures = meas;
            best_iter = iter;
        }
        // Once close, a run of iterations without a better iterate means rounding has taken over.
        if (best_merit <= 1e3 * options.tol && iter - best_iter >= 8) break;
        if (meas.merit() <= options.tol) {
            status = SolverStatus::kOptimal;
            break;
        }
        // Certificates of infeasibility: a dual ray (b'y > 0, A_f'y = 0, -A*(y) psd) or a primal ray.
        if (meas.dobj > 0.0) {
            const double ratio = ((cf - rf).norm() + frob(Rd) + frob(C)) / meas.dobj;
            if (ratio < options.tol && iter >= 3) {
                status = SolverStatus::kInfeasible;
                break;
            }
        }
        if (meas.pobj < 0.0) {
            const double ratio = (b - rp).norm() / -meas.pobj;
            if (ratio < options.tol && iter >= 3) {
                status = SolverStatus::kUnbounded;
                break;
            }
        }
        if (iter == options.max_iter) break;

        std::vector<Eigen::LLT<Eigen::MatrixXd>> cholX(static_cast<std::size_t>(nb)), cholS(static_cast<std::size_t>(nb));
        Blocks Sinv(static_cast<std::size_t>(nb));
        bool ok = true;
        for (int k = 0; k < nb && ok; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            cholX[kk].compute(it.X[kk]);
            cholS[kk].compute(it.S[kk]);
            ok = cholX[kk].info() == Eigen::Success && cholS[kk].info() == Eigen::Success;
            if (ok) Sinv[kk] = sym(cholS[kk].solve(Eigen::MatrixXd::Identity(ops.side(k), ops.side(k))));
        }
        if (!ok) break;

        const double mu = inner(it.X, it.S) / std::max(total_side, 1);
        const Eigen::MatrixXd M = schur_matrix(ops, it.X, Sinv, m);
        // Free variables: pivoted LU on the augmented system [M A_f; A_f' 0]; eliminating them through
        // A_f' M^{-1} A_f loses too much accuracy once M is badly conditioned.
        std::optional<RobustSolver> schur;
        std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> augmented;
        if (nf > 0) {
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m + nf, m + nf);
            K.topLeftCorner(m, m) = M;
            K.topRightCorner(m, nf) = Af;
            K.bottomLeftCorner(nf, m) = Af.transpose();
            augmented.emplace(K);
        } else {
            schur.emplace(M);
        }
        Blocks XRdSinv(static_cast<std::size_t>(nb));
        for (int k = 0; k < nb; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            XRdSinv[kk] = sym(it.X[kk] * Rd[kk] * Sinv[kk]);
        }
        const Eigen::VectorXd AXRdSinv = ops.apply(XRdSinv);

        struct Direction {
            Eigen::VectorXd dx, dy;
            Blocks dX, dS;
        };
        // Newton system with right-hand side term R standing for (sigma mu S^{-1} - X - corrections).
        auto direction = [&](const Blocks& R) {
            Direction d;
            const Eigen::VectorXd h = rp - ops.apply(R) + AXRdSinv;
            // Block elimination of [M A_f; A_f' 0] [dy; dx] = [h; r_f], refined against the full system.
            auto kkt_solve = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v, Eigen::VectorXd& dy, Eigen::VectorXd& dx) {
                if (nf > 0) {
                    Eigen::VectorXd rhs(m + nf);
                    rhs << u, v;
                    const Eigen::VectorXd sol = augmented->solve(rhs);
                    dy = sol.head(m);
                    dx = sol.tail(nf);
                } else {
                    dx = Eigen::VectorXd::Zero(0);
                    dy = schur->solve(u);
                }
            };
            kkt_solve(h, rf, d.dy, d.dx);
            for (int refine = 0; refine < 3; ++refine) {
                const Eigen::VectorXd e1 = h - M * d.dy - Af * d.dx;
                const Eigen::VectorXd e2 = rf - Af.transpose() * d.dy;
                if (e1.norm() + e2.norm() <= 1e-15 * (h.norm() + rf.norm() + 1e-300)) break;
                Eigen::VectorXd cy, cx;
                kkt_solve(e1, e2, cy, cx);
                d.dy += cy;
                d.dx += cx;
            }
            const Blocks Atdy = ops.adjoint(d.dy);
            for (int k = 0; k < nb; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                d.dS.push_back(Rd[kk] - Atdy[kk]);
                d.dX.push_back(sym(R[kk] - it.X[kk] * d.dS.back() * Sinv[kk]));
            }
            return d;
        };
        auto step_lengths = [&](const Direction& d) {
            double ap = std::numeric_limits<double>::infinity();
            double ad = ap;
            for (int k = 0; k < nb; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                ap = std::min(ap, max_step(cholX[kk], d.dX[kk]));
                ad = std::min(ad, max_step(cholS[kk], d.dS[kk]));
            }
            return std::pair<double, double>{ap, ad};
        };
        // The Schur solve drifts off A_f dx + A(dX) = r_p once M is badly conditioned. The fix is the
        // minimum-norm correction in the metric of X, dX += X A*(t) X, so it stays inside the range of X.
        std::optional<RobustSolver> primal_metric;
        auto project_primal = [&](Direction& d) {
            for (int round = 0; round < 2; ++round) {
                const Eigen::VectorXd miss = rp - Af * d.dx - ops.apply(d.dX);
                if (miss.norm() <= 1e-3 * rp.norm() + 1e-14 * (1.0 + norm_b)) return;
                if (!primal_metric) {
                    Eigen::MatrixXd G = schur_matrix(ops, it.X, it.X, m);
                    G.noalias() += Af * Af.transpose();
                    primal_metric.emplace(G);
                }
                const Eigen::VectorXd t = primal_metric->solve(miss);
                if (nf > 0) d.dx += Af.transpose() * t;
                const Blocks At = ops.adjoint(t);
                for (int k = 0; k < nb; ++k) {
                    const auto kk = static_cast<std::size_t>(k);
                    d.dX[kk] += sym(it.X[kk] * At[kk] * it.X[kk]);
                }
            }
        };

        // Predictor.
        Blocks R(static_cast<std::size_t>(nb));
        for (int k = 0; k < nb; ++k) R[static_cast<std::size_t>(k)] = -it.X[static_cast<std::size_t>(k)];
        Direction pred = direction(R);
        project_primal(pred);
        auto [ap_max, ad_max] = step_lengths(pred);
        const double ap_a = std::min(1.0, ap_max);
        const double ad_a = std::min(1.0, ad_max);
        double mu_aff = 0.0;
        for (int k = 0; k < nb; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            mu_aff += (it.X[kk] + ap_a * pred.dX[kk]).cwiseProduct(it.S[kk] + ad_a * pred.dS[kk]).sum();
        }
        mu_aff /= std::max(total_side, 1);
        const double expon = std::max(1.0, 3.0 * std::min(ap_a, ad_a) * std::min(ap_a, ad_a));
        const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expon), 0.0, 1.0);

        // Corrector.
        for (int k = 0; k < nb; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            R[kk] = sigma * mu * Sinv[kk] - it.X[kk] - sym(pred.dX[kk] * pred.dS[kk] * Sinv[kk]);
        }
        Direction corr = direction(R);
        project_primal(corr);
        auto [ap2, ad2] = step_lengths(corr);
        const double ap = std::min(1.0, gamma * ap2);
        const double ad = std::min(1.0, gamma * ad2);

        if (nf > 0) it.x += ap * corr.dx;
        it.y += ad * corr.dy;
        for (int k = 0; k < nb; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            it.X[kk] = sym(it.X[kk] + ap * corr.dX[kk]);
            it.S[kk] = sym(it.S[kk] + ad * corr.dS[kk]);
        }
        gamma = 0.9 + 0.09 * std::min(ap, ad);
        if (options.verbose) std::fprintf(stderr, "     sigma=%.2e ap=%.3f ad=%.3f mu=%.2e\n", sigma, ap, ad, mu);

        stalls = (std::max(ap, ad) < 1e-8) ? stalls + 1 : 0;
        if (stalls >= 3) break;
    }

    const bool converged = status == SolverStatus::kOptimal;
    const bool certificate = status == SolverStatus::kInfeasible || status == SolverStatus::kUnbounded;
    if (!converged && !certificate) {
        // Fall back to the best iterate seen.
        it = *best;
        meas = best_measures;
        status = best_merit <= 1e3 * options.tol ? SolverStatus::kNearOptimal : SolverStatus::kMaxIter;
    }

    result.status = status;
    result.primal_objective = meas.pobj;
    result.dual_objective = meas.dobj;
    result.objective = prog.reported_objective(meas.pobj, meas.dobj);
    result.x_free = it.x;
    result.X = it.X;
    result.y = it.y.cwiseProduct(prog.row_scale);
    result.S = it.S;
    result.primal_residual = meas.relp;
    result.dual_residual = meas.reld;
    result.gap = meas.gap;
    result.iterations = std::min(iter, options.max_iter);
    result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

double FeasibilityReport::min_eigenvalue() const {
    double v = std::numeric_limits<double>::infinity();
    for (double e : min_eigenvalues) v = std::min(v, e);
    return v;
}

double FeasibilityReport::worst_violation() const {
    double w = std::max(0.0, max_row_violation);
    if (!min_eigenvalues.empty()) w = std::max(w, -min_eigenvalue());
    return w;
}

namespace {

double min_eig(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace

FeasibilityReport certify_primal(const ConicProgram& prog, const Eigen::VectorXd& x_free,
                                 const std::vector<Eigen::MatrixXd>& X) {
    prog.validate();
    if (x_free.size() != prog.num_free || static_cast<int>(X.size()) != prog.num_blocks())
        throw std::invalid_argument("certify_primal: point does not match the program layout");
    for (int k = 0; k < prog.num_blocks(); ++k)
        if (X[static_cast<std::size_t>(k)].rows() != prog.block_sizes[static_cast<std::size_t>(k)] ||
            X[static_cast<std::size_t>(k)].cols() != prog.block_sizes[static_cast<std::size_t>(k)])
            throw std::invalid_argument("certify_primal: block size mismatch");
    const Operators ops(prog);
    const Eigen::VectorXd r = prog.b - ops.Af() * x_free - ops.apply(X);
    FeasibilityReport rep;
    rep.max_row_violation = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    for (const auto& Xk : X) rep.min_eigenvalues.push_back(min_eig(Xk));
    return rep;
}

FeasibilityReport certify_dual(const ConicProgram& prog, const Eigen::VectorXd& y) {
    prog.validate();
    if (y.size() != prog.num_rows()) throw std::invalid_argument("certify_dual: multiplier length mismatch");
    const Operators ops(prog);
    const Eigen::VectorXd ys = y.cwiseQuotient(prog.row_scale);
    const Eigen::VectorXd r = prog.c_free - ops.Af().transpose() * ys;
    FeasibilityReport rep;
    rep.max_row_violation = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    const Blocks Aty = ops.adjoint(ys);
    for (int k = 0; k < prog.num_blocks(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        rep.min_eigenvalues.push_back(min_eig(ops.C()[kk] - Aty[kk]));
    }
    return rep;
}

FeasibilityReport certify_feasibility(const ConicProgram& prog, const SolverResult& point) {
    if (prog.form == ConicProgram::Form::kEquality) return certify_primal(prog, point.x_free, point.X);
    return certify_dual(prog, point.y);
}

} // namespace polyimage
