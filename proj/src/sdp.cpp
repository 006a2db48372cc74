// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace pps::sdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using BlockMat = std::vector<Eigen::MatrixXd>;

BlockMat make_blocks(const std::vector<int>& sizes, double diag_value) {
    BlockMat out;
    out.reserve(sizes.size());
    for (int s : sizes) {
        int n = std::abs(s);
        out.push_back(Eigen::MatrixXd::Identity(n, n) * diag_value);
    }
    return out;
}

BlockMat zero_blocks(const std::vector<int>& sizes) { return make_blocks(sizes, 0.0); }

double frob_dot(const BlockMat& a, const BlockMat& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        sum += (a[i].array() * b[i].array()).sum();
    return sum;
}

double frob_norm(const BlockMat& a) {
    double sum = 0.0;
    for (const auto& m : a) sum += m.squaredNorm();
    return std::sqrt(sum);
}

// <A, X> for sparse upper-triangular entries against a dense symmetric X.
double sparse_dot(const std::vector<SdpProblem::Entry>& entries, const BlockMat& x) {
    double sum = 0.0;
    for (const auto& e : entries) {
        double v = e.value * x[static_cast<size_t>(e.block)](e.row, e.col);
        sum += (e.row == e.col) ? v : 2.0 * v;
    }
    return sum;
}

void sparse_axpy(double alpha, const std::vector<SdpProblem::Entry>& entries,
                 BlockMat& out) {
    if (alpha == 0.0) return;
    for (const auto& e : entries) {
        auto& m = out[static_cast<size_t>(e.block)];
        m(e.row, e.col) += alpha * e.value;
        if (e.row != e.col) m(e.col, e.row) += alpha * e.value;
    }
}

BlockMat densify(const std::vector<SdpProblem::Entry>& entries,
                 const std::vector<int>& sizes) {
    BlockMat out = zero_blocks(sizes);
    sparse_axpy(1.0, entries, out);
    return out;
}

// Largest alpha in (0, inf] with X + alpha * dX >= 0.
double max_step(const BlockMat& x, const BlockMat& dx) {
    double alpha = kInf;
    for (size_t b = 0; b < x.size(); ++b) {
        if (dx[b].rows() == 0 || dx[b].isZero(0.0)) continue;
        Eigen::LLT<Eigen::MatrixXd> llt(x[b]);
        if (llt.info() != Eigen::Success) return 0.0;
        Eigen::MatrixXd l = llt.matrixL();
        const Eigen::MatrixXd t = l.triangularView<Eigen::Lower>().solve(dx[b]);
        Eigen::MatrixXd w =
            l.triangularView<Eigen::Lower>().solve(t.transpose());
        w = 0.5 * (w + w.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w, Eigen::EigenvaluesOnly);
        double lmin = eig.eigenvalues().minCoeff();
        if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
    }
    return alpha;
}

std::string describe(int iter, const SdpIterStat& s, double tau, double kappa) {
    std::ostringstream os;
    os << "sdp iter " << iter << ": pobj=" << s.primal_obj << " dobj=" << s.dual_obj
       << " pres=" << s.primal_res << " dres=" << s.dual_res << " mu=" << s.mu
       << " tau=" << tau << " kappa=" << kappa;
    return os.str();
}

} // namespace

int SdpProblem::total_dim() const {
    int total = 0;
    for (int s : blocks) total += std::abs(s);
    return total;
}

void SdpProblem::validate() const {
    for (int s : blocks)
        if (s == 0) throw Error("SdpProblem: zero-sized block");
    if (rhs.size() != static_cast<Eigen::Index>(constraints.size()))
        throw Error("SdpProblem: rhs length does not match constraint count");
    auto check_entries = [&](const std::vector<Entry>& entries, const char* what) {
        for (const auto& e : entries) {
            if (e.block < 0 || e.block >= num_blocks())
                throw Error(std::string("SdpProblem: ") + what + " block out of range");
            int n = block_size(e.block);
            if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n || e.row > e.col)
                throw Error(std::string("SdpProblem: ") + what +
                            " entry index out of range (upper triangle expected)");
            if (block_diagonal(e.block) && e.row != e.col)
                throw Error(std::string("SdpProblem: ") + what +
                            " off-diagonal entry in a diagonal block");
        }
    };
    check_entries(objective, "objective");
    for (const auto& a : constraints) check_entries(a, "constraint");
}

std::string_view to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Optimal: return "optimal";
        case SdpStatus::Infeasible: return "infeasible";
        case SdpStatus::DualInfeasible: return "dual_infeasible";
        case SdpStatus::MaxIter: return "max_iter";
    }
    return "unknown";
}

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options) {
    problem.validate();
    if (problem.total_dim() > options.dim_cap)
        throw Error("sdp::solve: total block dimension " +
                    std::to_string(problem.total_dim()) + " exceeds cap " +
                    std::to_string(options.dim_cap));
    if (problem.num_constraints() > options.cons_cap)
        throw Error("sdp::solve: constraint count exceeds cap");

    const int m = problem.num_constraints();
    const std::vector<int>& sizes = problem.blocks;
    const int total_dim = problem.total_dim();

    SdpSolution sol;

    // Constraint scaling: work with A_k / s_k, b_k / s_k.
    std::vector<double> scale(static_cast<size_t>(m), 1.0);
    std::vector<std::vector<SdpProblem::Entry>> A(problem.constraints);
    Eigen::VectorXd b = problem.rhs;
    for (int k = 0; k < m; ++k) {
        double norm2 = 0.0;
        for (const auto& e : A[static_cast<size_t>(k)]) {
            double w = (e.row == e.col) ? 1.0 : 2.0;
            norm2 += w * e.value * e.value;
        }
        double s = std::max(1.0, std::sqrt(norm2));
        scale[static_cast<size_t>(k)] = s;
        for (auto& e : A[static_cast<size_t>(k)]) e.value /= s;
        b(k) /= s;
    }

    const BlockMat C = densify(problem.objective, sizes);

    if (m == 0) {
        // Unconstrained: X = 0 is optimal iff C >= 0.
        bool psd = true;
        for (const auto& blk : C) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(blk, Eigen::EigenvaluesOnly);
            psd = psd && eig.eigenvalues().minCoeff() >= -1e-12;
        }
        sol.status = psd ? SdpStatus::Optimal : SdpStatus::DualInfeasible;
        sol.X = zero_blocks(sizes);
        sol.Z = C;
        sol.y.resize(0);
        return sol;
    }

    // Dense per-constraint matrices, built once.
    std::vector<BlockMat> Adense;
    Adense.reserve(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) Adense.push_back(densify(A[static_cast<size_t>(k)], sizes));

    // Homogeneous self-dual embedding: seek (X >= 0, y, Z >= 0, tau >= 0,
    // kappa >= 0), not all zero, with
    //     A(X) - b tau = 0,
    //     C tau - Z - A*(y) = 0,
    //     <b,y> - <C,X> - kappa = 0.
    // Self-duality forces <X,Z> + tau kappa = 0 at any solution, so a
    // solution with tau > 0 de-homogenizes to an optimal pair (X, y, Z)/tau,
    // while kappa > 0 yields an infeasibility certificate.  Unlike the plain
    // primal-dual iteration, the embedded system always admits a
    // well-centered interior start, so instances whose primal or dual has
    // empty interior (common for sums-of-squares programs at their optimum)
    // still converge instead of stalling with a finite gap.
    //
    // Least-squares starting point (Mehrotra's initialization): project onto
    // the affine constraints at tau = 1, then shift into the cone.  Small,
    // identity-aligned initial residuals cost the infeasible-start iteration
    // far fewer iterations than a blind multiple of the identity.
    BlockMat X, Z;
    Eigen::VectorXd y;
    {
        Eigen::MatrixXd Mi(m, m);
        for (int k = 0; k < m; ++k)
            for (int l = 0; l <= k; ++l) {
                double v = sparse_dot(A[static_cast<size_t>(l)],
                                      Adense[static_cast<size_t>(k)]);
                Mi(k, l) = v;
                Mi(l, k) = v;
            }
        Mi += 1e-10 * Eigen::MatrixXd::Identity(m, m);
        Eigen::LDLT<Eigen::MatrixXd> mif(Mi);

        auto lmin_of = [](const BlockMat& blocks) {
            double v = kInf;
            for (const auto& blk : blocks) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
                    blk, Eigen::EigenvaluesOnly);
                v = std::min(v, eig.eigenvalues().minCoeff());
            }
            return v;
        };

        // X_ls = A*(w) with A(A*(w)) = b is the min-norm solution of A(X)=b.
        Eigen::VectorXd w = mif.solve(b);
        X = zero_blocks(sizes);
        for (int k = 0; k < m; ++k) sparse_axpy(w(k), A[static_cast<size_t>(k)], X);
        double dp = std::max(1.0, -1.5 * lmin_of(X));
        for (size_t bidx = 0; bidx < sizes.size(); ++bidx)
            X[bidx] += dp * Eigen::MatrixXd::Identity(X[bidx].rows(), X[bidx].cols());

        // y_ls minimizes ||C - A*(y)||_F; Z_ls is the residual.
        Eigen::VectorXd hC(m);
        for (int k = 0; k < m; ++k) hC(k) = sparse_dot(A[static_cast<size_t>(k)], C);
        y = mif.solve(hC);
        Z = C;
        for (int k = 0; k < m; ++k) sparse_axpy(-y(k), A[static_cast<size_t>(k)], Z);
        double dd = std::max(1.0, -1.5 * lmin_of(Z));
        for (size_t bidx = 0; bidx < sizes.size(); ++bidx)
            Z[bidx] += dd * Eigen::MatrixXd::Identity(Z[bidx].rows(), Z[bidx].cols());
    }
    double tau = 1.0, kappa = 1.0;
    const double hom_dim = static_cast<double>(total_dim) + 1.0;
    const double mu0 = (frob_dot(X, Z) + tau * kappa) / hom_dim;

    const double bnorm = 1.0 + b.norm();
    const double cnorm1 = 1.0 + frob_norm(C);

    Eigen::MatrixXd M(m, m);
    Eigen::VectorXd rp(m);
    std::vector<BlockMat> S(static_cast<size_t>(m));

    auto record = [&](SdpIterStat& st) {
        double t = std::max(tau, 1e-300);
        st.primal_obj = frob_dot(C, X) / t;
        st.dual_obj = b.dot(y) / t;
        st.mu = (frob_dot(X, Z) + tau * kappa) / hom_dim;
    };

    int consecutive_tiny_steps = 0;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        // Residuals of the homogeneous system.
        for (int k = 0; k < m; ++k)
            rp(k) = b(k) * tau - sparse_dot(A[static_cast<size_t>(k)], X);
        BlockMat Rd = C;
        for (size_t bidx = 0; bidx < Rd.size(); ++bidx) {
            Rd[bidx] *= tau;
            Rd[bidx] -= Z[bidx];
        }
        for (int k = 0; k < m; ++k) sparse_axpy(-y(k), A[static_cast<size_t>(k)], Rd);
        const double cx = frob_dot(C, X);
        const double by = b.dot(y);
        const double rg = by - cx - kappa;

        SdpIterStat st;
        record(st);
        st.primal_res = rp.norm() / (std::max(tau, 1e-300) * bnorm);
        st.dual_res = frob_norm(Rd) / (std::max(tau, 1e-300) * cnorm1);
        sol.history.push_back(st);
        sol.iterations = iter;
        log_debug(describe(iter, st, tau, kappa));

        double relgap = std::abs(st.primal_obj - st.dual_obj) /
                        (1.0 + std::abs(st.primal_obj) + std::abs(st.dual_obj));
        if (relgap <= options.tol && st.primal_res <= options.feas_tol &&
            st.dual_res <= options.feas_tol) {
            sol.status = SdpStatus::Optimal;
            break;
        }
        // tau -> 0 with kappa bounded away from zero means no complementary
        // primal-dual pair exists; classify by the dominant certificate.
        // (b'y > 0 with A*(y) <= 0 refutes primal feasibility; <C,X> < 0
        // with A(X) = 0, X >= 0 gives an unbounded primal ray.)
        if (tau <= 1e-12 * std::max(1.0, kappa) ||
            (st.mu <= 1e-12 * mu0 && tau <= 1e-6 * std::min(1.0, kappa))) {
            if (by > 1e-9 * std::max(1.0, y.lpNorm<Eigen::Infinity>()) && by >= -cx) {
                log_debug("sdp: infeasibility certificate (tau -> 0, b'y > 0)");
                sol.status = SdpStatus::Infeasible;
            } else if (cx < -1e-9 * std::max(1.0, frob_norm(X))) {
                log_debug("sdp: unboundedness certificate (tau -> 0, <C,X> < 0)");
                sol.status = SdpStatus::DualInfeasible;
            } else {
                log_debug("sdp: break tau -> 0 without certificate");
                sol.status = SdpStatus::MaxIter;
            }
            break;
        }
        if (y.norm() > 1e13 || st.mu > 1e16 * mu0) {
            log_debug("sdp: break divergence");
            sol.status = SdpStatus::MaxIter;
            break;
        }

        double mu = st.mu;

        // Nesterov-Todd scaling point W = Gw Gw' with W Z W = X, built per
        // block from X = L L' and the eigensystem L' Z L = U D U':
        //   Gw = L U D^{-1/4},   inv(Gw) = D^{1/4} U' inv(L).
        // In the scaled frame both X and Z map to diag(sqrt(D)), which keeps
        // the primal and dual sides of the step symmetric, and gives
        // Z^{-1} = Gw D^{-1/2} Gw'.
        BlockMat Gw(sizes.size()), GwInv(sizes.size()), Zinv(sizes.size());
        std::vector<Eigen::VectorXd> lam(sizes.size());
        bool scaling_ok = true;
        for (size_t bidx = 0; bidx < sizes.size(); ++bidx) {
            Eigen::LLT<Eigen::MatrixXd> llt(X[bidx]);
            if (llt.info() != Eigen::Success) {
                // Jitter rescue for an X block at the numerical boundary.
                double base = std::max(1.0, X[bidx].diagonal().cwiseAbs().maxCoeff());
                Eigen::MatrixXd jx = X[bidx];
                for (int attempt = 0; attempt < 5 && llt.info() != Eigen::Success;
                     ++attempt) {
                    jx += base * std::pow(10.0, -14 + 2 * attempt) *
                          Eigen::MatrixXd::Identity(jx.rows(), jx.cols());
                    llt.compute(jx);
                }
                if (llt.info() != Eigen::Success) { scaling_ok = false; break; }
            }
            Eigen::MatrixXd l = llt.matrixL();
            Eigen::MatrixXd lzl = l.transpose() * Z[bidx] * l;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
                0.5 * (lzl + lzl.transpose()));
            if (eig.info() != Eigen::Success) { scaling_ok = false; break; }
            Eigen::VectorXd d = eig.eigenvalues();
            double dmax = std::max(d.maxCoeff(), 1e-300);
            d = d.cwiseMax(1e-14 * dmax); // rounding can leave tiny negatives
            Eigen::VectorXd dq = d.array().pow(0.25);
            Gw[bidx] = l * eig.eigenvectors() * dq.cwiseInverse().asDiagonal();
            Eigen::MatrixXd linv = l.triangularView<Eigen::Lower>().solve(
                Eigen::MatrixXd::Identity(l.rows(), l.cols()));
            GwInv[bidx] =
                dq.asDiagonal() * eig.eigenvectors().transpose() * linv;
            lam[bidx] = d.cwiseSqrt();
            Zinv[bidx] = Gw[bidx] * lam[bidx].cwiseInverse().asDiagonal() *
                         Gw[bidx].transpose();
        }
        if (!scaling_ok) {
            log_debug("sdp: break scaling factorization failed");
            sol.status = SdpStatus::MaxIter;
            break;
        }

        // S_k = W A_k W and the Schur complement M_kl = <A_l, S_k>, which is
        // symmetric positive semidefinite by construction.
        for (int k = 0; k < m; ++k) {
            BlockMat sk(sizes.size());
            for (size_t bidx = 0; bidx < sizes.size(); ++bidx) {
                const Eigen::MatrixXd inner =
                    Gw[bidx].transpose() *
                    Adense[static_cast<size_t>(k)][bidx] * Gw[bidx];
                const Eigen::MatrixXd t =
                    Gw[bidx] * inner * Gw[bidx].transpose();
                sk[bidx] = 0.5 * (t + t.transpose());
            }
            S[static_cast<size_t>(k)] = std::move(sk);
        }
        for (int k = 0; k < m; ++k) {
            for (int l = 0; l <= k; ++l) {
                double v = sparse_dot(A[static_cast<size_t>(l)], S[static_cast<size_t>(k)]);
                M(k, l) = v;
                M(l, k) = v;
            }
        }

        // Always regularize slightly: the Schur complement of a degenerate
        // instance can be singular, and LDLT would then return directions
        // with huge null-space components without reporting failure.
        if (!M.allFinite()) {
            log_debug("sdp: break schur complement not finite");
            sol.status = SdpStatus::MaxIter;
            break;
        }
        const Eigen::MatrixXd M0 = M;
        double mscale = 1.0 + M.trace() / m;
        M += 1e-12 * mscale * Eigen::MatrixXd::Identity(m, m);
        Eigen::LDLT<Eigen::MatrixXd> mf(M);
        {
            double reg = 1e-11 * mscale;
            bool ok = mf.info() == Eigen::Success;
            for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
                M += reg * Eigen::MatrixXd::Identity(m, m);
                mf.compute(M);
                ok = mf.info() == Eigen::Success;
                reg *= 100.0;
            }
            if (!ok) { log_debug("sdp: break schur factorization failed"); sol.status = SdpStatus::MaxIter; break; }
        }
        // One round of iterative refinement against the unregularized Schur
        // complement keeps the regularization from polluting the direction.
        auto schur_solve = [&](const Eigen::VectorXd& rhs) {
            Eigen::VectorXd v = mf.solve(rhs);
            Eigen::VectorXd resid = rhs - M0 * v;
            if (resid.norm() > 1e-14 * (1.0 + rhs.norm())) v += mf.solve(resid);
            return v;
        };

        // Scaled objective pieces for the tau column:
        //   wcw = W C W,  u = A(wcw),  rho = <C, wcw> + kappa / tau.
        BlockMat wcw(sizes.size());
        for (size_t bidx = 0; bidx < sizes.size(); ++bidx) {
            const Eigen::MatrixXd inner =
                Gw[bidx].transpose() * C[bidx] * Gw[bidx];
            const Eigen::MatrixXd t = Gw[bidx] * inner * Gw[bidx].transpose();
            wcw[bidx] = 0.5 * (t + t.transpose());
        }
        Eigen::VectorXd u(m);
        for (int k = 0; k < m; ++k) u(k) = sparse_dot(A[static_cast<size_t>(k)], wcw);
        const double rhoc = frob_dot(C, wcw);
        const Eigen::VectorXd q2 = schur_solve(u + b);
        // rho + (b-u)' M^{-1} (u+b) = rho - u'M^{-1}u + b'M^{-1}b, and
        // u'M^{-1}u <= <C, wcw> (it is the squared norm of the projection of
        // the scaled objective onto the span of the scaled constraints), so
        // the pivot below is at least kappa / tau > 0 up to rounding.
        double denom = rhoc + kappa / tau + (b - u).dot(q2);
        if (!(denom > 0.0)) denom = std::max(1e-300, kappa / tau);

        // W R W congruence for a single block.
        auto wcongr = [&](const Eigen::MatrixXd& R, size_t bidx) {
            const Eigen::MatrixXd inner = Gw[bidx].transpose() * R * Gw[bidx];
            const Eigen::MatrixXd t = Gw[bidx] * inner * Gw[bidx].transpose();
            return Eigen::MatrixXd(0.5 * (t + t.transpose()));
        };

        // Newton system of the homogeneous embedding for general right-hand
        // sides:
        //   A(dX) - b dtau = r1
        //   -A*(dy) + C dtau - dZ = R2
        //   <b,dy> - <C,dX> - dkappa = r3
        //   dX + W dZ W = Gc
        //   tau dkappa + kappa dtau = g
        // Eliminating dX, dZ, dkappa leaves a bordered Schur system in
        // (dy, dtau) solved with two back-substitutions against M:
        //   M dy - (u + b) dtau = r1 - A(Gc + W R2 W)
        //   (b - u)'dy + (rho + kappa/tau) dtau = r3 + <C, Gc + W R2 W> + g/tau.
        auto solve_kkt = [&](const Eigen::VectorXd& r1, const BlockMat& R2,
                             double r3, const BlockMat& Gc, double g,
                             BlockMat& dX, Eigen::VectorXd& dy, BlockMat& dZ,
                             double& dtau, double& dkappa) {
            BlockMat gfold = Gc;
            for (size_t bidx = 0; bidx < sizes.size(); ++bidx)
                gfold[bidx] += wcongr(R2[bidx], bidx);
            Eigen::VectorXd h(m);
            for (int k = 0; k < m; ++k)
                h(k) = r1(k) - sparse_dot(A[static_cast<size_t>(k)], gfold);
            const Eigen::VectorXd q1 = schur_solve(h);
            double h2 = r3 + frob_dot(C, gfold) + g / tau;
            dtau = (h2 - (b - u).dot(q1)) / denom;
            dy = q1 + dtau * q2;
            dZ = zero_blocks(sizes);
            for (size_t bidx = 0; bidx < sizes.size(); ++bidx)
                dZ[bidx] = dtau * C[bidx] - R2[bidx];
            for (int k = 0; k < m; ++k) sparse_axpy(-dy(k), A[static_cast<size_t>(k)], dZ);
            dX = std::move(gfold);
            for (size_t bidx = 0; bidx < sizes.size(); ++bidx) {
                for (int l = 0; l < m; ++l)
                    dX[bidx] += dy(l) * S[static_cast<size_t>(l)][bidx];
                dX[bidx] -= dtau * wcw[bidx];
            }
            dkappa = (g - kappa * dtau) / tau;
        };

        // Direction with residual weight eta (1 for the predictor, 1 - sigma
        // for the combined step), then iterative refinement of the full
        // direction against the exact Newton equations.  The Schur
        // elimination and its regularization lose accuracy exactly on the
        // ill-conditioned end games this solver must survive, and an
        // inaccurate affine direction overshoots the cone boundary, which
        // caps the step length and stalls the iteration.
        auto solve_direction = [&](double eta, const BlockMat& Gc, double g,
                                   BlockMat& dX, Eigen::VectorXd& dy, BlockMat& dZ,
                                   double& dtau, double& dkappa) {
            const Eigen::VectorXd r1 = eta * rp;
            BlockMat R2(sizes.size());
            for (size_t bidx = 0; bidx < sizes.size(); ++bidx)
                R2[bidx] = -eta * Rd[bidx];
            const double r3 = -eta * rg;
            solve_kkt(r1, R2, r3, Gc, g, dX, dy, dZ, dtau, dkappa);
            const double rhs_scale = 1.0 + r1.norm() + frob_norm(Gc) +
                                     std::abs(r3) + std::abs(g);
            for (int pass = 0; pass < 2; ++pass) {
                Eigen::VectorXd p1(m);
                for (int k = 0; k < m; ++k)
                    p1(k) = r1(k) -
                            (sparse_dot(A[static_cast<size_t>(k)], dX) - b(k) * dtau);
                BlockMat P2(sizes.size());
                for (size_t bidx = 0; bidx < sizes.size(); ++bidx)
                    P2[bidx] = R2[bidx] - dtau * C[bidx] + dZ[bidx];
                for (int k = 0; k < m; ++k)
                    sparse_axpy(dy(k), A[static_cast<size_t>(k)], P2);
                double p3 = r3 - (b.dot(dy) - frob_dot(C, dX) - dkappa);
                BlockMat P4(sizes.size());
                for (size_t bidx = 0; bidx < sizes.size(); ++bidx)
                    P4[bidx] = Gc[bidx] - dX[bidx] - wcongr(dZ[bidx], bidx);
                double p5 = g - (tau * dkappa + kappa * dtau);
                double err = p1.lpNorm<Eigen::Infinity>() + frob_norm(P2) +
                             std::abs(p3) + frob_norm(P4) + std::abs(p5);
                if (err <= 1e-13 * rhs_scale) break;
                BlockMat eX, eZ;
                Eigen::VectorXd ey;
                double etau = 0.0, ekappa = 0.0;
                solve_kkt(p1, P2, p3, P4, p5, eX, ey, eZ, etau, ekappa);
                for (size_t bidx = 0; bidx < sizes.size(); ++bidx) {
                    dX[bidx] += eX[bidx];
                    dZ[bidx] += eZ[bidx];
                }
                dy += ey;
                dtau += etau;
                dkappa += ekappa;
            }
        };

        auto scalar_limit = [](double v, double dv) {
            return dv < 0.0 ? -v / dv : kInf;
        };

        // Predictor (affine scaling) direction.
        BlockMat Gaff(sizes.size());
        for (size_t bidx = 0; bidx < sizes.size(); ++bidx) Gaff[bidx] = -X[bidx];
        BlockMat dXa, dZa;
        Eigen::VectorXd dya;
        double dtaua = 0.0, dkappaa = 0.0;
        solve_direction(1.0, Gaff, -tau * kappa, dXa, dya, dZa, dtaua, dkappaa);

        double a_aff = std::min({1.0, max_step(X, dXa), max_step(Z, dZa),
                                 scalar_limit(tau, dtaua),
                                 scalar_limit(kappa, dkappaa)});
        if (log_level() >= LogLevel::Debug) {
            std::ostringstream os;
            os << "  aff limits X=" << max_step(X, dXa)
               << " Z=" << max_step(Z, dZa)
               << " tau=" << scalar_limit(tau, dtaua)
               << " kappa=" << scalar_limit(kappa, dkappaa)
               << " lammin/sqrtmu=";
            double lmn = kInf, lmx = 0.0;
            for (const auto& l : lam) {
                lmn = std::min(lmn, l.minCoeff());
                lmx = std::max(lmx, l.maxCoeff());
            }
            os << lmn / std::sqrt(mu) << " lammax/sqrtmu=" << lmx / std::sqrt(mu);
            log_debug(os.str());
        }
        if (const char* dumpdir = std::getenv("PPS_SDP_DUMP");
            dumpdir != nullptr && iter <= 2) {
            std::ofstream df(std::string(dumpdir) + "/state_it" +
                             std::to_string(iter) + ".txt");
            df.precision(17);
            df << tau << " " << kappa << " " << dtaua << " " << dkappaa << "\n";
            for (int k = 0; k < m; ++k)
                df << y(k) / scale[static_cast<size_t>(k)] << " ";
            df << "\n";
            for (int k = 0; k < m; ++k)
                df << dya(k) / scale[static_cast<size_t>(k)] << " ";
            df << "\n";
            auto put = [&df](const BlockMat& mats) {
                for (const auto& blk : mats) {
                    for (Eigen::Index i = 0; i < blk.rows(); ++i)
                        for (Eigen::Index j = 0; j < blk.cols(); ++j)
                            df << blk(i, j) << " ";
                    df << "\n";
                }
            };
            put(X);
            put(Z);
            put(dXa);
            put(dZa);
        }

        double sigma =
            std::pow(std::clamp(1.0 - a_aff, 0.0, 1.0), 3.0);

        // Corrector: in the scaled frame the centering condition linearizes
        // to lam o (dVx + dVz) = sigma mu e - lam^2 - H(dVxa dVza), with
        // lam = diag(sqrt(D)) and o the symmetrized product.  The
        // second-order term therefore enters through the inverse Lyapunov
        // operator of lam: entrywise division by (lam_i + lam_j)/2.  Skipping
        // that solve misscales the corrector by the eigenvalue spread of lam,
        // which grows without bound near a degenerate optimum.
        BlockMat corr(sizes.size());
        for (size_t bidx = 0; bidx < sizes.size(); ++bidx) {
            const Eigen::MatrixXd vx =
                GwInv[bidx] * dXa[bidx] * GwInv[bidx].transpose();
            const Eigen::MatrixXd vz =
                Gw[bidx].transpose() * dZa[bidx] * Gw[bidx];
            const Eigen::MatrixXd prod = vx * vz;
            Eigen::MatrixXd h = 0.5 * (prod + prod.transpose());
            const Eigen::VectorXd& l = lam[bidx];
            for (Eigen::Index i = 0; i < h.rows(); ++i)
                for (Eigen::Index j = 0; j < h.cols(); ++j)
                    h(i, j) *= 2.0 / (l(i) + l(j));
            corr[bidx] = Gw[bidx] * h * Gw[bidx].transpose();
        }
        // When the affine direction is long (short boundary step), its
        // second-order term can dominate the combined direction and shorten
        // the step instead of lengthening it; damp the corrector until the
        // combined step is at least comparable to the affine one.
        BlockMat G(sizes.size());
        BlockMat dX, dZ;
        Eigen::VectorXd dy;
        double dtau = 0.0, dkappa = 0.0;
        double omega = 1.0;
        for (int attempt = 0;; ++attempt) {
            for (size_t bidx = 0; bidx < sizes.size(); ++bidx)
                G[bidx] = sigma * mu * Zinv[bidx] - X[bidx] - omega * corr[bidx];
            solve_direction(1.0 - sigma, G,
                            sigma * mu - tau * kappa - omega * dtaua * dkappaa,
                            dX, dy, dZ, dtau, dkappa);
            if (attempt >= 2 || omega == 0.0) break;
            double a_comb = std::min({1.0, max_step(X, dX), max_step(Z, dZ),
                                      scalar_limit(tau, dtau),
                                      scalar_limit(kappa, dkappa)});
            if (a_comb >= 0.5 * a_aff) break;
            omega = attempt == 0 ? std::max(0.1, a_comb / std::max(1e-12, a_aff))
                                 : 0.0;
        }

        if (const char* dumpdir = std::getenv("PPS_SDP_DUMP");
            dumpdir != nullptr && iter <= 2) {
            std::ofstream df(std::string(dumpdir) + "/state_it" +
                                 std::to_string(iter) + ".txt",
                             std::ios::app);
            df.precision(17);
            df << sigma << " " << dtau << " " << dkappa << "\n";
            auto put = [&df](const BlockMat& mats) {
                for (const auto& blk : mats) {
                    for (Eigen::Index i = 0; i < blk.rows(); ++i)
                        for (Eigen::Index j = 0; j < blk.cols(); ++j)
                            df << blk(i, j) << " ";
                    df << "\n";
                }
            };
            put(dX);
            put(dZ);
        }

        // The embedding couples the primal and dual cones through (tau,
        // kappa), so a single step length is used for all variables.
        constexpr double gamma = 0.99;
        double a = std::min({1.0, gamma * max_step(X, dX),
                             gamma * max_step(Z, dZ),
                             gamma * scalar_limit(tau, dtau),
                             gamma * scalar_limit(kappa, dkappa)});

        // Rounding can push the stepped matrix just past the cone boundary
        // even below the eigenvalue-based limit; back off until it factors.
        auto step_stays_pd = [&](const BlockMat& base, const BlockMat& d,
                                 double aa) {
            for (size_t bidx = 0; bidx < base.size(); ++bidx) {
                Eigen::MatrixXd t = base[bidx] + aa * d[bidx];
                if (Eigen::LLT<Eigen::MatrixXd>(t).info() != Eigen::Success)
                    return false;
            }
            return true;
        };
        for (int back = 0;
             back < 16 && a > 1e-12 &&
             !(step_stays_pd(X, dX, a) && step_stays_pd(Z, dZ, a) &&
               tau + a * dtau > 0.0 && kappa + a * dkappa > 0.0);
             ++back)
            a *= 0.7;

        if (a < 1e-10) {
            if (++consecutive_tiny_steps >= 5) { log_debug("sdp: break tiny steps"); sol.status = SdpStatus::MaxIter; break; }
        } else {
            consecutive_tiny_steps = 0;
        }

        {
            SdpIterStat& cur = sol.history.back();
            cur.step_primal = a;
            cur.step_dual = a;
            cur.sigma = sigma;
        }
        for (size_t bidx = 0; bidx < sizes.size(); ++bidx) {
            X[bidx] += a * dX[bidx];
            Z[bidx] += a * dZ[bidx];
        }
        y += a * dy;
        tau += a * dtau;
        kappa += a * dkappa;
        sol.iterations = iter + 1;
        if (log_level() >= LogLevel::Debug) {
            std::ostringstream os;
            os << "  step a=" << a << " sigma=" << sigma << " a_aff=" << a_aff
               << " omega=" << omega;
            log_debug(os.str());
        }
    }

    if (sol.history.empty()) {
        SdpIterStat st;
        record(st);
        sol.history.push_back(st);
    }
    const SdpIterStat& last = sol.history.back();
    sol.primal_obj = last.primal_obj;
    sol.dual_obj = last.dual_obj;
    sol.primal_res = last.primal_res;
    sol.dual_res = last.dual_res;
    sol.gap = std::abs(last.primal_obj - last.dual_obj) /
              (1.0 + std::abs(last.primal_obj) + std::abs(last.dual_obj));
    // De-homogenize; infeasibility certificates stay in the raw scale of the
    // embedding (they are rays, so the normalization is arbitrary).
    double t = (sol.status == SdpStatus::Infeasible ||
                sol.status == SdpStatus::DualInfeasible)
                   ? 1.0
                   : std::max(tau, 1e-300);
    for (auto& blk : X) blk /= t;
    for (auto& blk : Z) blk /= t;
    sol.X = std::move(X);
    sol.Z = std::move(Z);
    // Undo constraint scaling in the reported multipliers.
    sol.y.resize(m);
    for (int k = 0; k < m; ++k)
        sol.y(k) = y(k) / (t * scale[static_cast<size_t>(k)]);
    return sol;
}

} // namespace pps::sdp
