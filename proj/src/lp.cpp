// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pps::lp {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-9;

// Dense simplex tableau over equality constraints Ax = rhs, x >= 0, with an
// explicit basis.  Pivoting keeps basis columns at identity.
class Tableau {
public:
    Tableau(Eigen::MatrixXd a, Eigen::VectorXd rhs, std::vector<int> basis)
        : a_(std::move(a)), rhs_(std::move(rhs)), basis_(std::move(basis)) {}

    int rows() const { return static_cast<int>(a_.rows()); }
    int cols() const { return static_cast<int>(a_.cols()); }
    const std::vector<int>& basis() const { return basis_; }
    double rhs(int r) const { return rhs_(r); }

    // Minimize cost over the tableau with Bland's rule; allowed[j] masks the
    // columns that may enter.  Returns false when unbounded.
    bool minimize(const Eigen::VectorXd& cost, const std::vector<bool>& allowed) {
        // Reduced-cost row for the current basis.
        Eigen::VectorXd red = cost;
        for (int r = 0; r < rows(); ++r) {
            double cb = cost(basis_[static_cast<size_t>(r)]);
            if (cb != 0.0) red -= cb * a_.row(r).transpose();
        }
        for (;;) {
            // Bland: smallest-index improving column.
            int enter = -1;
            for (int j = 0; j < cols(); ++j) {
                if (!allowed[static_cast<size_t>(j)]) continue;
                if (red(j) < -kCostEps) { enter = j; break; }
            }
            if (enter < 0) return true; // optimal
            // Ratio test; ties broken by smallest basic variable (Bland).
            int leave = -1;
            double best = 0.0;
            for (int r = 0; r < rows(); ++r) {
                double arj = a_(r, enter);
                if (arj <= kPivotEps) continue;
                double ratio = rhs_(r) / arj;
                if (leave < 0 || ratio < best - kPivotEps ||
                    (std::abs(ratio - best) <= kPivotEps &&
                     basis_[static_cast<size_t>(r)] < basis_[static_cast<size_t>(leave)])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave < 0) return false; // unbounded direction
            pivot(leave, enter, red);
        }
    }

    // Solution value of variable j under the current basis.
    double value(int j) const {
        for (int r = 0; r < rows(); ++r)
            if (basis_[static_cast<size_t>(r)] == j) return rhs_(r);
        return 0.0;
    }

    // Try to pivot basic variable of row r out using any allowed column.
    void pivot_out(int r, const std::vector<bool>& allowed) {
        for (int j = 0; j < cols(); ++j) {
            if (!allowed[static_cast<size_t>(j)]) continue;
            if (std::abs(a_(r, j)) > 1e-9) {
                Eigen::VectorXd dummy = Eigen::VectorXd::Zero(cols());
                pivot(r, j, dummy);
                return;
            }
        }
    }

private:
    void pivot(int r, int j, Eigen::VectorXd& red) {
        double p = a_(r, j);
        a_.row(r) /= p;
        rhs_(r) /= p;
        for (int i = 0; i < rows(); ++i) {
            if (i == r) continue;
            double f = a_(i, j);
            if (f != 0.0) {
                a_.row(i) -= f * a_.row(r);
                rhs_(i) -= f * rhs_(r);
            }
        }
        double f = red(j);
        if (f != 0.0) red -= f * a_.row(r).transpose();
        basis_[static_cast<size_t>(r)] = j;
    }

    Eigen::MatrixXd a_;
    Eigen::VectorXd rhs_;
    std::vector<int> basis_;
};

} // namespace

void LpProblem::validate() const {
    if (num_vars < 1) throw Error("LpProblem: no variables");
    if (lower_bounds.size() != num_vars)
        throw Error("LpProblem: lower bound count mismatch");
    for (const auto& row : rows) {
        if (row.coeffs.size() != num_vars)
            throw Error("LpProblem: row coefficient count mismatch");
        if (row.target < 0 || row.target >= num_vars)
            throw Error("LpProblem: row target out of range");
        for (Eigen::Index j = 0; j < row.coeffs.size(); ++j)
            if (row.coeffs(j) < 0.0)
                throw Error("LpProblem: negative row coefficient (multipliers "
                            "must be nonnegative)");
    }
    for (Eigen::Index j = 0; j < lower_bounds.size(); ++j)
        if (!std::isfinite(lower_bounds(j)))
            throw Error("LpProblem: lower bounds must be finite");
}

std::string_view to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

LpResult solve(const LpProblem& problem) {
    problem.validate();
    const int n = problem.num_vars;
    const int mr = static_cast<int>(problem.rows.size());

    // Shift to s = v - lb >= 0:  (a - e_t) . s <= lb_t - a . lb - constant.
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(mr, n);
    Eigen::VectorXd h(mr);
    for (int r = 0; r < mr; ++r) {
        const auto& row = problem.rows[static_cast<size_t>(r)];
        g.row(r) = row.coeffs.transpose();
        g(r, row.target) -= 1.0;
        h(r) = problem.lower_bounds(row.target) -
               row.coeffs.dot(problem.lower_bounds) - row.constant;
    }

    // Equality form with slacks (and artificials where h < 0).
    std::vector<int> artificial_rows;
    for (int r = 0; r < mr; ++r)
        if (h(r) < 0.0) artificial_rows.push_back(r);
    const int na = static_cast<int>(artificial_rows.size());
    const int total = n + mr + na;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(mr, total);
    Eigen::VectorXd rhs = h;
    a.block(0, 0, mr, n) = g;
    for (int r = 0; r < mr; ++r) a(r, n + r) = 1.0;
    std::vector<int> basis(static_cast<size_t>(mr));
    for (int r = 0; r < mr; ++r) basis[static_cast<size_t>(r)] = n + r;
    for (int i = 0; i < na; ++i) {
        int r = artificial_rows[static_cast<size_t>(i)];
        a.row(r) = -a.row(r);
        rhs(r) = -rhs(r);
        a(r, n + mr + i) = 1.0;
        basis[static_cast<size_t>(r)] = n + mr + i;
    }

    Tableau tab(std::move(a), std::move(rhs), std::move(basis));
    std::vector<bool> allowed(static_cast<size_t>(total), true);

    LpResult result;
    if (na > 0) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
        for (int i = 0; i < na; ++i) phase1(n + mr + i) = 1.0;
        if (!tab.minimize(phase1, allowed))
            throw Error("lp::solve: phase-1 objective unbounded (internal)");
        double infeas = 0.0;
        for (int i = 0; i < na; ++i) infeas += tab.value(n + mr + i);
        if (infeas > 1e-8) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        // Bar artificials from re-entering and pivot basic ones out.
        for (int i = 0; i < na; ++i) allowed[static_cast<size_t>(n + mr + i)] = false;
        for (int r = 0; r < mr; ++r)
            if (tab.basis()[static_cast<size_t>(r)] >= n + mr) tab.pivot_out(r, allowed);
    }

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total);
    for (int j = 0; j < n; ++j) phase2(j) = 1.0;
    if (!tab.minimize(phase2, allowed)) {
        result.status = LpStatus::Unbounded;
        return result;
    }

    result.status = LpStatus::Optimal;
    result.v.resize(n);
    for (int j = 0; j < n; ++j) result.v(j) = problem.lower_bounds(j) + tab.value(j);
    result.objective = result.v.sum();
    return result;
}

std::string dump(const LpProblem& problem) {
    auto name = [&](int j) {
        if (j < static_cast<int>(problem.var_names.size()))
            return problem.var_names[static_cast<size_t>(j)];
        return "v" + std::to_string(j + 1);
    };
    auto num = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "min";
    for (int j = 0; j < problem.num_vars; ++j)
        os << (j ? " + " : " ") << "v(" << name(j) << ")";
    os << "\ns.t.\n";
    for (int j = 0; j < problem.num_vars; ++j)
        os << "  " << num(problem.lower_bounds(j)) << " <= v(" << name(j) << ")\n";
    for (const auto& row : problem.rows) {
        os << "  ";
        bool first = true;
        for (int j = 0; j < problem.num_vars; ++j) {
            double c = row.coeffs(j);
            if (c == 0.0) continue;
            if (!first) os << " + ";
            os << num(c) << "*v(" << name(j) << ")";
            first = false;
        }
        if (row.constant != 0.0 || first) {
            if (!first) os << (row.constant < 0 ? " - " : " + ");
            os << num(first ? row.constant : std::abs(row.constant));
        }
        os << " <= v(" << name(row.target) << ")";
        if (!row.note.empty()) os << "    (" << row.note << ")";
        os << "\n";
    }
    return os.str();
}

} // namespace pps::lp
