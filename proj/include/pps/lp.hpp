// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "pps/common.hpp"

namespace pps::lp {

// The bound-improvement linear program:
//
//   minimize   sum_j v_j
//   subject to coeffs_r . v + constant_r <= v_{target_r}   for each row r,
//              v_j >= lower_bounds_j                        for each j.
//
// Row coefficients are nonnegative multipliers, so the feasible set is a
// meet-semilattice and the optimum is its least element.
struct LpProblem {
    struct Row {
        Eigen::VectorXd coeffs;
        double constant = 0.0;
        int target = 0;
        std::string note; // display tag, e.g. the originating cell
    };

    int num_vars = 0;
    std::vector<Row> rows;
    Eigen::VectorXd lower_bounds;
    std::vector<std::string> var_names; // optional display names

    void validate() const; // shapes and nonnegative coefficients
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string_view to_string(LpStatus s);

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd v;
    double objective = 0.0;
};

// Two-phase dense primal simplex with Bland's anti-cycling rule.
LpResult solve(const LpProblem& problem);

// Plain-text rendering (objective, lower bounds, then one inequality per
// line), used by --dump-lp.
std::string dump(const LpProblem& problem);

} // namespace pps::lp
