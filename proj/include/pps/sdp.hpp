// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

#include "pps/common.hpp"

namespace pps::sdp {

// Standard-form semidefinite program over a block-diagonal cone:
//
//   minimize   <C, X>
//   subject to <A_k, X> = b_k   (k = 1..m),   X >= 0.
//
// Block sizes follow the SDPA convention: a negative size -n denotes a
// diagonal block of n entries.  Matrix data is sparse upper-triangular,
// 0-based within each block.
struct SdpProblem {
    struct Entry {
        int block = 0; // 0-based block index
        int row = 0;   // 0-based, row <= col
        int col = 0;
        double value = 0.0;
        bool operator==(const Entry&) const = default;
    };

    std::vector<int> blocks;                     // signed sizes
    std::vector<Entry> objective;                // C
    std::vector<std::vector<Entry>> constraints; // A_k
    Eigen::VectorXd rhs;                         // b

    int num_constraints() const { return static_cast<int>(constraints.size()); }
    int num_blocks() const { return static_cast<int>(blocks.size()); }
    int block_size(int b) const { return std::abs(blocks[static_cast<size_t>(b)]); }
    bool block_diagonal(int b) const { return blocks[static_cast<size_t>(b)] < 0; }
    int total_dim() const;

    // Shape checks: entry indices in range, row <= col, diagonal blocks carry
    // only diagonal entries, rhs length matches.  Throws on violation.
    void validate() const;
};

enum class SdpStatus { Optimal, Infeasible, DualInfeasible, MaxIter };

std::string_view to_string(SdpStatus s);

// Per-iteration convergence record, kept for diagnostics and property tests.
struct SdpIterStat {
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double primal_res = 0.0; // relative equality residual
    double dual_res = 0.0;   // relative dual-slack residual
    double mu = 0.0;
    double step_primal = 0.0; // step taken from this iterate
    double step_dual = 0.0;
    double sigma = 0.0; // centering weight used
};

struct SdpSolution {
    SdpStatus status = SdpStatus::MaxIter;
    std::vector<Eigen::MatrixXd> X; // per block (diagonal blocks dense too)
    Eigen::VectorXd y;
    std::vector<Eigen::MatrixXd> Z;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double gap = 0.0;        // relative duality gap at exit
    double primal_res = 0.0;
    double dual_res = 0.0;
    int iterations = 0;
    std::vector<SdpIterStat> history;
};

struct SdpOptions {
    double tol = 1e-8;      // relative duality gap target
    double feas_tol = 1e-8; // relative residual target
    int max_iter = 200;
    int dim_cap = 200;      // refuse problems with larger total dimension
    int cons_cap = 2000;    // refuse problems with more constraints
};

// Dense primal-dual interior-point method (Mehrotra predictor-corrector
// with Nesterov-Todd scaling).  Infeasibility and unboundedness are
// reported heuristically, not certified.
SdpSolution solve(const SdpProblem& problem, const SdpOptions& options = {});

// Sparse SDPA text form (".dat-s").  export_sdpa -> parse_sdpa -> export_sdpa
// is byte-identical; values are printed with 17 significant digits.
std::string export_sdpa(const SdpProblem& problem);
SdpProblem parse_sdpa(std::string_view text);

} // namespace pps::sdp
