// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pps/poly.hpp"
#include "pps/sdp.hpp"
#include "pps/semialg.hpp"

namespace pps::sos {

// Degree-cap policy for the multiplier/certificate polynomials.
//  - TemplateDegree (default): the ambient identity degree is the smallest
//    even bound covering every term actually present (target composition,
//    templates, constraint polynomials).
//  - ScaledByUpdate: the ambient degree is 2m * deg(T_i) for the cell update,
//    the looser bookkeeping variant.
enum class CapMode { TemplateDegree, ScaledByUpdate };

struct SosOptions {
    CapMode cap_mode = CapMode::TemplateDegree;
    double residual_tol = 1e-6; // max identity-coefficient error accepted
    double psd_tol = 1e-7;      // Gram eigenvalue slack accepted
    double pad_factor = 1.0;    // decoded bound is padded by residual * this
};

// A sums-of-squares feasibility/optimization program: a list of polynomial
// identities that must vanish coefficient-wise, over scalar unknowns (free or
// nonnegative) and SOS polynomial unknowns in Gram form.  Each unknown enters
// identities linearly with a known polynomial coefficient/multiplier.
struct SosProgram {
    struct ScalarContribution {
        int identity = 0;
        poly::Polynomial coeff; // identity += coeff * scalar
    };
    struct ScalarVar {
        std::string name;
        bool nonneg = false;
        double objective_weight = 0.0;
        std::vector<ScalarContribution> contribs;
    };
    struct SosContribution {
        int identity = 0;
        double sign = 1.0;           // identity += sign * multiplier * (b^T Q b)
        poly::Polynomial multiplier; // a known polynomial (often 1)
    };
    struct SosVar {
        std::string name;
        poly::MonomialBasis basis;
        std::vector<SosContribution> contribs;
    };

    int dimension = 0;
    std::vector<poly::Polynomial> known; // constant part of each identity
    std::vector<ScalarVar> scalars;
    std::vector<SosVar> sos_vars;

    // Decode conveniences.
    std::string objective_name;             // scalar being minimized
    std::vector<std::string> lambda_names;  // per template ("" = dropped)
    // Coefficient scalars of the free template polynomial (synthesis only).
    std::vector<std::pair<std::string, poly::Monomial>> free_poly_coeffs;

    int num_identities() const { return static_cast<int>(known.size()); }
    std::string describe() const; // human-readable dump (--dump-sos)
};

// Relaxation of the one-step bound for one cell and one target template:
// minimize eta subject to
//   eta - p(T_i(x)) - sum_q lambda_q (w_q - q(x)) + <mu, r_cell> + <gamma,
//   r_guard> being SOS, lambda_q >= 0 scalars.
// Templates with w_q = +inf are dropped from the lambda sum.
SosProgram relaxed_cell_program(const semialg::PpsSystem& sys, int cell,
                                std::span<const poly::Polynomial> templates,
                                int target, std::span<const double> w,
                                int half_degree, const SosOptions& options);

// Upper bound on p over the initial set: minimize eta subject to
// eta - p + <nu, r_init> being SOS.
SosProgram init_sup_program(const semialg::PpsSystem& sys,
                            const poly::Polynomial& p, int half_degree,
                            const SosOptions& options);

// Joint template/bound synthesis: free polynomial p of degree <= 2m and
// scalar w minimizing w subject to
//   -p SOS-representable on the initial set,
//   p - p(T_i(x)) SOS-representable on each cell,
//   w + p - |x|^2 SOS.
SosProgram synthesis_program(const semialg::PpsSystem& sys, int half_degree,
                             const SosOptions& options);

// Standard-form SDP compiled from a program.  Free scalars are eliminated by
// exact pivoting on identity rows, so the SDP carries only cone variables;
// the pivots are kept for decoding.
struct CompiledSdp {
    sdp::SdpProblem problem;

    struct FreePivot {
        std::string name;
        double pivot_coeff = 0.0;
        double rhs = 0.0;
        std::vector<sdp::SdpProblem::Entry> cone; // <cone, X> with symmetric doubling
    };
    std::vector<FreePivot> free_pivots;               // in elimination order
    std::map<std::string, int> sos_block;             // sos var name -> block
    std::map<std::string, std::pair<int, int>> nonneg_loc; // name -> (block, idx)
    double objective_constant = 0.0;
};

CompiledSdp assemble(const SosProgram& program);

// Solution decoded back to program terms, with the certificate residual
// recomputed from scratch.
struct SosSolution {
    sdp::SdpStatus sdp_status = sdp::SdpStatus::MaxIter;
    bool accepted = false;
    std::string reject_reason;
    double objective_value = 0.0; // raw decoded objective
    double residual = 0.0;        // max identity-coefficient error
    double min_eigenvalue = 0.0;  // over all Gram blocks
    std::map<std::string, double> scalar_values;
    std::map<std::string, poly::SymMatrix> certificates;

    // Sound reported bound: raw value padded by the certificate residual.
    double padded_value(double pad_factor) const {
        return objective_value + residual * pad_factor;
    }
};

SosSolution decode(const SosProgram& program, const CompiledSdp& compiled,
                   const sdp::SdpSolution& sdp_solution,
                   const SosOptions& options);

// Reassemble the template polynomial of a synthesis solution.
poly::Polynomial synthesized_template(const SosProgram& program,
                                      const SosSolution& solution);

} // namespace pps::sos
