// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/sos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "pps/common.hpp"

namespace pps::sos {

namespace {

using poly::GradedLexLess;
using poly::Monomial;
using poly::MonomialBasis;
using poly::Polynomial;

int round_up_even(int d) { return (d + 1) / 2 * 2; }

int effective_update_degree(const semialg::PpsSystem& sys, int cell) {
    return std::max(1, sys.update_degree(static_cast<size_t>(cell)));
}

// Ambient identity degree for a cell relaxation.
int cell_ambient_degree(const semialg::PpsSystem& sys, int cell,
                        const Polynomial& composed,
                        std::span<const poly::Polynomial> templates,
                        std::span<const double> w, int half_degree,
                        CapMode mode) {
    if (mode == CapMode::ScaledByUpdate)
        return round_up_even(2 * half_degree * effective_update_degree(sys, cell));
    int deg = std::max(2, static_cast<int>(composed.degree()));
    for (size_t q = 0; q < templates.size(); ++q)
        if (std::isfinite(w[q]))
            deg = std::max(deg, static_cast<int>(templates[q].degree()));
    for (const auto& c : sys.partition.cell(static_cast<size_t>(cell)).constraints())
        deg = std::max(deg, static_cast<int>(c.r.degree()));
    for (const auto& c : sys.guard.constraints())
        deg = std::max(deg, static_cast<int>(c.r.degree()));
    return round_up_even(deg);
}

int multiplier_half_degree(int ambient, const Polynomial& r) {
    return std::max(0, (ambient - static_cast<int>(r.degree())) / 2);
}

// x^alpha composed with the update map, with per-variable power caches.
Polynomial monomial_compose(const Monomial& alpha,
                            const std::vector<Polynomial>& update,
                            std::vector<std::vector<Polynomial>>& power_cache) {
    int dim = static_cast<int>(update.size());
    Polynomial out = Polynomial::constant(dim, 1.0);
    for (int v = 0; v < dim; ++v) {
        unsigned e = alpha.exponent(v);
        if (e == 0) continue;
        auto& powers = power_cache[static_cast<size_t>(v)];
        if (powers.empty()) powers.push_back(Polynomial::constant(dim, 1.0));
        while (powers.size() <= e) powers.push_back(powers.back() * update[static_cast<size_t>(v)]);
        out = out * powers[e];
    }
    return out;
}

} // namespace

SosProgram relaxed_cell_program(const semialg::PpsSystem& sys, int cell,
                                std::span<const poly::Polynomial> templates,
                                int target, std::span<const double> w,
                                int half_degree, const SosOptions& options) {
    if (cell < 0 || static_cast<size_t>(cell) >= sys.partition.size())
        throw Error("relaxed_cell_program: cell index out of range");
    if (target < 0 || static_cast<size_t>(target) >= templates.size())
        throw Error("relaxed_cell_program: target index out of range");
    const int dim = sys.dimension;
    const auto& update = sys.updates[static_cast<size_t>(cell)];
    const Polynomial composed = templates[static_cast<size_t>(target)].compose(update);
    const int ambient = cell_ambient_degree(sys, cell, composed, templates, w,
                                            half_degree, options.cap_mode);

    SosProgram prog;
    prog.dimension = dim;
    prog.known.push_back(-composed);
    prog.objective_name = "eta";

    SosProgram::ScalarVar eta;
    eta.name = "eta";
    eta.objective_weight = 1.0;
    eta.contribs.push_back({0, Polynomial::constant(dim, 1.0)});
    prog.scalars.push_back(std::move(eta));

    prog.lambda_names.assign(templates.size(), "");
    for (size_t q = 0; q < templates.size(); ++q) {
        if (!std::isfinite(w[q])) continue; // unbounded template: lambda dropped
        SosProgram::ScalarVar lam;
        lam.name = "lambda_" + std::to_string(q);
        lam.nonneg = true;
        lam.contribs.push_back({0, templates[q] - Polynomial::constant(dim, w[q])});
        prog.lambda_names[q] = lam.name;
        prog.scalars.push_back(std::move(lam));
    }

    SosProgram::SosVar sigma{"sigma", MonomialBasis(dim, ambient / 2), {}};
    sigma.contribs.push_back({0, -1.0, Polynomial::constant(dim, 1.0)});
    prog.sos_vars.push_back(std::move(sigma));

    const auto add_multipliers = [&](const semialg::SemiAlgSet& set,
                                     const std::string& stem) {
        size_t idx = 0;
        for (const auto& c : set.constraints()) {
            SosProgram::SosVar mult{
                stem + "_" + std::to_string(idx++),
                MonomialBasis(dim, multiplier_half_degree(ambient, c.r)),
                {}};
            mult.contribs.push_back({0, 1.0, c.r});
            prog.sos_vars.push_back(std::move(mult));
        }
    };
    add_multipliers(sys.partition.cell(static_cast<size_t>(cell)), "mu");
    add_multipliers(sys.guard, "gamma");
    return prog;
}

SosProgram init_sup_program(const semialg::PpsSystem& sys,
                            const poly::Polynomial& p, int half_degree,
                            const SosOptions& options) {
    (void)options;
    const int dim = sys.dimension;
    int ambient = std::max(2 * half_degree, static_cast<int>(p.degree()));
    for (const auto& c : sys.init.constraints())
        ambient = std::max(ambient, static_cast<int>(c.r.degree()));
    ambient = round_up_even(std::max(2, ambient));

    SosProgram prog;
    prog.dimension = dim;
    prog.known.push_back(-p);
    prog.objective_name = "eta";

    SosProgram::ScalarVar eta;
    eta.name = "eta";
    eta.objective_weight = 1.0;
    eta.contribs.push_back({0, Polynomial::constant(dim, 1.0)});
    prog.scalars.push_back(std::move(eta));

    SosProgram::SosVar sigma{"sigma0", MonomialBasis(dim, ambient / 2), {}};
    sigma.contribs.push_back({0, -1.0, Polynomial::constant(dim, 1.0)});
    prog.sos_vars.push_back(std::move(sigma));

    size_t idx = 0;
    for (const auto& c : sys.init.constraints()) {
        SosProgram::SosVar nu{"nu_" + std::to_string(idx++),
                              MonomialBasis(dim, multiplier_half_degree(ambient, c.r)),
                              {}};
        nu.contribs.push_back({0, 1.0, c.r});
        prog.sos_vars.push_back(std::move(nu));
    }
    return prog;
}

SosProgram synthesis_program(const semialg::PpsSystem& sys, int half_degree,
                             const SosOptions& options) {
    (void)options;
    const int dim = sys.dimension;
    const int num_cells = static_cast<int>(sys.partition.size());
    const int tdeg = 2 * half_degree;

    SosProgram prog;
    prog.dimension = dim;
    // Identity layout: 0 = initial-set identity, 1..num_cells = per-cell
    // decrease identities, num_cells + 1 = norm-domination identity.
    const int id_init = 0;
    const int id_norm = num_cells + 1;
    prog.known.assign(static_cast<size_t>(num_cells) + 2, Polynomial::constant(dim, 0.0));

    Polynomial norm_sq = Polynomial::constant(dim, 0.0);
    for (int v = 0; v < dim; ++v) norm_sq.add_term(Monomial::unit(dim, v, 2), 1.0);
    prog.known[static_cast<size_t>(id_norm)] = -norm_sq;

    SosProgram::ScalarVar wvar;
    wvar.name = "w";
    wvar.objective_weight = 1.0;
    wvar.contribs.push_back({id_norm, Polynomial::constant(dim, 1.0)});
    prog.scalars.push_back(std::move(wvar));
    prog.objective_name = "w";

    // Free coefficients of the template polynomial p, one scalar per monomial
    // of degree <= 2m.
    MonomialBasis coeff_basis(dim, tdeg);
    std::vector<std::vector<std::vector<Polynomial>>> caches(
        static_cast<size_t>(num_cells),
        std::vector<std::vector<Polynomial>>(static_cast<size_t>(dim)));
    const auto monomial_key = [](const Monomial& m) {
        std::string key;
        for (int v = 0; v < m.dimension(); ++v) {
            if (v) key += '_';
            key += std::to_string(m.exponent(v));
        }
        return key;
    };
    for (size_t a = 0; a < coeff_basis.size(); ++a) {
        const Monomial& alpha = coeff_basis[a];
        SosProgram::ScalarVar cvar;
        cvar.name = "c_" + monomial_key(alpha);
        Polynomial xa = Polynomial::term(alpha, 1.0);
        cvar.contribs.push_back({id_init, -xa});
        for (int i = 0; i < num_cells; ++i) {
            Polynomial comp = monomial_compose(alpha, sys.updates[static_cast<size_t>(i)],
                                               caches[static_cast<size_t>(i)]);
            cvar.contribs.push_back({1 + i, xa - comp});
        }
        cvar.contribs.push_back({id_norm, xa});
        prog.free_poly_coeffs.emplace_back(cvar.name, alpha);
        prog.scalars.push_back(std::move(cvar));
    }

    // Initial-set identity: -p - sigma0 + sum_j sigma_j r_j = 0, ambient 2m.
    {
        int ambient = tdeg;
        for (const auto& c : sys.init.constraints())
            ambient = std::max(ambient, static_cast<int>(c.r.degree()));
        ambient = round_up_even(std::max(2, ambient));
        SosProgram::SosVar sigma0{"sigma0", MonomialBasis(dim, ambient / 2), {}};
        sigma0.contribs.push_back({id_init, -1.0, Polynomial::constant(dim, 1.0)});
        prog.sos_vars.push_back(std::move(sigma0));
        size_t idx = 0;
        for (const auto& c : sys.init.constraints()) {
            SosProgram::SosVar s{"sigma_init_" + std::to_string(idx++),
                                 MonomialBasis(dim, multiplier_half_degree(ambient, c.r)),
                                 {}};
            s.contribs.push_back({id_init, 1.0, c.r});
            prog.sos_vars.push_back(std::move(s));
        }
    }

    // Per-cell decrease identity: p - p(T_i) - sigma_i + <mu_i, r_cell>
    // + <gamma_i, r_guard> = 0, ambient 2m * deg(T_i).
    for (int i = 0; i < num_cells; ++i) {
        int ambient = round_up_even(tdeg * effective_update_degree(sys, i));
        for (const auto& c : sys.partition.cell(static_cast<size_t>(i)).constraints())
            ambient = std::max(ambient, round_up_even(static_cast<int>(c.r.degree())));
        for (const auto& c : sys.guard.constraints())
            ambient = std::max(ambient, round_up_even(static_cast<int>(c.r.degree())));
        SosProgram::SosVar sigma{"sigma_cell_" + std::to_string(i),
                                 MonomialBasis(dim, ambient / 2), {}};
        sigma.contribs.push_back({1 + i, -1.0, Polynomial::constant(dim, 1.0)});
        prog.sos_vars.push_back(std::move(sigma));
        size_t idx = 0;
        for (const auto& c : sys.partition.cell(static_cast<size_t>(i)).constraints()) {
            SosProgram::SosVar mult{"mu_" + std::to_string(i) + "_" + std::to_string(idx++),
                                    MonomialBasis(dim, multiplier_half_degree(ambient, c.r)),
                                    {}};
            mult.contribs.push_back({1 + i, 1.0, c.r});
            prog.sos_vars.push_back(std::move(mult));
        }
        idx = 0;
        for (const auto& c : sys.guard.constraints()) {
            SosProgram::SosVar mult{"gamma_" + std::to_string(i) + "_" + std::to_string(idx++),
                                    MonomialBasis(dim, multiplier_half_degree(ambient, c.r)),
                                    {}};
            mult.contribs.push_back({1 + i, 1.0, c.r});
            prog.sos_vars.push_back(std::move(mult));
        }
    }

    // Norm-domination identity: w + p - |x|^2 - psi = 0, ambient 2m.
    {
        SosProgram::SosVar psi{"psi", MonomialBasis(dim, half_degree), {}};
        psi.contribs.push_back({id_norm, -1.0, Polynomial::constant(dim, 1.0)});
        prog.sos_vars.push_back(std::move(psi));
    }
    return prog;
}

std::string SosProgram::describe() const {
    std::ostringstream out;
    out << "sos program: minimize";
    bool any = false;
    for (const auto& s : scalars)
        if (s.objective_weight != 0.0) {
            out << (any ? " + " : " ") << (s.objective_weight == 1.0 ? "" : "~") << s.name;
            any = true;
        }
    if (!any) out << " 0";
    out << "\n";
    for (int t = 0; t < num_identities(); ++t) {
        out << "identity " << t << ":\n";
        out << "  known: " << known[static_cast<size_t>(t)].to_string(6) << "\n";
        for (const auto& s : scalars)
            for (const auto& c : s.contribs)
                if (c.identity == t)
                    out << "  scalar " << s.name << (s.nonneg ? " >= 0" : "")
                        << " * (" << c.coeff.to_string(6) << ")\n";
        for (const auto& v : sos_vars)
            for (const auto& c : v.contribs)
                if (c.identity == t)
                    out << "  sos " << v.name << " [basis half-degree "
                        << v.basis.half_degree() << ", size " << v.basis.size()
                        << "] sign " << (c.sign < 0 ? "-" : "+") << " * ("
                        << c.multiplier.to_string(6) << ")\n";
    }
    return out.str();
}

namespace {

// A linear row over (free scalars, nonneg scalars, Gram entries):
//   sum free + sum nonneg + <gram, X> = rhs.
// Gram coefficients use the symmetric-doubling convention of the SDP entries
// (an off-diagonal coefficient v stands for v * (X_ij + X_ji)).
struct Row {
    std::map<int, double> free_c;
    std::map<int, double> nonneg_c;
    std::map<std::tuple<int, int, int>, double> gram; // (sos var, i, j<=i? no: i<=j)
    double rhs = 0.0;

    void axpy(double factor, const Row& other) {
        if (factor == 0.0) return;
        for (const auto& [k, v] : other.free_c) free_c[k] += factor * v;
        for (const auto& [k, v] : other.nonneg_c) nonneg_c[k] += factor * v;
        for (const auto& [k, v] : other.gram) gram[k] += factor * v;
        rhs += factor * other.rhs;
    }
    void prune(double tol) {
        std::erase_if(free_c, [&](const auto& kv) { return std::abs(kv.second) <= tol; });
        std::erase_if(nonneg_c, [&](const auto& kv) { return std::abs(kv.second) <= tol; });
        std::erase_if(gram, [&](const auto& kv) { return std::abs(kv.second) <= tol; });
    }
    bool cone_empty() const { return nonneg_c.empty() && gram.empty(); }
};

} // namespace

CompiledSdp assemble(const SosProgram& program) {
    const int num_ids = program.num_identities();

    // Classify scalars.
    std::vector<int> free_ids, nonneg_ids;
    for (size_t s = 0; s < program.scalars.size(); ++s)
        (program.scalars[s].nonneg ? nonneg_ids : free_ids).push_back(static_cast<int>(s));

    CompiledSdp out;
    // Blocks: one dense block per SOS var, then one diagonal block for the
    // nonnegative scalars.
    for (size_t v = 0; v < program.sos_vars.size(); ++v) {
        out.problem.blocks.push_back(static_cast<int>(program.sos_vars[v].basis.size()));
        out.sos_block[program.sos_vars[v].name] = static_cast<int>(v);
    }
    int nonneg_block = -1;
    if (!nonneg_ids.empty()) {
        nonneg_block = static_cast<int>(program.sos_vars.size());
        out.problem.blocks.push_back(-static_cast<int>(nonneg_ids.size()));
        for (size_t k = 0; k < nonneg_ids.size(); ++k)
            out.nonneg_loc[program.scalars[static_cast<size_t>(nonneg_ids[k])].name] = {
                nonneg_block, static_cast<int>(k)};
    }
    std::map<int, int> nonneg_index; // scalar id -> diag index
    for (size_t k = 0; k < nonneg_ids.size(); ++k)
        nonneg_index[nonneg_ids[k]] = static_cast<int>(k);
    std::map<int, int> free_index; // scalar id -> free ordinal
    for (size_t k = 0; k < free_ids.size(); ++k) free_index[free_ids[k]] = static_cast<int>(k);

    // Build one row per (identity, monomial).
    std::vector<std::map<Monomial, Row, GradedLexLess>> rows(
        static_cast<size_t>(num_ids));
    for (int t = 0; t < num_ids; ++t)
        for (const auto& [mono, coeff] : program.known[static_cast<size_t>(t)].terms())
            rows[static_cast<size_t>(t)][mono].rhs -= coeff;

    for (size_t s = 0; s < program.scalars.size(); ++s) {
        const auto& sv = program.scalars[s];
        for (const auto& c : sv.contribs)
            for (const auto& [mono, coeff] : c.coeff.terms()) {
                Row& row = rows[static_cast<size_t>(c.identity)][mono];
                if (sv.nonneg)
                    row.nonneg_c[nonneg_index.at(static_cast<int>(s))] += coeff;
                else
                    row.free_c[free_index.at(static_cast<int>(s))] += coeff;
            }
    }
    for (size_t v = 0; v < program.sos_vars.size(); ++v) {
        const auto& sv = program.sos_vars[v];
        const auto& basis = sv.basis;
        for (const auto& c : sv.contribs) {
            auto& id_rows = rows[static_cast<size_t>(c.identity)];
            for (size_t i = 0; i < basis.size(); ++i)
                for (size_t j = i; j < basis.size(); ++j) {
                    Monomial pair_mono = basis[i] * basis[j];
                    for (const auto& [mono, coeff] : c.multiplier.terms()) {
                        // Off-diagonal Gram coefficients already stand for the
                        // symmetric pair, matching the SDP inner product.
                        id_rows[pair_mono * mono].gram[{static_cast<int>(v),
                                                        static_cast<int>(i),
                                                        static_cast<int>(j)}] +=
                            c.sign * coeff;
                    }
                }
        }
    }

    // Flatten in deterministic order: identity index, then graded lex.
    std::vector<Row> active;
    for (int t = 0; t < num_ids; ++t)
        for (auto& [mono, row] : rows[static_cast<size_t>(t)]) {
            row.prune(0.0);
            active.push_back(std::move(row));
        }

    // Objective as a pseudo-row: value = free + nonneg + <gram, X> + constant.
    Row objective;
    double objective_constant = 0.0;
    for (size_t s = 0; s < program.scalars.size(); ++s) {
        const auto& sv = program.scalars[s];
        if (sv.objective_weight == 0.0) continue;
        if (sv.nonneg)
            objective.nonneg_c[nonneg_index.at(static_cast<int>(s))] += sv.objective_weight;
        else
            objective.free_c[free_index.at(static_cast<int>(s))] += sv.objective_weight;
    }

    // Eliminate free scalars by exact pivoting.  Pivot rows leave the
    // constraint set and are stored for decoding; they are also mutually
    // reduced so each ends up referencing only its own scalar.
    std::vector<std::pair<int, Row>> pivots; // (free ordinal, pivot row)
    std::vector<char> used(active.size(), 0);
    for (size_t f = 0; f < free_ids.size(); ++f) {
        int best = -1;
        double best_mag = 1e-12;
        for (size_t r = 0; r < active.size(); ++r) {
            if (used[r]) continue;
            auto it = active[r].free_c.find(static_cast<int>(f));
            if (it == active[r].free_c.end()) continue;
            if (std::abs(it->second) > best_mag) {
                best_mag = std::abs(it->second);
                best = static_cast<int>(r);
            }
        }
        if (best < 0)
            throw Error("sos assemble: free scalar '" +
                        program.scalars[static_cast<size_t>(free_ids[f])].name +
                        "' has no usable identity row");
        used[static_cast<size_t>(best)] = 1;
        Row pivot = active[static_cast<size_t>(best)];
        double pc = pivot.free_c.at(static_cast<int>(f));
        for (size_t r = 0; r < active.size(); ++r) {
            if (used[r]) continue;
            auto it = active[r].free_c.find(static_cast<int>(f));
            if (it == active[r].free_c.end() || it->second == 0.0) continue;
            double factor = -it->second / pc;
            active[r].axpy(factor, pivot);
            active[r].free_c.erase(static_cast<int>(f));
        }
        for (auto& [pf, prow] : pivots) {
            auto it = prow.free_c.find(static_cast<int>(f));
            if (it == prow.free_c.end() || it->second == 0.0) continue;
            double factor = -it->second / pc;
            prow.axpy(factor, pivot);
            prow.free_c.erase(static_cast<int>(f));
        }
        // Objective: value uses f = (rhs - rest) / pc, so the constant grows
        // by weight * rhs / pc while the row parts subtract.
        auto it = objective.free_c.find(static_cast<int>(f));
        if (it != objective.free_c.end() && it->second != 0.0) {
            double factor = it->second / pc;
            objective_constant += factor * pivot.rhs;
            Row shifted = pivot;
            shifted.rhs = 0.0;
            objective.axpy(-factor, shifted);
            objective.free_c.erase(static_cast<int>(f));
        }
        pivots.emplace_back(static_cast<int>(f), std::move(pivot));
    }

    const auto cone_entries = [&](const Row& row) {
        std::vector<sdp::SdpProblem::Entry> entries;
        for (const auto& [idx, v] : row.nonneg_c)
            entries.push_back({nonneg_block, idx, idx, v});
        for (const auto& [key, v] : row.gram) {
            auto [blk, i, j] = key;
            entries.push_back({blk, i, j, v});
        }
        return entries;
    };

    // Remaining rows become SDP constraints.
    std::vector<double> rhs_values;
    for (size_t r = 0; r < active.size(); ++r) {
        if (used[r]) continue;
        Row& row = active[r];
        row.prune(1e-14);
        if (!row.free_c.empty())
            throw Error("sos assemble: residual free coefficient after elimination");
        if (row.cone_empty()) {
            if (std::abs(row.rhs) > 1e-9)
                throw Error("sos assemble: inconsistent identity row (0 = " +
                            std::to_string(row.rhs) + ")");
            continue;
        }
        out.problem.constraints.push_back(cone_entries(row));
        rhs_values.push_back(row.rhs);
    }
    out.problem.rhs = Eigen::Map<const Eigen::VectorXd>(rhs_values.data(),
                                                        static_cast<long>(rhs_values.size()));

    objective.prune(1e-14);
    if (!objective.free_c.empty())
        throw Error("sos assemble: objective still references free scalars");
    out.problem.objective = cone_entries(objective);
    out.objective_constant = objective_constant;

    for (auto& [f, prow] : pivots) {
        CompiledSdp::FreePivot fp;
        fp.name = program.scalars[static_cast<size_t>(free_ids[static_cast<size_t>(f)])].name;
        fp.pivot_coeff = prow.free_c.at(f);
        prow.free_c.erase(f);
        if (!prow.free_c.empty())
            throw Error("sos assemble: pivot row not fully reduced");
        fp.rhs = prow.rhs;
        fp.cone = cone_entries(prow);
        out.free_pivots.push_back(std::move(fp));
    }

    out.problem.validate();
    return out;
}

namespace {

double cone_dot(const std::vector<sdp::SdpProblem::Entry>& entries,
                const std::vector<poly::SymMatrix>& X) {
    double acc = 0.0;
    for (const auto& e : entries) {
        double w = (e.row == e.col) ? 1.0 : 2.0;
        acc += w * e.value * X[static_cast<size_t>(e.block)](e.row, e.col);
    }
    return acc;
}

} // namespace

SosSolution decode(const SosProgram& program, const CompiledSdp& compiled,
                   const sdp::SdpSolution& sdp_solution,
                   const SosOptions& options) {
    SosSolution sol;
    sol.sdp_status = sdp_solution.status;
    if (sdp_solution.status == sdp::SdpStatus::Infeasible ||
        sdp_solution.status == sdp::SdpStatus::DualInfeasible) {
        sol.reject_reason = sdp_solution.status == sdp::SdpStatus::Infeasible
                                ? "sdp infeasible"
                                : "sdp unbounded";
        return sol;
    }

    // Gram matrices and their eigenvalue floor.
    sol.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& sv : program.sos_vars) {
        const auto& X = sdp_solution.X[static_cast<size_t>(compiled.sos_block.at(sv.name))];
        sol.certificates[sv.name] = X;
        if (X.rows() > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
            sol.min_eigenvalue = std::min(sol.min_eigenvalue, es.eigenvalues().minCoeff());
        }
    }
    if (program.sos_vars.empty()) sol.min_eigenvalue = 0.0;

    // Scalar values: nonnegative ones from the diagonal block, free ones from
    // the stored pivots.
    for (const auto& [name, loc] : compiled.nonneg_loc)
        sol.scalar_values[name] = sdp_solution.X[static_cast<size_t>(loc.first)](loc.second, loc.second);
    for (const auto& fp : compiled.free_pivots)
        sol.scalar_values[fp.name] = (fp.rhs - cone_dot(fp.cone, sdp_solution.X)) / fp.pivot_coeff;

    // Recompute every identity from the decoded pieces; the residual is the
    // largest leftover coefficient.
    sol.residual = 0.0;
    for (int t = 0; t < program.num_identities(); ++t) {
        Polynomial acc = program.known[static_cast<size_t>(t)];
        for (const auto& sv : program.scalars) {
            double value = sol.scalar_values.at(sv.name);
            for (const auto& c : sv.contribs)
                if (c.identity == t) acc += value * c.coeff;
        }
        for (const auto& sv : program.sos_vars) {
            const auto& X = sol.certificates.at(sv.name);
            Polynomial expanded = poly::gram_expand(X, sv.basis);
            for (const auto& c : sv.contribs)
                if (c.identity == t) acc += c.sign * (c.multiplier * expanded);
        }
        for (const auto& [mono, coeff] : acc.terms())
            sol.residual = std::max(sol.residual, std::abs(coeff));
    }

    // Decoded objective straight from the declared weights.
    sol.objective_value = 0.0;
    for (const auto& sv : program.scalars)
        if (sv.objective_weight != 0.0)
            sol.objective_value += sv.objective_weight * sol.scalar_values.at(sv.name);

    if (sdp_solution.status != sdp::SdpStatus::Optimal) {
        sol.reject_reason = "sdp did not converge";
        return sol;
    }
    if (sol.residual > options.residual_tol) {
        sol.reject_reason = "identity residual " + std::to_string(sol.residual) +
                            " above tolerance";
        return sol;
    }
    if (sol.min_eigenvalue < -options.psd_tol) {
        sol.reject_reason = "certificate eigenvalue " +
                            std::to_string(sol.min_eigenvalue) + " below tolerance";
        return sol;
    }
    sol.accepted = true;
    return sol;
}

poly::Polynomial synthesized_template(const SosProgram& program,
                                      const SosSolution& solution) {
    if (program.free_poly_coeffs.empty())
        throw Error("synthesized_template: program has no free template");
    Polynomial p = Polynomial::constant(program.dimension, 0.0);
    for (const auto& [name, mono] : program.free_poly_coeffs)
        p.add_term(mono, solution.scalar_values.at(name));
    p.normalize();
    return p;
}

} // namespace pps::sos
