// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "pps/common.hpp"

namespace pps::analysis {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TemplateBasis::TemplateBasis(std::vector<poly::Polynomial> templates)
    : dimension_(templates.empty() ? 0 : templates.front().dimension()),
      templates_(std::move(templates)) {
    int generic = 0;
    for (size_t i = 0; i < templates_.size(); ++i) {
        const auto& t = templates_[i];
        if (t.dimension() != dimension_)
            throw DimensionError("template basis mixes ambient dimensions");
        for (size_t j = 0; j < i; ++j)
            if (templates_[j] == t)
                throw Error("duplicate template in basis");
        std::string label;
        if (t.term_count() == 1) {
            const auto& [mono, coeff] = *t.terms().begin();
            for (int v = 0; v < dimension_; ++v)
                if (mono.exponent(v) == 2 && mono.degree() == 2 && coeff == 1.0)
                    label = "x" + std::to_string(v + 1) + "^2";
        }
        if (label.empty()) label = "p" + std::to_string(++generic);
        labels_.push_back(std::move(label));
    }
}

TemplateBasis TemplateBasis::squares(int dimension) {
    std::vector<poly::Polynomial> polys;
    for (int v = 0; v < dimension; ++v)
        polys.push_back(poly::Polynomial::term(poly::Monomial::unit(dimension, v, 2), 1.0));
    return TemplateBasis(std::move(polys));
}

TemplateBasis TemplateBasis::squares_plus(int dimension, const poly::Polynomial& extra) {
    std::vector<poly::Polynomial> polys;
    for (int v = 0; v < dimension; ++v)
        polys.push_back(poly::Polynomial::term(poly::Monomial::unit(dimension, v, 2), 1.0));
    if (std::none_of(polys.begin(), polys.end(),
                     [&](const poly::Polynomial& q) { return q == extra; }))
        polys.push_back(extra);
    return TemplateBasis(std::move(polys));
}

int TemplateBasis::max_degree() const {
    int deg = 0;
    for (const auto& t : templates_) deg = std::max(deg, static_cast<int>(t.degree()));
    return deg;
}

BoundVector BoundVector::constant(size_t n, double v) {
    return BoundVector(std::vector<double>(n, v));
}

BoundVector BoundVector::top(size_t n) { return constant(n, kInf); }

bool BoundVector::all_finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

double BoundVector::inf_distance(const BoundVector& other) const {
    if (size() != other.size())
        throw DimensionError("bound vector size mismatch");
    double dist = 0.0;
    for (size_t i = 0; i < size(); ++i) {
        double a = values[i], b = other.values[i];
        if (a == b) continue; // covers +inf == +inf
        if (!std::isfinite(a) || !std::isfinite(b)) return kInf;
        dist = std::max(dist, std::abs(a - b));
    }
    return dist;
}

bool BoundVector::leq(const BoundVector& other, double slack) const {
    if (size() != other.size())
        throw DimensionError("bound vector size mismatch");
    for (size_t i = 0; i < size(); ++i) {
        if (other.values[i] == kInf) continue;
        if (!(values[i] <= other.values[i] + slack)) return false;
    }
    return true;
}

double PolicyEntry::phi(const BoundVector& v, const BoundVector& w_at_solve) const {
    double constant = value;
    for (size_t q = 0; q < lambda.size(); ++q)
        if (lambda[q] != 0.0) constant -= lambda[q] * w_at_solve[q];
    double out = constant;
    for (size_t q = 0; q < lambda.size(); ++q)
        if (lambda[q] != 0.0) out += lambda[q] * v[q];
    return out;
}

std::string to_string(Termination t) {
    switch (t) {
    case Termination::Fixpoint: return "fixpoint";
    case Termination::SolEmpty: return "sol-empty";
    case Termination::MaxIter: return "max-iterations";
    case Termination::LpFailure: return "lp-failure";
    }
    return "?";
}

Analyzer::Analyzer(semialg::PpsSystem system, TemplateBasis basis, AnalysisOptions options)
    : system_(std::move(system)), basis_(std::move(basis)), options_(std::move(options)) {
    system_.validate();
    if (basis_.size() == 0) throw Error("analyzer needs a nonempty template basis");
    if (basis_.dimension() != system_.dimension)
        throw DimensionError("template basis dimension does not match the system");
    if (basis_.max_degree() > 2 * options_.half_degree)
        throw Error("template degree exceeds the configured cap 2m");
}

const BoundVector& Analyzer::init_bounds() {
    if (init_bounds_) return *init_bounds_;
    BoundVector out = BoundVector::constant(basis_.size(), kInf);
    for (size_t q = 0; q < basis_.size(); ++q) {
        sos::SosProgram prog =
            sos::init_sup_program(system_, basis_[q], options_.half_degree, options_.sos);
        if (options_.dump_sos)
            *options_.dump_sos << "--- initial-set bound for " << basis_.labels()[q]
                               << " ---\n"
                               << prog.describe();
        sos::CompiledSdp compiled = sos::assemble(prog);
        sdp::SdpSolution sol = sdp::solve(compiled.problem, options_.sdp);
        sos::SosSolution dec = sos::decode(prog, compiled, sol, options_.sos);
        if (!dec.accepted) {
            if (!init_failure_)
                init_failure_ = EvalFailure{-1, static_cast<int>(q), dec.sdp_status,
                                            "initial-set bound for " + basis_.labels()[q] +
                                                ": " + dec.reject_reason};
            continue; // leave +inf
        }
        out[q] = dec.padded_value(options_.sos.pad_factor);
        log_debug("init bound " + basis_.labels()[q] + " = " + std::to_string(out[q]));
    }
    init_bounds_ = std::move(out);
    return *init_bounds_;
}

EvalResult Analyzer::eval_relaxed(const BoundVector& w) {
    if (w.size() != basis_.size())
        throw DimensionError("bound vector does not match the template basis");
    const BoundVector& init = init_bounds();

    struct Task {
        int cell;
        int tmpl;
    };
    std::vector<Task> tasks;
    for (size_t i = 0; i < system_.partition.size(); ++i)
        for (size_t q = 0; q < basis_.size(); ++q)
            tasks.push_back({static_cast<int>(i), static_cast<int>(q)});

    struct Outcome {
        PolicyEntry entry;
        std::optional<EvalFailure> failure;
    };
    std::vector<Outcome> outcomes(tasks.size());

    const auto run_task = [&](size_t idx) {
        const Task& task = tasks[idx];
        Outcome& out = outcomes[idx];
        sos::SosProgram prog = sos::relaxed_cell_program(
            system_, task.cell, basis_.polys(), task.tmpl,
            std::span<const double>(w.values), options_.half_degree, options_.sos);
        if (options_.dump_sos)
            *options_.dump_sos << "--- cell " << (task.cell + 1) << ", target "
                               << basis_.labels()[static_cast<size_t>(task.tmpl)]
                               << " ---\n"
                               << prog.describe();
        sos::CompiledSdp compiled = sos::assemble(prog);
        sdp::SdpSolution sol = sdp::solve(compiled.problem, options_.sdp);
        sos::SosSolution dec = sos::decode(prog, compiled, sol, options_.sos);
        PolicyEntry& entry = out.entry;
        entry.cell = task.cell;
        entry.tmpl = task.tmpl;
        entry.lambda.assign(basis_.size(), 0.0);
        if (!dec.accepted) {
            out.failure = EvalFailure{task.cell, task.tmpl, dec.sdp_status,
                                      "cell " + std::to_string(task.cell + 1) +
                                          ", target " +
                                          basis_.labels()[static_cast<size_t>(task.tmpl)] +
                                          ": " + dec.reject_reason};
            return;
        }
        entry.raw_value = dec.objective_value;
        entry.residual = dec.residual;
        entry.value = dec.padded_value(options_.sos.pad_factor);
        for (size_t q = 0; q < basis_.size(); ++q) {
            const std::string& name = prog.lambda_names[q];
            if (name.empty()) continue;
            entry.lambda[q] = std::max(0.0, dec.scalar_values.at(name));
        }
    };

    const bool sequential =
        options_.jobs <= 1 || options_.dump_sos != nullptr || tasks.size() <= 1;
    if (sequential) {
        for (size_t idx = 0; idx < tasks.size(); ++idx) run_task(idx);
    } else {
        std::atomic<size_t> next{0};
        unsigned nthreads = std::min<size_t>(static_cast<size_t>(options_.jobs), tasks.size());
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (size_t idx = next.fetch_add(1); idx < tasks.size();
                     idx = next.fetch_add(1))
                    run_task(idx);
            });
        for (auto& th : pool) th.join();
    }

    EvalResult result;
    result.value = init; // sup starts from the initial-set bounds
    if (init_failure_) result.failure = init_failure_;
    for (size_t idx = 0; idx < tasks.size(); ++idx) {
        Outcome& out = outcomes[idx];
        if (out.failure) {
            if (!result.failure) result.failure = out.failure;
            continue;
        }
        result.entries.push_back(std::move(out.entry));
        const PolicyEntry& e = result.entries.back();
        result.value[static_cast<size_t>(e.tmpl)] =
            std::max(result.value[static_cast<size_t>(e.tmpl)], e.value);
    }
    return result;
}

lp::LpProblem Analyzer::improvement_lp(const EvalResult& eval, const BoundVector& w) {
    if (!eval.ok()) throw Error("improvement_lp: evaluation was not successful");
    const BoundVector& init = init_bounds();
    if (!init.all_finite())
        throw Error("improvement_lp: initial-set bounds are not all finite");

    lp::LpProblem prob;
    prob.num_vars = static_cast<int>(basis_.size());
    prob.lower_bounds = Eigen::Map<const Eigen::VectorXd>(init.values.data(),
                                                          static_cast<long>(init.size()));
    for (size_t q = 0; q < basis_.size(); ++q)
        prob.var_names.push_back("v(" + basis_.labels()[q] + ")");
    for (const auto& e : eval.entries) {
        lp::LpProblem::Row row;
        row.coeffs = Eigen::VectorXd::Zero(static_cast<long>(basis_.size()));
        double constant = e.value;
        for (size_t q = 0; q < basis_.size(); ++q)
            if (e.lambda[q] != 0.0) {
                row.coeffs[static_cast<long>(q)] = e.lambda[q];
                constant -= e.lambda[q] * w[q];
            }
        row.constant = constant;
        row.target = e.tmpl;
        row.note = "cell " + std::to_string(e.cell + 1);
        prob.rows.push_back(std::move(row));
    }
    return prob;
}

IterationTrace Analyzer::iterate(const BoundVector& w0) {
    IterationTrace trace;
    BoundVector w = w0;
    int improvements = 0;
    bool first = true;
    for (;;) {
        auto started = std::chrono::steady_clock::now();
        EvalResult ev = eval_relaxed(w);
        IterationRecord rec;
        rec.w = w;
        rec.fw = ev.value;
        rec.policy = ev.entries;
        const auto stamp = [&] {
            rec.wall_seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
        };
        if (!ev.ok()) {
            rec.distance = kInf;
            stamp();
            trace.records.push_back(std::move(rec));
            trace.termination = Termination::SolEmpty;
            trace.note = ev.failure->reason;
            break;
        }
        if (first && !ev.value.leq(w, options_.post_tol)) {
            for (size_t q = 0; q < basis_.size(); ++q)
                if (w[q] != kInf && ev.value[q] > w[q] + options_.post_tol)
                    throw Error("initial bounds are not a post-fixpoint: component " +
                                basis_.labels()[q] + " maps to " +
                                std::to_string(ev.value[q]) + " > " +
                                std::to_string(w[q]));
        }
        first = false;
        rec.distance = ev.value.inf_distance(w);
        log_info("iteration " + std::to_string(trace.records.size()) +
                 ": |F(w) - w| = " + std::to_string(rec.distance));
        if (rec.distance <= options_.fix_tol) {
            stamp();
            trace.records.push_back(std::move(rec));
            trace.termination = Termination::Fixpoint;
            break;
        }
        if (improvements >= options_.max_improvements) {
            stamp();
            trace.records.push_back(std::move(rec));
            trace.termination = Termination::MaxIter;
            break;
        }
        lp::LpProblem lpp = improvement_lp(ev, w);
        if (options_.dump_lp)
            *options_.dump_lp << "--- improvement lp, iteration "
                              << trace.records.size() << " ---\n"
                              << lp::dump(lpp);
        lp::LpResult lps = lp::solve(lpp);
        if (lps.status != lp::LpStatus::Optimal) {
            rec.lp = std::move(lpp);
            stamp();
            trace.records.push_back(std::move(rec));
            trace.termination = Termination::LpFailure;
            trace.note = lps.status == lp::LpStatus::Unbounded
                             ? "improvement lp unbounded"
                             : "improvement lp infeasible";
            break;
        }
        BoundVector next(std::vector<double>(lps.v.data(), lps.v.data() + lps.v.size()));
        rec.lp = std::move(lpp);
        rec.lp_solution = next;
        stamp();
        trace.records.push_back(std::move(rec));
        w = std::move(next);
        ++improvements;
    }
    trace.final_bounds = w;
    trace.improvements = improvements;
    return trace;
}

Analyzer::CheckReport Analyzer::check_inductive(const BoundVector& w) {
    CheckReport report;
    report.eval = eval_relaxed(w);
    if (!report.eval.ok()) {
        report.inconclusive = true;
        report.note = report.eval.failure->reason;
        return report;
    }
    report.holds = true;
    for (size_t q = 0; q < basis_.size(); ++q) {
        if (w[q] == kInf) continue;
        if (report.eval.value[q] > w[q] + options_.post_tol) {
            report.holds = false;
            report.violations.push_back(q);
        }
    }
    if (!report.holds) report.note = "relaxed one-step bound exceeds the candidate";
    return report;
}

SynthesisResult synthesize_template(const semialg::PpsSystem& system,
                                    const AnalysisOptions& options) {
    SynthesisResult result;
    sos::SosProgram prog =
        sos::synthesis_program(system, options.half_degree, options.sos);
    if (options.dump_sos)
        *options.dump_sos << "--- template synthesis program ---\n" << prog.describe();
    sos::CompiledSdp compiled = sos::assemble(prog);
    sdp::SdpSolution sol = sdp::solve(compiled.problem, options.sdp);
    sos::SosSolution dec = sos::decode(prog, compiled, sol, options.sos);
    result.sdp_status = dec.sdp_status;
    result.residual = dec.residual;
    if (!dec.accepted) {
        result.reason = "no template of degree " +
                        std::to_string(2 * options.half_degree) +
                        " certifies boundedness (" + dec.reject_reason + ")";
        return result;
    }
    result.p = sos::synthesized_template(prog, dec);
    result.w_value = dec.scalar_values.at("w") + dec.residual * options.sos.pad_factor;
    result.basis = TemplateBasis::squares_plus(system.dimension, result.p);
    result.w0 = BoundVector::constant(result.basis.size(), result.w_value);
    if (result.basis.size() == static_cast<size_t>(system.dimension) + 1)
        result.w0[result.basis.size() - 1] = 0.0; // the synthesized template row
    log_info("synthesized template with w = " + std::to_string(result.w_value));

    // Validate the candidate as a numerical post-fixpoint of the relaxation.
    Analyzer analyzer(system, result.basis, options);
    EvalResult ev = analyzer.eval_relaxed(result.w0);
    if (!ev.ok()) {
        // The certificates from the synthesis step still stand; only the
        // independent re-check was inconclusive.
        result.success = true;
        result.validated = false;
        result.validation_note = "post-fixpoint re-check inconclusive: " + ev.failure->reason;
        return result;
    }
    if (!ev.value.leq(result.w0, options.post_tol)) {
        std::ostringstream msg;
        msg << "synthesized bounds failed post-fixpoint validation:";
        for (size_t q = 0; q < result.basis.size(); ++q)
            if (ev.value[q] > result.w0[q] + options.post_tol)
                msg << " " << result.basis.labels()[q] << " " << ev.value[q] << " > "
                    << result.w0[q];
        result.reason = msg.str();
        return result;
    }
    result.success = true;
    result.validated = true;
    return result;
}

semialg::SemiAlgSet sublevel_set(const TemplateBasis& basis, const BoundVector& w) {
    if (w.size() != basis.size())
        throw DimensionError("bound vector does not match the template basis");
    semialg::SemiAlgSet set(basis.dimension());
    for (size_t q = 0; q < basis.size(); ++q) {
        if (!std::isfinite(w[q])) continue;
        set.add({basis[q] - poly::Polynomial::constant(basis.dimension(), w[q]),
                 semialg::Cmp::Le});
    }
    return set;
}

} // namespace pps::analysis
