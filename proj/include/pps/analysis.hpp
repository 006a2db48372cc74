// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pps/lp.hpp"
#include "pps/poly.hpp"
#include "pps/sdp.hpp"
#include "pps/semialg.hpp"
#include "pps/sos.hpp"

namespace pps::analysis {

// The finite family of template polynomials whose bounds are tracked.
class TemplateBasis {
public:
    explicit TemplateBasis(std::vector<poly::Polynomial> templates);

    // {x1^2, ..., xd^2}.
    static TemplateBasis squares(int dimension);
    // {x1^2, ..., xd^2, extra}; a duplicate extra is dropped.
    static TemplateBasis squares_plus(int dimension, const poly::Polynomial& extra);

    size_t size() const { return templates_.size(); }
    int dimension() const { return dimension_; }
    const poly::Polynomial& operator[](size_t i) const { return templates_[i]; }
    const std::vector<poly::Polynomial>& polys() const { return templates_; }
    // Display labels: coordinate squares render as "x1^2", anything else as
    // "p1", "p2", ... in order of appearance.
    const std::vector<std::string>& labels() const { return labels_; }
    int max_degree() const;

private:
    int dimension_;
    std::vector<poly::Polynomial> templates_;
    std::vector<std::string> labels_;
};

// A bound per template; +infinity means unbounded/untracked.
struct BoundVector {
    std::vector<double> values;

    BoundVector() = default;
    explicit BoundVector(std::vector<double> v) : values(std::move(v)) {}
    static BoundVector constant(size_t n, double v);
    static BoundVector top(size_t n);

    size_t size() const { return values.size(); }
    double operator[](size_t i) const { return values[i]; }
    double& operator[](size_t i) { return values[i]; }
    bool all_finite() const;
    // max_i |a_i - b_i| with inf - inf treated as 0.
    double inf_distance(const BoundVector& other) const;
    // this <= other + slack componentwise (anything <= +inf).
    bool leq(const BoundVector& other, double slack = 0.0) const;
};

// One relaxed one-step bound together with the multipliers that witness it;
// lambda defines the affine policy map phi(v) = lambda . v + (value -
// lambda . w_at_solve).
struct PolicyEntry {
    int cell = 0;
    int tmpl = 0;
    double value = 0.0;     // residual-padded bound
    double raw_value = 0.0; // objective as decoded
    double residual = 0.0;
    std::vector<double> lambda; // one weight per template, 0 where dropped

    double phi(const BoundVector& v, const BoundVector& w_at_solve) const;
};

struct EvalFailure {
    int cell = 0; // -1 for the initial-set bound
    int tmpl = 0;
    sdp::SdpStatus status = sdp::SdpStatus::MaxIter;
    std::string reason;
};

// F-relaxed applied to one bound vector: per-template values (sup over cells
// and the initial set) plus the witnessing policy entries.
struct EvalResult {
    BoundVector value;
    std::vector<PolicyEntry> entries;
    std::optional<EvalFailure> failure;
    bool ok() const { return !failure.has_value(); }
};

enum class Termination { Fixpoint, SolEmpty, MaxIter, LpFailure };
std::string to_string(Termination t);

struct IterationRecord {
    BoundVector w;           // bounds entering this iteration
    BoundVector fw;          // relaxed F applied to w
    double distance = 0.0;   // inf-distance between the two
    std::vector<PolicyEntry> policy; // witnesses behind fw
    std::optional<lp::LpProblem> lp; // improvement LP, when one was solved
    BoundVector lp_solution;         // next bounds (empty when iteration stopped)
    double wall_seconds = 0.0;
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    Termination termination = Termination::Fixpoint;
    BoundVector final_bounds;
    int improvements = 0;
    std::string note; // failure detail for SolEmpty / LpFailure
};

struct AnalysisOptions {
    int half_degree = 3; // m; template degrees are capped by 2m
    sos::SosOptions sos;
    sdp::SdpOptions sdp;
    double fix_tol = 1e-6;  // fixpoint stopping distance
    double post_tol = 1e-6; // post-fixpoint validation slack
    int max_improvements = 10;
    int jobs = 1;
    // Debug dumps; with jobs > 1 dumping forces sequential evaluation so the
    // output stays ordered.
    std::ostream* dump_sos = nullptr;
    std::ostream* dump_lp = nullptr;
};

class Analyzer {
public:
    Analyzer(semialg::PpsSystem system, TemplateBasis basis, AnalysisOptions options);

    const semialg::PpsSystem& system() const { return system_; }
    const TemplateBasis& basis() const { return basis_; }
    const AnalysisOptions& options() const { return options_; }

    // Relaxed sup of each template over the initial set (residual-padded);
    // computed once and cached.
    const BoundVector& init_bounds();

    // One application of the relaxed one-step operator.
    EvalResult eval_relaxed(const BoundVector& w);

    // The bound-improvement linear program for a successful evaluation.
    lp::LpProblem improvement_lp(const EvalResult& eval, const BoundVector& w);

    // Min-policy iteration from a post-fixpoint w0.  Refuses (throws) when w0
    // demonstrably fails the post-fixpoint property.
    IterationTrace iterate(const BoundVector& w0);

    struct CheckReport {
        bool holds = false;
        bool inconclusive = false;
        std::string note;
        EvalResult eval;
        std::vector<size_t> violations; // template indices with fw > w + tol
    };
    // Is w a numerical post-fixpoint of the relaxed operator?
    CheckReport check_inductive(const BoundVector& w);

private:
    semialg::PpsSystem system_;
    TemplateBasis basis_;
    AnalysisOptions options_;
    std::optional<BoundVector> init_bounds_;
    std::optional<EvalFailure> init_failure_;
};

// Joint template synthesis: find p and w with {x^2 <= w} ∪ {p <= 0} inductive.
struct SynthesisResult {
    bool success = false;
    std::string reason; // set when success is false
    poly::Polynomial p;
    double w_value = 0.0;
    double residual = 0.0;
    sdp::SdpStatus sdp_status = sdp::SdpStatus::MaxIter;
    TemplateBasis basis{std::vector<poly::Polynomial>{}};
    BoundVector w0;
    bool validated = false; // post-fixpoint confirmed by eval_relaxed
    std::string validation_note;
};

SynthesisResult synthesize_template(const semialg::PpsSystem& system,
                                    const AnalysisOptions& options);

// {x | p(x) <= w(p) for every template}, as a semi-algebraic set (templates
// with w = +inf contribute nothing).
semialg::SemiAlgSet sublevel_set(const TemplateBasis& basis, const BoundVector& w);

} // namespace pps::analysis
