// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: parse | synth | analyze | check | simulate |
// export-sdpa | report.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "pps/analysis.hpp"
#include "pps/common.hpp"
#include "pps/frontend.hpp"
#include "pps/json_io.hpp"
#include "pps/lp.hpp"
#include "pps/sdp.hpp"
#include "pps/sim.hpp"
#include "pps/sos.hpp"

namespace {

using namespace pps;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitSolEmpty = 2;
constexpr int kExitNoInvariant = 3;

std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::string fmt_fixed(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// Solver- and degree-related flags shared by the analysis verbs.
struct SolverFlags {
    int degree = 6; // template degree cap 2m
    std::string caps = "template";
    double fix_tol = 1e-6;
    int max_iter = 10;
    double post_tol = 1e-6;
    double residual_tol = 1e-6;
    double psd_tol = 1e-7;
    double pad = 1.0;
    double sdp_tol = 1e-8;
    int sdp_max_iter = 200;
    int sdp_dim_cap = 200;
    int sdp_cons_cap = 2000;
    int jobs = 1;
    bool dump_sos = false;
    bool dump_lp = false;

    void attach(CLI::App* cmd, bool iteration_flags) {
        cmd->add_option("--degree", degree,
                        "template degree cap 2m (even, default 6)")
            ->check(CLI::Range(2, 64));
        cmd->add_option("--caps", caps,
                        "multiplier degree caps: 'template' (tight, default) or "
                        "'scaled' (2m*deg T)")
            ->check(CLI::IsMember({"template", "scaled"}));
        if (iteration_flags) {
            cmd->add_option("--tol", fix_tol, "fixpoint stopping tolerance (1e-6)");
            cmd->add_option("--max-iter", max_iter,
                            "maximum bound improvements (10)");
            cmd->add_option("--post-tol", post_tol,
                            "post-fixpoint validation slack (1e-6)");
        }
        cmd->add_option("--residual-tol", residual_tol,
                        "certificate residual acceptance tolerance (1e-6)");
        cmd->add_option("--psd-tol", psd_tol,
                        "Gram eigenvalue acceptance tolerance (1e-7)");
        cmd->add_option("--pad", pad, "bound padding factor on the residual (1)");
        cmd->add_option("--sdp-tol", sdp_tol, "SDP duality-gap tolerance (1e-8)");
        cmd->add_option("--sdp-maxiter", sdp_max_iter, "SDP iteration cap (200)");
        cmd->add_option("--sdp-dim-cap", sdp_dim_cap,
                        "total SDP block-dimension cap (200)");
        cmd->add_option("--sdp-cons-cap", sdp_cons_cap,
                        "SDP constraint-count cap (2000)");
        cmd->add_option("--jobs", jobs, "concurrent SDP solves (1)")
            ->check(CLI::Range(1, 256));
    }

    analysis::AnalysisOptions to_options() const {
        if (degree % 2 != 0)
            throw Error("--degree must be even (it is the cap 2m)");
        analysis::AnalysisOptions opt;
        opt.half_degree = degree / 2;
        opt.sos.cap_mode = caps == "scaled" ? sos::CapMode::ScaledByUpdate
                                            : sos::CapMode::TemplateDegree;
        opt.sos.residual_tol = residual_tol;
        opt.sos.psd_tol = psd_tol;
        opt.sos.pad_factor = pad;
        opt.sdp.tol = sdp_tol;
        opt.sdp.max_iter = sdp_max_iter;
        opt.sdp.dim_cap = sdp_dim_cap;
        opt.sdp.cons_cap = sdp_cons_cap;
        opt.fix_tol = fix_tol;
        opt.post_tol = post_tol;
        opt.max_improvements = max_iter;
        opt.jobs = jobs;
        if (dump_sos) opt.dump_sos = &std::cout;
        if (dump_lp) opt.dump_lp = &std::cout;
        return opt;
    }
};

std::string sanitize(const std::string& label) {
    std::string out;
    for (char c : label)
        if (std::isalnum(static_cast<unsigned char>(c))) out += c;
    return out;
}

void print_bounds(const analysis::TemplateBasis& basis, const analysis::BoundVector& w) {
    for (size_t q = 0; q < basis.size(); ++q)
        std::cout << "  " << basis.labels()[q] << " <= " << fmt(w[q], 10) << "\n";
}

int cmd_parse(const std::string& file, const std::string& emit_json,
              int partition_samples, uint64_t seed) {
    frontend::ProgramAst ast = frontend::parse_program(frontend::read_file(file));
    for (const auto& w : ast.warnings) std::cerr << "warning: " << w << "\n";
    semialg::PpsSystem sys = frontend::lower(ast);
    std::cout << frontend::pretty_print(ast);
    if (partition_samples > 0 && sys.init_box) {
        // Sample a box inflated around the initial one to probe cell coverage.
        semialg::Box probe = *sys.init_box;
        for (auto& [a, b] : probe.ranges) {
            double r = 3.0 * std::max({std::abs(a), std::abs(b), 1.0});
            a = -r;
            b = r;
        }
        auto report = semialg::validate_partition(sys.partition, probe,
                                                  partition_samples, seed);
        if (!report.clean()) {
            std::cerr << "partition probe: " << report.uncovered << " uncovered, "
                      << report.overlapped << " overlapped of " << report.samples
                      << " samples\n";
            for (const auto& pt : report.witnesses) {
                std::string s;
                for (double v : pt) s += (s.empty() ? "" : ", ") + fmt(v);
                std::cerr << "  witness: (" << s << ")\n";
            }
        } else {
            std::cerr << "partition probe: clean over " << report.samples
                      << " samples\n";
        }
    }
    if (!emit_json.empty())
        io::write_text_file(emit_json, io::system_to_json(sys).dump(2) + "\n");
    return kExitOk;
}

int cmd_synth(const std::string& file, const SolverFlags& flags,
              const std::string& emit_json) {
    semialg::PpsSystem sys = frontend::load_system(file);
    analysis::AnalysisOptions opt = flags.to_options();
    analysis::SynthesisResult synth = analysis::synthesize_template(sys, opt);
    if (!synth.success) {
        std::cout << "No good invariant\n";
        std::cerr << synth.reason << "\n";
        return kExitNoInvariant;
    }
    std::vector<std::string> names = sys.display_names();
    std::cout << "w = " << fmt(synth.w_value, 10) << "\n";
    std::cout << "template p = " << synth.p.to_string(6, names) << "\n";
    if (!synth.validated) std::cerr << synth.validation_note << "\n";
    if (!emit_json.empty()) {
        io::json j;
        j["w"] = synth.w_value;
        j["residual"] = synth.residual;
        j["validated"] = synth.validated;
        j["template"] = synth.p.to_string(17, names);
        j["bounds"] = io::bounds_to_json(synth.basis, synth.w0, names);
        io::write_text_file(emit_json, j.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_analyze(const std::string& file, const SolverFlags& flags,
                const std::string& emit_trace, const std::string& bounds_out,
                bool trace_times) {
    semialg::PpsSystem sys = frontend::load_system(file);
    analysis::AnalysisOptions opt = flags.to_options();
    std::cerr << "analyzing " << file << " (" << sys.dimension << " variables, "
              << sys.cell_count() << " cells) at degree " << flags.degree << "\n";

    analysis::SynthesisResult synth = analysis::synthesize_template(sys, opt);
    if (!synth.success) {
        std::cout << "No good invariant\n";
        std::cerr << synth.reason << "\n";
        return kExitNoInvariant;
    }
    std::cerr << "synthesized template, w = " << fmt(synth.w_value, 10)
              << (synth.validated ? " (validated)" : " (validation inconclusive)")
              << "\n";

    analysis::Analyzer analyzer(sys, synth.basis, opt);
    analysis::IterationTrace trace = analyzer.iterate(synth.w0);

    std::vector<std::string> names = sys.display_names();
    std::cout << "termination: " << analysis::to_string(trace.termination) << " after "
              << trace.improvements << " improvement"
              << (trace.improvements == 1 ? "" : "s") << "\n";
    if (!trace.note.empty()) std::cerr << trace.note << "\n";
    std::cout << "bounds:\n";
    print_bounds(synth.basis, trace.final_bounds);

    if (!emit_trace.empty())
        io::write_text_file(
            emit_trace,
            io::trace_to_json(trace, synth.basis, names, flags.degree, trace_times)
                    .dump(2) +
                "\n");
    if (!bounds_out.empty())
        io::write_text_file(
            bounds_out,
            io::bounds_to_json(synth.basis, trace.final_bounds, names).dump(2) + "\n");

    switch (trace.termination) {
    case analysis::Termination::Fixpoint:
    case analysis::Termination::MaxIter:
        return kExitOk; // sound bounds either way
    case analysis::Termination::SolEmpty:
    case analysis::Termination::LpFailure:
        return kExitSolEmpty; // early return; last bounds remain sound
    }
    return kExitError;
}

int cmd_check(const std::string& file, const std::string& bounds_path,
              SolverFlags flags, bool degree_given) {
    semialg::PpsSystem sys = frontend::load_system(file);
    io::json j = io::json::parse(frontend::read_file(bounds_path));
    auto [basis, w] = io::bounds_from_json(j);
    if (!degree_given)
        flags.degree = std::max(2, (basis.max_degree() + 1) / 2 * 2);
    analysis::AnalysisOptions opt = flags.to_options();
    analysis::Analyzer analyzer(sys, basis, opt);
    analysis::Analyzer::CheckReport report = analyzer.check_inductive(w);
    if (report.inconclusive) {
        std::cout << "inconclusive\n";
        std::cerr << report.note << "\n";
        return kExitSolEmpty;
    }
    if (report.holds) {
        std::cout << "inductive\n";
        return kExitOk;
    }
    std::cout << "not inductive\n";
    for (size_t q : report.violations)
        std::cerr << "  " << basis.labels()[q] << ": F(w) = " << fmt(report.eval.value[q], 10)
                  << " > " << fmt(w[q], 10) << "\n";
    return kExitNoInvariant;
}

int cmd_simulate(const std::string& file, int traj, int steps, uint64_t seed,
                 const std::string& csv_out, const std::string& svg_out,
                 const std::string& bounds_path, const std::vector<double>& box_values,
                 int resolution) {
    semialg::PpsSystem sys = frontend::load_system(file);
    sim::SimOptions opt;
    opt.trajectories = traj;
    opt.steps = steps;
    opt.seed = seed;
    if (!box_values.empty()) {
        if (box_values.size() != static_cast<size_t>(2 * sys.dimension))
            throw Error("--box needs 2*dimension numbers (lo hi per variable)");
        semialg::Box box;
        for (int v = 0; v < sys.dimension; ++v)
            box.ranges.emplace_back(box_values[2 * static_cast<size_t>(v)],
                                    box_values[2 * static_cast<size_t>(v) + 1]);
        opt.box = box;
    }
    auto trajectories = sim::simulate(sys, opt);
    size_t total = 0;
    for (const auto& t : trajectories) total += t.points.size();
    std::cerr << trajectories.size() << " trajectories, " << total << " states\n";

    std::vector<std::string> names = sys.display_names();
    std::string csv = sim::to_csv(trajectories, names);
    if (csv_out.empty() && svg_out.empty()) {
        std::cout << csv;
        return kExitOk;
    }
    if (!csv_out.empty()) io::write_text_file(csv_out, csv);
    if (!svg_out.empty()) {
        analysis::TemplateBasis basis{std::vector<poly::Polynomial>{}};
        analysis::BoundVector w;
        if (!bounds_path.empty()) {
            io::json j = io::json::parse(frontend::read_file(bounds_path));
            std::tie(basis, w) = io::bounds_from_json(j);
        }
        io::write_text_file(svg_out, sim::to_svg(trajectories, basis, w, resolution));
    }
    return kExitOk;
}

int cmd_export(const std::string& file, const SolverFlags& flags,
               const std::string& out_dir) {
    semialg::PpsSystem sys = frontend::load_system(file);
    analysis::AnalysisOptions opt = flags.to_options();
    std::filesystem::create_directories(out_dir);
    const auto emit = [&](const std::string& name, const sdp::SdpProblem& problem) {
        std::string path = (std::filesystem::path(out_dir) / name).string();
        io::write_text_file(path, sdp::export_sdpa(problem));
        std::cout << path << ": " << problem.rhs.size() << " constraints, dim "
                  << problem.total_dim() << "\n";
    };

    sos::SosProgram synth_prog =
        sos::synthesis_program(sys, opt.half_degree, opt.sos);
    sos::CompiledSdp synth_sdp = sos::assemble(synth_prog);
    emit("synthesis.dat-s", synth_sdp.problem);

    // Pick the bound vector for the evaluation problems: the synthesized one
    // when available, otherwise all-ones over the coordinate squares.
    analysis::TemplateBasis basis = analysis::TemplateBasis::squares(sys.dimension);
    analysis::BoundVector w = analysis::BoundVector::constant(basis.size(), 1.0);
    sdp::SdpSolution sol = sdp::solve(synth_sdp.problem, opt.sdp);
    sos::SosSolution dec = sos::decode(synth_prog, synth_sdp, sol, opt.sos);
    if (dec.accepted) {
        poly::Polynomial p = sos::synthesized_template(synth_prog, dec);
        basis = analysis::TemplateBasis::squares_plus(sys.dimension, p);
        w = analysis::BoundVector::constant(basis.size(), dec.scalar_values.at("w"));
        if (basis.size() == static_cast<size_t>(sys.dimension) + 1)
            w[basis.size() - 1] = 0.0;
    } else {
        std::cerr << "synthesis not usable (" << dec.reject_reason
                  << "); exporting evaluation problems over coordinate squares at w = 1\n";
    }

    for (size_t q = 0; q < basis.size(); ++q) {
        sos::SosProgram prog =
            sos::init_sup_program(sys, basis[q], opt.half_degree, opt.sos);
        emit("init_" + std::to_string(q) + "_" + sanitize(basis.labels()[q]) + ".dat-s",
             sos::assemble(prog).problem);
    }
    for (size_t i = 0; i < sys.cell_count(); ++i)
        for (size_t q = 0; q < basis.size(); ++q) {
            sos::SosProgram prog = sos::relaxed_cell_program(
                sys, static_cast<int>(i), basis.polys(), static_cast<int>(q),
                std::span<const double>(w.values), opt.half_degree, opt.sos);
            emit("cell" + std::to_string(i + 1) + "_" + std::to_string(q) + "_" +
                     sanitize(basis.labels()[q]) + ".dat-s",
                 sos::assemble(prog).problem);
        }
    return kExitOk;
}

int cmd_report(const std::string& trace_path) {
    io::json j = io::json::parse(frontend::read_file(trace_path));
    std::vector<std::string> labels = j.at("labels").get<std::vector<std::string>>();
    std::vector<double> bounds;
    for (const auto& v : j.at("final_bounds")) bounds.push_back(io::number_from_json(v));
    std::string termination = j.at("termination").get<std::string>();
    int degree = j.at("degree").get<int>();
    int improvements = j.at("improvements").get<int>();

    std::string row = "bounds [";
    bool first = true;
    for (size_t q = 0; q < labels.size(); ++q) {
        // The table rows list the coordinate-square bounds.
        if (labels[q].rfind("x", 0) != 0) continue;
        if (!first) row += ", ";
        row += fmt_fixed(bounds[q]);
        first = false;
    }
    row += "], degree " + std::to_string(degree) + ", " + std::to_string(improvements) +
           " it.";
    if (termination != "fixpoint") row += " (termination: " + termination + ")";
    std::cout << row << "\n";
    for (size_t q = 0; q < labels.size(); ++q)
        std::cout << "  " << labels[q] << " <= " << fmt(bounds[q], 10) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bound certification for piecewise polynomial loops"};
    app.require_subcommand(1);

    // parse
    auto* parse_cmd = app.add_subcommand("parse", "parse a .pps program and echo it");
    std::string parse_file, parse_json;
    int parse_samples = 1000;
    uint64_t parse_seed = 1;
    parse_cmd->add_option("file", parse_file, "program file")->required();
    parse_cmd->add_option("--emit-json", parse_json, "write the lowered system as JSON");
    parse_cmd->add_option("--check-partition", parse_samples,
                          "random samples for the cell-coverage probe (0 = off)");
    parse_cmd->add_option("--seed", parse_seed, "probe RNG seed");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "synthesize a template invariant");
    std::string synth_file, synth_json;
    SolverFlags synth_flags;
    synth_cmd->add_option("file", synth_file, "program file")->required();
    synth_flags.attach(synth_cmd, false);
    synth_cmd->add_flag("--dump-sos", synth_flags.dump_sos, "print the SOS programs");
    synth_cmd->add_option("--emit-json", synth_json, "write template and bounds as JSON");

    // analyze
    auto* analyze_cmd =
        app.add_subcommand("analyze", "synthesize, then tighten by policy iteration");
    std::string analyze_file, analyze_trace, analyze_bounds;
    bool analyze_times = false;
    SolverFlags analyze_flags;
    analyze_cmd->add_option("file", analyze_file, "program file")->required();
    analyze_flags.attach(analyze_cmd, true);
    analyze_cmd->add_flag("--dump-sos", analyze_flags.dump_sos, "print the SOS programs");
    analyze_cmd->add_flag("--dump-lp", analyze_flags.dump_lp,
                          "print each improvement LP");
    analyze_cmd->add_option("--emit-json", analyze_trace, "write the iteration trace");
    analyze_cmd->add_option("--bounds-out", analyze_bounds, "write the final bounds");
    analyze_cmd->add_flag("--trace-times", analyze_times,
                          "include wall-clock seconds in the trace JSON");

    // check
    auto* check_cmd = app.add_subcommand("check", "check bounds for inductiveness");
    std::string check_file, check_bounds;
    SolverFlags check_flags;
    check_cmd->add_option("file", check_file, "program file")->required();
    auto* check_bounds_opt =
        check_cmd->add_option("--bounds", check_bounds, "bounds JSON")->required();
    (void)check_bounds_opt;
    check_flags.attach(check_cmd, true);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "sample trajectories");
    std::string sim_file, sim_csv, sim_svg, sim_bounds;
    int sim_traj = 10, sim_steps = 100, sim_res = 160;
    uint64_t sim_seed = 0;
    std::vector<double> sim_box;
    sim_cmd->add_option("file", sim_file, "program file")->required();
    sim_cmd->add_option("--traj", sim_traj, "number of trajectories (10)");
    sim_cmd->add_option("--steps", sim_steps, "steps per trajectory (100)");
    sim_cmd->add_option("--seed", sim_seed, "RNG seed (0)");
    sim_cmd->add_option("--csv", sim_csv, "CSV output path (default stdout)");
    sim_cmd->add_option("--svg", sim_svg, "SVG output path (2-D systems)");
    sim_cmd->add_option("--bounds", sim_bounds, "bounds JSON to overlay in the SVG");
    sim_cmd->add_option("--box", sim_box,
                        "sampling box lo hi per variable (default: init box)");
    sim_cmd->add_option("--resolution", sim_res, "contour grid resolution (160)");

    // export-sdpa
    auto* export_cmd =
        app.add_subcommand("export-sdpa", "write the compiled SDPs in SDPA format");
    std::string export_file, export_dir = "sdpa-out";
    SolverFlags export_flags;
    export_cmd->add_option("file", export_file, "program file")->required();
    export_cmd->add_option("-o,--out", export_dir, "output directory (sdpa-out)");
    export_flags.attach(export_cmd, false);

    // report
    auto* report_cmd = app.add_subcommand("report", "summarize an iteration trace");
    std::string report_file;
    report_cmd->add_option("trace", report_file, "trace JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*parse_cmd) return cmd_parse(parse_file, parse_json, parse_samples, parse_seed);
        if (*synth_cmd) return cmd_synth(synth_file, synth_flags, synth_json);
        if (*analyze_cmd)
            return cmd_analyze(analyze_file, analyze_flags, analyze_trace,
                               analyze_bounds, analyze_times);
        if (*check_cmd)
            return cmd_check(check_file, check_bounds, check_flags,
                             check_cmd->count("--degree") > 0);
        if (*sim_cmd)
            return cmd_simulate(sim_file, sim_traj, sim_steps, sim_seed, sim_csv,
                                sim_svg, sim_bounds, sim_box, sim_res);
        if (*export_cmd) return cmd_export(export_file, export_flags, export_dir);
        if (*report_cmd) return cmd_report(report_file);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << " (line " << e.line << ", column "
                  << e.col << ")\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
