// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pps/poly.hpp"
#include "pps/semialg.hpp"

namespace pps::frontend {

struct SourcePos {
    int line = 1;
    int col = 1;
};

// A guard atom normalized to r < 0 or r <= 0.
struct GuardAtom {
    poly::Polynomial r;
    semialg::Cmp cmp = semialg::Cmp::Le;
    SourcePos pos;

    bool operator==(const GuardAtom& o) const { return r == o.r && cmp == o.cmp; }
};

struct CaseBlock {
    std::vector<GuardAtom> guard;
    std::vector<poly::Polynomial> update; // one polynomial per declared variable
    SourcePos pos;

    bool operator==(const CaseBlock& o) const {
        return guard == o.guard && update == o.update;
    }
};

// One-loop switch-case program:
//   init <vars> in box([a,b], ...) | in semialg{ r <= 0; ... };
//   while (<conj> | true) { case (<conj>): x = <poly>; ... }
// with <conj> a list of `and`-separated comparisons between polynomials.
struct ProgramAst {
    std::vector<std::string> variables;
    std::optional<semialg::Box> init_box;  // set when the init set was a box
    std::vector<GuardAtom> init;           // always populated (boxes lowered)
    std::vector<GuardAtom> loop_guard;     // empty means `while (true)`
    std::vector<CaseBlock> cases;
    std::vector<std::string> warnings;     // e.g. duplicate case guards

    bool operator==(const ProgramAst& o) const {
        return variables == o.variables && init_box == o.init_box && init == o.init &&
               loop_guard == o.loop_guard && cases == o.cases;
    }
};

// Parse program text; throws ParseError with line/column on malformed input.
ProgramAst parse_program(std::string_view text);

// Canonical source rendering; parse(pretty_print(ast)) == ast.
std::string pretty_print(const ProgramAst& ast);

// Build the switched-system view: initial set from the init block, stay set
// from the loop condition, one partition cell and update map per case.
semialg::PpsSystem lower(const ProgramAst& ast);

// Convenience: read, parse and lower a .pps file.
semialg::PpsSystem load_system(const std::string& path);
std::string read_file(const std::string& path);

} // namespace pps::frontend
