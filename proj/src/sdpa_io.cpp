// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Sparse SDPA (".dat-s") writer/reader for SdpProblem.  The header is the
// standard four lines (constraint count, block count, signed block sizes,
// right-hand-side vector) followed by one "matno block i j value" entry per
// line with 1-based upper-triangular indices; matrix 0 is the objective C.
#include "pps/sdp.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <vector>

namespace pps::sdp {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<SdpProblem::Entry> sorted(std::vector<SdpProblem::Entry> entries) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return std::tie(a.block, a.row, a.col) < std::tie(b.block, b.row, b.col);
    });
    return entries;
}

class TokenReader {
public:
    explicit TokenReader(std::string_view text) : text_(text) {}

    // Returns the next whitespace/punctuation-delimited token, skipping
    // comment lines (leading '*' or '"').
    bool next(std::string& out) {
        for (;;) {
            skip_separators();
            if (pos_ >= text_.size()) return false;
            if (at_line_start_ && (text_[pos_] == '*' || text_[pos_] == '"')) {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
                continue;
            }
            break;
        }
        size_t start = pos_;
        while (pos_ < text_.size() && !is_separator(text_[pos_])) ++pos_;
        at_line_start_ = false;
        out.assign(text_.substr(start, pos_ - start));
        return true;
    }

    // Discards everything up to the end of the current line (header lines
    // may carry annotations such as "=mdim" after the leading integer).
    void skip_line() {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        if (pos_ < text_.size()) ++pos_;
        at_line_start_ = true;
    }

private:
    static bool is_separator(char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '{' ||
               c == '}' || c == '(' || c == ')';
    }
    void skip_separators() {
        while (pos_ < text_.size() && is_separator(text_[pos_])) {
            if (text_[pos_] == '\n') at_line_start_ = true;
            ++pos_;
        }
    }
    std::string_view text_;
    size_t pos_ = 0;
    bool at_line_start_ = true;
};

long parse_long(const std::string& tok, const char* what) {
    try {
        size_t used = 0;
        long v = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::logic_error&) {
        throw Error(std::string("parse_sdpa: malformed ") + what + " '" + tok + "'");
    }
}

double parse_double(const std::string& tok, const char* what) {
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::logic_error&) {
        throw Error(std::string("parse_sdpa: malformed ") + what + " '" + tok + "'");
    }
}

} // namespace

std::string export_sdpa(const SdpProblem& problem) {
    problem.validate();
    std::ostringstream os;
    os << problem.num_constraints() << "\n";
    os << problem.num_blocks() << "\n";
    for (int i = 0; i < problem.num_blocks(); ++i)
        os << (i ? " " : "") << problem.blocks[static_cast<size_t>(i)];
    os << "\n";
    for (Eigen::Index i = 0; i < problem.rhs.size(); ++i)
        os << (i ? " " : "") << fmt17(problem.rhs(i));
    os << "\n";
    auto emit = [&os](int matno, const std::vector<SdpProblem::Entry>& entries) {
        for (const auto& e : sorted(entries)) {
            if (e.value == 0.0) continue;
            os << matno << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1
               << " " << fmt17(e.value) << "\n";
        }
    };
    emit(0, problem.objective);
    for (int k = 0; k < problem.num_constraints(); ++k)
        emit(k + 1, problem.constraints[static_cast<size_t>(k)]);
    return os.str();
}

SdpProblem parse_sdpa(std::string_view text) {
    TokenReader reader(text);
    std::string tok;
    auto need = [&](const char* what) {
        if (!reader.next(tok)) throw Error(std::string("parse_sdpa: missing ") + what);
        return tok;
    };

    SdpProblem problem;
    long m = parse_long(need("constraint count"), "constraint count");
    reader.skip_line();
    long nblocks = parse_long(need("block count"), "block count");
    reader.skip_line();
    if (m < 0 || nblocks <= 0) throw Error("parse_sdpa: bad header counts");
    for (long i = 0; i < nblocks; ++i) {
        long s = parse_long(need("block size"), "block size");
        if (s == 0) throw Error("parse_sdpa: zero block size");
        problem.blocks.push_back(static_cast<int>(s));
    }
    problem.rhs.resize(m);
    for (long i = 0; i < m; ++i)
        problem.rhs(i) = parse_double(need("rhs value"), "rhs value");
    problem.constraints.assign(static_cast<size_t>(m), {});

    while (reader.next(tok)) {
        long matno = parse_long(tok, "matrix index");
        long blk = parse_long(need("block index"), "block index");
        long i = parse_long(need("row index"), "row index");
        long j = parse_long(need("column index"), "column index");
        double v = parse_double(need("entry value"), "entry value");
        if (matno < 0 || matno > m) throw Error("parse_sdpa: matrix index out of range");
        if (blk < 1 || blk > nblocks) throw Error("parse_sdpa: block index out of range");
        if (i > j) std::swap(i, j); // normalize to upper triangle
        SdpProblem::Entry e{static_cast<int>(blk - 1), static_cast<int>(i - 1),
                            static_cast<int>(j - 1), v};
        if (matno == 0) {
            problem.objective.push_back(e);
        } else {
            problem.constraints[static_cast<size_t>(matno - 1)].push_back(e);
        }
    }
    problem.validate();
    return problem;
}

} // namespace pps::sdp
