// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pps/common.hpp"

namespace pps::frontend {

namespace {

using poly::Monomial;
using poly::Polynomial;

enum class Tok { Ident, Number, Symbol, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    SourcePos pos;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }
    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_space_and_comments();
        current_.pos = {line_, col_};
        if (pos_ >= text_.size()) {
            current_ = {Tok::End, "", 0.0, {line_, col_}};
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                bump();
            current_.kind = Tok::Ident;
            current_.text = std::string(text_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t start = pos_;
            while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                            text_[pos_] == '.'))
                bump();
            // Exponent part: e/E [+-] digits, only when digits follow.
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                size_t save_pos = pos_;
                int save_line = line_, save_col = col_;
                bump();
                if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) bump();
                if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    while (pos_ < text_.size() &&
                           std::isdigit(static_cast<unsigned char>(text_[pos_])))
                        bump();
                } else {
                    pos_ = save_pos;
                    line_ = save_line;
                    col_ = save_col;
                }
            }
            current_.kind = Tok::Number;
            current_.text = std::string(text_.substr(start, pos_ - start));
            try {
                current_.number = std::stod(current_.text);
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + current_.text + "'",
                                 current_.pos.line, current_.pos.col);
            }
            return;
        }
        // Multi-character comparators.
        if ((c == '<' || c == '>') && pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
            current_ = {Tok::Symbol, std::string(1, c) + "=", 0.0, {line_, col_}};
            bump();
            bump();
            return;
        }
        static constexpr std::string_view kSingles = "+-*^(){}[],;:=<>";
        if (kSingles.find(c) != std::string_view::npos) {
            current_ = {Tok::Symbol, std::string(1, c), 0.0, {line_, col_}};
            bump();
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

    void skip_space_and_comments() {
        for (;;) {
            while (pos_ < text_.size() &&
                   std::isspace(static_cast<unsigned char>(text_[pos_])))
                bump();
            if (pos_ + 1 < text_.size() && text_[pos_] == '/' && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') bump();
                continue;
            }
            break;
        }
    }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token current_;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    ProgramAst parse() {
        ProgramAst ast;
        expect_keyword("init");
        ast.variables.push_back(expect_ident());
        while (accept_symbol(",")) ast.variables.push_back(expect_ident());
        for (size_t i = 0; i < ast.variables.size(); ++i) {
            var_index_[ast.variables[i]] = static_cast<int>(i);
            if (std::count(ast.variables.begin(), ast.variables.end(), ast.variables[i]) > 1)
                throw ParseError("duplicate variable '" + ast.variables[i] + "'",
                                 lex_.peek().pos.line, lex_.peek().pos.col);
        }
        dim_ = static_cast<int>(ast.variables.size());
        expect_keyword("in");
        if (peek_keyword("box"))
            parse_box(ast);
        else if (peek_keyword("semialg"))
            parse_semialg(ast);
        else
            fail("expected 'box' or 'semialg'");
        expect_symbol(";");

        expect_keyword("while");
        expect_symbol("(");
        if (peek_keyword("true"))
            lex_.take();
        else
            ast.loop_guard = parse_conj();
        expect_symbol(")");
        expect_symbol("{");
        while (peek_keyword("case")) ast.cases.push_back(parse_case(ast));
        expect_symbol("}");
        if (lex_.peek().kind != Tok::End) fail("trailing input after program");
        if (ast.cases.empty()) fail("program needs at least one case");

        // Duplicate-guard warning, on the normalized rendering.
        std::map<std::string, int> seen;
        for (size_t i = 0; i < ast.cases.size(); ++i) {
            std::string key = guard_text(ast.cases[i].guard);
            auto [it, fresh] = seen.emplace(key, static_cast<int>(i));
            if (!fresh)
                ast.warnings.push_back("cases " + std::to_string(it->second + 1) + " and " +
                                       std::to_string(i + 1) + " share the guard '" + key +
                                       "'");
        }
        return ast;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, lex_.peek().pos.line, lex_.peek().pos.col);
    }
    bool peek_keyword(std::string_view kw) const {
        return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
    }
    void expect_keyword(std::string_view kw) {
        if (!peek_keyword(kw)) fail("expected '" + std::string(kw) + "'");
        lex_.take();
    }
    std::string expect_ident() {
        if (lex_.peek().kind != Tok::Ident) fail("expected identifier");
        return lex_.take().text;
    }
    bool accept_symbol(std::string_view s) {
        if (lex_.peek().kind == Tok::Symbol && lex_.peek().text == s) {
            lex_.take();
            return true;
        }
        return false;
    }
    void expect_symbol(std::string_view s) {
        if (!accept_symbol(s)) fail("expected '" + std::string(s) + "'");
    }
    double expect_number() {
        bool neg = false;
        while (lex_.peek().kind == Tok::Symbol &&
               (lex_.peek().text == "-" || lex_.peek().text == "+")) {
            if (lex_.take().text == "-") neg = !neg;
        }
        if (lex_.peek().kind != Tok::Number) fail("expected number");
        double v = lex_.take().number;
        return neg ? -v : v;
    }

    void parse_box(ProgramAst& ast) {
        expect_keyword("box");
        expect_symbol("(");
        semialg::Box box;
        do {
            expect_symbol("[");
            double lo = expect_number();
            expect_symbol(",");
            double hi = expect_number();
            expect_symbol("]");
            if (!(lo <= hi)) fail("empty interval in box");
            box.ranges.emplace_back(lo, hi);
        } while (accept_symbol(","));
        expect_symbol(")");
        if (box.dimension() != dim_)
            fail("box has " + std::to_string(box.dimension()) + " intervals for " +
                 std::to_string(dim_) + " variables");
        ast.init_box = box;
        // Lowered quadratic constraints (x - a)(x - b) <= 0.
        for (int v = 0; v < dim_; ++v) {
            auto [a, b] = box.ranges[static_cast<size_t>(v)];
            Polynomial r(dim_);
            r.add_term(Monomial::unit(dim_, v, 2), 1.0);
            r.add_term(Monomial::unit(dim_, v, 1), -(a + b));
            r.add_term(Monomial(dim_), a * b);
            r.normalize(0.0);
            ast.init.push_back({std::move(r), semialg::Cmp::Le, lex_.peek().pos});
        }
    }

    void parse_semialg(ProgramAst& ast) {
        expect_keyword("semialg");
        expect_symbol("{");
        while (!(lex_.peek().kind == Tok::Symbol && lex_.peek().text == "}")) {
            ast.init.push_back(parse_atom());
            expect_symbol(";");
        }
        expect_symbol("}");
        if (ast.init.empty()) fail("semialg init set needs at least one constraint");
    }

    std::vector<GuardAtom> parse_conj() {
        std::vector<GuardAtom> atoms;
        atoms.push_back(parse_atom());
        while (peek_keyword("and")) {
            lex_.take();
            atoms.push_back(parse_atom());
        }
        return atoms;
    }

    GuardAtom parse_atom() {
        SourcePos pos = lex_.peek().pos;
        Polynomial lhs = parse_poly_expr();
        if (lex_.peek().kind != Tok::Symbol) fail("expected comparison operator");
        std::string op = lex_.peek().text;
        if (op != "<" && op != "<=" && op != ">" && op != ">=")
            fail("expected comparison operator");
        lex_.take();
        Polynomial rhs = parse_poly_expr();
        GuardAtom atom;
        atom.pos = pos;
        if (op == "<" || op == "<=")
            atom.r = lhs - rhs;
        else
            atom.r = rhs - lhs;
        atom.cmp = (op == "<" || op == ">") ? semialg::Cmp::Lt : semialg::Cmp::Le;
        atom.r.normalize();
        return atom;
    }

    CaseBlock parse_case(const ProgramAst& ast) {
        CaseBlock block;
        block.pos = lex_.peek().pos;
        expect_keyword("case");
        expect_symbol("(");
        block.guard = parse_conj();
        expect_symbol(")");
        expect_symbol(":");
        std::vector<char> assigned(static_cast<size_t>(dim_), 0);
        block.update.assign(static_cast<size_t>(dim_), Polynomial(dim_));
        while (lex_.peek().kind == Tok::Ident && !peek_keyword("case")) {
            SourcePos pos = lex_.peek().pos;
            std::string name = expect_ident();
            auto it = var_index_.find(name);
            if (it == var_index_.end())
                throw ParseError("undeclared variable '" + name + "'", pos.line, pos.col);
            expect_symbol("=");
            Polynomial rhs = parse_poly_expr();
            expect_symbol(";");
            if (assigned[static_cast<size_t>(it->second)])
                throw ParseError("variable '" + name +
                                     "' assigned twice in one case (updates are simultaneous)",
                                 pos.line, pos.col);
            assigned[static_cast<size_t>(it->second)] = 1;
            block.update[static_cast<size_t>(it->second)] = rhs.normalize();
        }
        for (int v = 0; v < dim_; ++v)
            if (!assigned[static_cast<size_t>(v)])
                throw ParseError("case does not assign variable '" + ast.variables[static_cast<size_t>(v)] +
                                     "'",
                                 block.pos.line, block.pos.col);
        return block;
    }

    // expr := term (('+'|'-') term)*
    // term := factor ('*' factor)*
    // factor := ('+'|'-')* base ('^' uint)?
    // base := number | variable | '(' expr ')'
    Polynomial parse_poly_expr() {
        Polynomial acc = parse_poly_term();
        for (;;) {
            if (accept_symbol("+"))
                acc += parse_poly_term();
            else if (accept_symbol("-"))
                acc -= parse_poly_term();
            else
                return acc;
        }
    }
    Polynomial parse_poly_term() {
        Polynomial acc = parse_poly_factor();
        while (accept_symbol("*")) acc = acc * parse_poly_factor();
        return acc;
    }
    Polynomial parse_poly_factor() {
        bool neg = false;
        while (lex_.peek().kind == Tok::Symbol &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            if (lex_.take().text == "-") neg = !neg;
        }
        Polynomial base = parse_poly_base();
        if (accept_symbol("^")) {
            if (lex_.peek().kind != Tok::Number) fail("expected integer exponent");
            Token t = lex_.take();
            double e = t.number;
            if (e < 0 || e != static_cast<double>(static_cast<unsigned>(e)))
                throw ParseError("exponent must be a nonnegative integer", t.pos.line,
                                 t.pos.col);
            unsigned n = static_cast<unsigned>(e);
            Polynomial pow = Polynomial::constant(dim_, 1.0);
            Polynomial sq = base;
            for (unsigned bit = n; bit; bit >>= 1) {
                if (bit & 1) pow = pow * sq;
                if (bit >> 1) sq = sq * sq;
            }
            base = pow;
        }
        return neg ? -base : base;
    }
    Polynomial parse_poly_base() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Number) return Polynomial::constant(dim_, lex_.take().number);
        if (t.kind == Tok::Ident) {
            auto it = var_index_.find(t.text);
            if (it == var_index_.end())
                throw ParseError("undeclared variable '" + t.text + "'", t.pos.line,
                                 t.pos.col);
            lex_.take();
            return Polynomial::variable(dim_, it->second);
        }
        if (t.kind == Tok::Symbol && t.text == "(") {
            lex_.take();
            Polynomial inner = parse_poly_expr();
            expect_symbol(")");
            return inner;
        }
        fail("expected polynomial expression");
    }

    std::string guard_text(const std::vector<GuardAtom>& atoms) const;

    Lexer lex_;
    std::map<std::string, int> var_index_;
    int dim_ = 0;
};

std::string atom_text(const GuardAtom& atom, std::span<const std::string> names) {
    return atom.r.to_string(17, names) + (atom.cmp == semialg::Cmp::Lt ? " < 0" : " <= 0");
}

std::string conj_text(const std::vector<GuardAtom>& atoms,
                      std::span<const std::string> names) {
    std::string out;
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (i) out += " and ";
        out += atom_text(atoms[i], names);
    }
    return out;
}

std::string Parser::guard_text(const std::vector<GuardAtom>& atoms) const {
    return conj_text(atoms, {});
}

std::string format_number(double v) { return format_double(v); }

} // namespace

ProgramAst parse_program(std::string_view text) { return Parser(text).parse(); }

std::string pretty_print(const ProgramAst& ast) {
    std::ostringstream out;
    std::span<const std::string> names(ast.variables);
    out << "init ";
    for (size_t i = 0; i < ast.variables.size(); ++i)
        out << (i ? ", " : "") << ast.variables[i];
    if (ast.init_box) {
        out << " in box(";
        for (size_t i = 0; i < ast.init_box->ranges.size(); ++i) {
            const auto& [a, b] = ast.init_box->ranges[i];
            out << (i ? ", " : "") << "[" << format_number(a) << ", " << format_number(b)
                << "]";
        }
        out << ");\n";
    } else {
        out << " in semialg{ ";
        for (const auto& atom : ast.init) out << atom_text(atom, names) << "; ";
        out << "};\n";
    }
    out << "while (" << (ast.loop_guard.empty() ? "true" : conj_text(ast.loop_guard, names))
        << ") {\n";
    for (const auto& block : ast.cases) {
        out << "  case (" << conj_text(block.guard, names) << "):\n";
        for (size_t v = 0; v < block.update.size(); ++v)
            out << "    " << ast.variables[v] << " = " << block.update[v].to_string(17, names)
                << ";\n";
    }
    out << "}\n";
    return out.str();
}

semialg::PpsSystem lower(const ProgramAst& ast) {
    semialg::PpsSystem sys;
    sys.dimension = static_cast<int>(ast.variables.size());
    sys.variables = ast.variables;
    sys.init_box = ast.init_box;

    const auto to_set = [&](const std::vector<GuardAtom>& atoms) {
        semialg::SemiAlgSet set(sys.dimension);
        for (const auto& atom : atoms) set.add({atom.r, atom.cmp});
        return set;
    };
    sys.init = to_set(ast.init);
    sys.guard = to_set(ast.loop_guard);
    std::vector<semialg::SemiAlgSet> cells;
    for (const auto& block : ast.cases) {
        cells.push_back(to_set(block.guard));
        sys.updates.push_back(block.update);
    }
    sys.partition = semialg::Partition(std::move(cells));
    sys.validate();
    return sys;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

semialg::PpsSystem load_system(const std::string& path) {
    ProgramAst ast = parse_program(read_file(path));
    for (const auto& w : ast.warnings) log_line(LogLevel::Info, "warning: " + w);
    return lower(ast);
}

} // namespace pps::frontend
