// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pps::poly {

namespace {

void check_same_dim(int a, int b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" +
                             std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

double ipow(double x, unsigned e) {
    double r = 1.0;
    while (e) {
        if (e & 1u) r *= x;
        x *= x;
        e >>= 1u;
    }
    return r;
}

} // namespace

Monomial Monomial::unit(int dimension, int var, unsigned power) {
    Monomial m(dimension);
    m.exps_[static_cast<size_t>(var)] = power;
    return m;
}

unsigned Monomial::degree() const {
    unsigned d = 0;
    for (unsigned e : exps_) d += e;
    return d;
}

Monomial Monomial::operator*(const Monomial& other) const {
    check_same_dim(dimension(), other.dimension(), "Monomial::operator*");
    Monomial r(*this);
    for (size_t i = 0; i < exps_.size(); ++i) r.exps_[i] += other.exps_[i];
    return r;
}

std::optional<Monomial> Monomial::divide(const Monomial& other) const {
    check_same_dim(dimension(), other.dimension(), "Monomial::divide");
    Monomial r(*this);
    for (size_t i = 0; i < exps_.size(); ++i) {
        if (other.exps_[i] > exps_[i]) return std::nullopt;
        r.exps_[i] -= other.exps_[i];
    }
    return r;
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
    unsigned da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    // Within a degree the lexicographically larger vector comes first.
    return a.exponents() > b.exponents();
}

Polynomial Polynomial::constant(int dimension, double c) {
    Polynomial p(dimension);
    p.add_term(Monomial(dimension), c);
    return p;
}

Polynomial Polynomial::variable(int dimension, int var) {
    return term(Monomial::unit(dimension, var), 1.0);
}

Polynomial Polynomial::term(Monomial m, double c) {
    Polynomial p(m.dimension());
    p.add_term(m, c);
    return p;
}

unsigned Polynomial::degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
}

double Polynomial::coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::set_coefficient(const Monomial& m, double c) {
    check_same_dim(dim_, m.dimension(), "Polynomial::set_coefficient");
    if (c == 0.0) {
        terms_.erase(m);
    } else {
        terms_[m] = c;
    }
}

void Polynomial::add_term(const Monomial& m, double c) {
    check_same_dim(dim_, m.dimension(), "Polynomial::add_term");
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) it->second += c;
    if (it->second == 0.0) terms_.erase(it);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    check_same_dim(dim_, other.dim_, "Polynomial::operator+=");
    for (const auto& [m, c] : other.terms_) add_term(m, c);
    return normalize();
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
    check_same_dim(dim_, other.dim_, "Polynomial::operator-=");
    for (const auto& [m, c] : other.terms_) add_term(m, -c);
    return normalize();
}

Polynomial& Polynomial::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return normalize();
}

Polynomial Polynomial::operator-() const {
    Polynomial r(*this);
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

double Polynomial::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw DimensionError("Polynomial::eval: wrong point dimension");
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
        double t = c;
        for (int i = 0; i < dim_; ++i) {
            unsigned e = m.exponent(i);
            if (e) t *= ipow(x[static_cast<size_t>(i)], e);
        }
        sum += t;
    }
    return sum;
}

Polynomial Polynomial::compose(std::span<const Polynomial> subst) const {
    if (static_cast<int>(subst.size()) != dim_)
        throw DimensionError("Polynomial::compose: wrong substitution arity");
    int out_dim = subst.empty() ? 0 : subst[0].dimension();
    for (const auto& s : subst)
        check_same_dim(out_dim, s.dimension(), "Polynomial::compose");

    // Cache powers subst[i]^k as they are needed.
    std::vector<std::vector<Polynomial>> powers(subst.size());
    auto power = [&](int var, unsigned e) -> const Polynomial& {
        auto& cache = powers[static_cast<size_t>(var)];
        if (cache.empty()) cache.push_back(Polynomial::constant(out_dim, 1.0));
        while (cache.size() <= e)
            cache.push_back(cache.back() * subst[static_cast<size_t>(var)]);
        return cache[e];
    };

    Polynomial result(out_dim);
    for (const auto& [m, c] : terms_) {
        Polynomial term_val = Polynomial::constant(out_dim, c);
        for (int i = 0; i < dim_; ++i) {
            unsigned e = m.exponent(i);
            if (e) term_val = term_val * power(i, e);
        }
        result += term_val;
    }
    return result.normalize();
}

Polynomial& Polynomial::normalize(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) <= tol) {
            it = terms_.erase(it);
        } else {
            ++it;
        }
    }
    return *this;
}

double Polynomial::max_coeff_diff(const Polynomial& other) const {
    check_same_dim(dim_, other.dim_, "Polynomial::max_coeff_diff");
    double worst = 0.0;
    for (const auto& [m, c] : terms_)
        worst = std::max(worst, std::abs(c - other.coefficient(m)));
    for (const auto& [m, c] : other.terms_)
        worst = std::max(worst, std::abs(c - coefficient(m)));
    return worst;
}

Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    check_same_dim(a.dimension(), b.dimension(), "Polynomial::operator*");
    Polynomial r(a.dimension());
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms())
            r.add_term(ma * mb, ca * cb);
    return r.normalize();
}

Polynomial operator*(double s, Polynomial p) { return p *= s; }

namespace {

std::string format_coeff(double v, int precision) {
    if (precision >= 17) return format_double(v);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::string monomial_string(const Monomial& m,
                            std::span<const std::string> names) {
    std::string out;
    for (int i = 0; i < m.dimension(); ++i) {
        unsigned e = m.exponent(i);
        if (!e) continue;
        if (!out.empty()) out += "*";
        if (names.empty()) {
            out += "x" + std::to_string(i + 1);
        } else {
            out += names[static_cast<size_t>(i)];
        }
        if (e > 1) out += "^" + std::to_string(e);
    }
    return out;
}

} // namespace

std::string Polynomial::to_string(int precision,
                                  std::span<const std::string> names) const {
    if (terms_.empty()) return "0";
    // Highest total degree first; within a degree keep the basis enumeration
    // order (x1-heavy monomials first).
    std::vector<std::pair<Monomial, double>> ordered(terms_.begin(),
                                                     terms_.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) {
                         return a.first.degree() > b.first.degree();
                     });
    std::string out;
    for (const auto& [m, c] : ordered) {
        double mag = std::abs(c);
        bool negative = std::signbit(c) && c != 0.0;
        if (out.empty()) {
            if (negative) out += "-";
        } else {
            out += negative ? " - " : " + ";
        }
        std::string mono = monomial_string(m, names);
        if (mono.empty()) {
            out += format_coeff(mag, precision);
        } else if (mag == 1.0) {
            out += mono;
        } else {
            out += format_coeff(mag, precision) + "*" + mono;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Expression parser for the textual polynomial syntax.

namespace {

class ExprParser {
public:
    ExprParser(std::string_view text, std::span<const std::string> names,
               int dimension)
        : text_(text), names_(names), dim_(dimension) {}

    Polynomial run() {
        Polynomial p = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected trailing input");
        return p.normalize();
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw Error("polynomial syntax error at offset " + std::to_string(pos_) +
                    ": " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Polynomial parse_expr() {
        Polynomial acc = parse_term();
        for (;;) {
            if (eat('+')) {
                acc += parse_term();
            } else if (eat('-')) {
                acc -= parse_term();
            } else {
                return acc;
            }
        }
    }

    Polynomial parse_term() {
        Polynomial acc = parse_factor();
        while (eat('*')) acc = acc * parse_factor();
        return acc;
    }

    Polynomial parse_factor() {
        if (eat('-')) return -parse_factor();
        if (eat('+')) return parse_factor();
        Polynomial base = parse_base();
        if (eat('^')) {
            unsigned e = parse_uint();
            Polynomial r = Polynomial::constant(dim_, 1.0);
            for (unsigned k = 0; k < e; ++k) r = r * base;
            return r;
        }
        return base;
    }

    Polynomial parse_base() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Polynomial inner = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return Polynomial::constant(dim_, parse_number());
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return Polynomial::variable(dim_, parse_variable());
        fail("expected number, variable or '('");
    }

    double parse_number() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        // Scientific exponent.
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark; // the 'e' starts an identifier, not an exponent
            }
        }
        std::string tok(text_.substr(start, pos_ - start));
        try {
            size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) fail("malformed number '" + tok + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("malformed number '" + tok + "'");
        }
    }

    unsigned parse_uint() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (start == pos_) fail("expected integer exponent");
        return static_cast<unsigned>(std::stoul(std::string(text_.substr(start, pos_ - start))));
    }

    int parse_variable() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (!names_.empty()) {
            for (size_t i = 0; i < names_.size(); ++i)
                if (names_[i] == name) return static_cast<int>(i);
            fail("unknown variable '" + name + "'");
        }
        // Canonical names x1..xd.
        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (size_t i = 1; i < name.size(); ++i)
                digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
            if (digits) {
                int idx = std::stoi(name.substr(1)) - 1;
                if (idx >= 0 && idx < dim_) return idx;
            }
        }
        fail("unknown variable '" + name + "' (expected x1..x" + std::to_string(dim_) + ")");
    }

    std::string_view text_;
    std::span<const std::string> names_;
    int dim_;
    size_t pos_ = 0;
};

} // namespace

Polynomial parse_polynomial(std::string_view text, int dimension) {
    return ExprParser(text, {}, dimension).run();
}

Polynomial parse_polynomial(std::string_view text,
                            std::span<const std::string> names) {
    return ExprParser(text, names, static_cast<int>(names.size())).run();
}

// ---------------------------------------------------------------------------
// Monomial bases and Gram machinery.

MonomialBasis::MonomialBasis(int dimension, int half_degree)
    : dim_(dimension), half_degree_(half_degree) {
    if (dimension < 1) throw DimensionError("MonomialBasis: dimension must be >= 1");
    if (half_degree < 0) throw Error("MonomialBasis: negative degree");
    std::vector<unsigned> exps(static_cast<size_t>(dimension), 0u);
    // Enumerate all exponent vectors with total degree <= half_degree.
    auto recurse = [&](auto&& self, int var, unsigned remaining) -> void {
        if (var == dimension - 1) {
            for (unsigned e = 0; e <= remaining; ++e) {
                exps[static_cast<size_t>(var)] = e;
                monomials_.emplace_back(exps);
            }
            exps[static_cast<size_t>(var)] = 0;
            return;
        }
        for (unsigned e = 0; e <= remaining; ++e) {
            exps[static_cast<size_t>(var)] = e;
            self(self, var + 1, remaining - e);
        }
        exps[static_cast<size_t>(var)] = 0;
    };
    recurse(recurse, 0, static_cast<unsigned>(half_degree));
    std::sort(monomials_.begin(), monomials_.end(),
              [](const Monomial& a, const Monomial& b) { return GradedLexLess{}(a, b); });
    for (size_t i = 0; i < monomials_.size(); ++i) index_.emplace(monomials_[i], i);
}

std::optional<size_t> MonomialBasis::index_of(const Monomial& m) const {
    auto it = index_.find(m);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Polynomial gram_expand(const SymMatrix& q, const MonomialBasis& basis) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    if (q.rows() != n || q.cols() != n)
        throw DimensionError("gram_expand: matrix size does not match basis");
    Polynomial out(basis.dimension());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double v = q(i, j);
            if (v == 0.0) continue;
            out.add_term(basis[static_cast<size_t>(i)] * basis[static_cast<size_t>(j)], v);
        }
    }
    return out.normalize();
}

std::map<Monomial, std::vector<std::pair<int, int>>, GradedLexLess>
gram_constraints(const MonomialBasis& basis) {
    std::map<Monomial, std::vector<std::pair<int, int>>, GradedLexLess> out;
    const int n = static_cast<int>(basis.size());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            out[basis[static_cast<size_t>(i)] * basis[static_cast<size_t>(j)]]
                .emplace_back(i, j);
    return out;
}

std::vector<Polynomial> sos_certificate(const SymMatrix& q,
                                        const MonomialBasis& basis,
                                        double psd_tol) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    if (q.rows() != n || q.cols() != n)
        throw DimensionError("sos_certificate: matrix size does not match basis");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
    if (eig.info() != Eigen::Success)
        throw Error("sos_certificate: eigendecomposition failed");
    std::vector<Polynomial> squares;
    // Largest eigenvalue first for a stable, deterministic listing.
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        double lambda = eig.eigenvalues()(k);
        if (lambda < -psd_tol)
            throw Error("sos_certificate: matrix is not positive semidefinite "
                        "(eigenvalue " + std::to_string(lambda) + ")");
        if (lambda <= 0.0) continue;
        double scale = std::sqrt(lambda);
        Polynomial g(basis.dimension());
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = eig.eigenvectors()(i, k);
            if (v != 0.0) g.add_term(basis[static_cast<size_t>(i)], scale * v);
        }
        squares.push_back(g.normalize());
    }
    return squares;
}

size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    size_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<size_t>(n - k + i) / static_cast<size_t>(i);
    }
    return r;
}

} // namespace pps::poly
