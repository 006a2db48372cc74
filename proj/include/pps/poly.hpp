// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pps/common.hpp"

namespace pps::poly {

// Coefficients below this magnitude are dropped when a polynomial is
// normalized after arithmetic.
inline constexpr double kCoeffTol = 1e-14;

// A power product x1^e1 * ... * xd^ed over a fixed ambient dimension.
class Monomial {
public:
    explicit Monomial(int dimension) : exps_(static_cast<size_t>(dimension), 0u) {}
    Monomial(std::initializer_list<unsigned> exps) : exps_(exps) {}
    explicit Monomial(std::vector<unsigned> exps) : exps_(std::move(exps)) {}

    // x_var^power within the given ambient dimension (var is 0-based).
    static Monomial unit(int dimension, int var, unsigned power = 1);

    int dimension() const { return static_cast<int>(exps_.size()); }
    unsigned degree() const;
    unsigned exponent(int var) const { return exps_[static_cast<size_t>(var)]; }
    const std::vector<unsigned>& exponents() const { return exps_; }

    Monomial operator*(const Monomial& other) const;
    // this / other, or nullopt if any exponent would go negative.
    std::optional<Monomial> divide(const Monomial& other) const;

    bool operator==(const Monomial& other) const { return exps_ == other.exps_; }

private:
    std::vector<unsigned> exps_;
};

// Graded lexicographic order: lower total degree first; within a degree the
// lexicographically larger exponent vector comes first, so that for d = 2 the
// order runs 1, x1, x2, x1^2, x1*x2, x2^2, ...
struct GradedLexLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

// Sparse multivariate polynomial with double coefficients, keyed by monomial
// in graded lexicographic order.
class Polynomial {
public:
    using TermMap = std::map<Monomial, double, GradedLexLess>;

    explicit Polynomial(int dimension = 0) : dim_(dimension) {}
    static Polynomial constant(int dimension, double c);
    static Polynomial variable(int dimension, int var);
    static Polynomial term(Monomial m, double c);

    int dimension() const { return dim_; }
    bool is_zero() const { return terms_.empty(); }
    // Total degree; the zero polynomial has degree 0.
    unsigned degree() const;
    size_t term_count() const { return terms_.size(); }
    const TermMap& terms() const { return terms_; }

    double coefficient(const Monomial& m) const;
    double constant_term() const { return coefficient(Monomial(dim_)); }
    void set_coefficient(const Monomial& m, double c);
    void add_term(const Monomial& m, double c);

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(double s);
    Polynomial operator-() const;

    double eval(std::span<const double> x) const;
    // Substitute subst[i] for variable i; all components must share one
    // ambient dimension, which becomes the dimension of the result.
    Polynomial compose(std::span<const Polynomial> subst) const;

    // Drop coefficients with magnitude <= tol; returns *this.
    Polynomial& normalize(double tol = kCoeffTol);

    // Maximum absolute coefficient difference against other.
    double max_coeff_diff(const Polynomial& other) const;
    bool almost_equal(const Polynomial& other, double tol) const {
        return max_coeff_diff(other) <= tol;
    }
    bool operator==(const Polynomial& other) const {
        return dim_ == other.dim_ && terms_ == other.terms_;
    }

    // Render with variables named x1..xd (or the supplied names), highest
    // graded-lex terms first.  precision is the significant-digit count.
    std::string to_string(int precision = 17,
                          std::span<const std::string> names = {}) const;

private:
    int dim_;
    TermMap terms_;
};

Polynomial operator+(Polynomial a, const Polynomial& b);
Polynomial operator-(Polynomial a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, Polynomial p);

// Parse the textual syntax ("-0.0001*x1^2*x2 + 0.687*x1", parentheses and
// unary minus allowed).  The two-argument form resolves canonical names
// x1..xd; the names form resolves the supplied variable names.
Polynomial parse_polynomial(std::string_view text, int dimension);
Polynomial parse_polynomial(std::string_view text,
                            std::span<const std::string> names);

// All monomials of total degree <= half_degree in the ambient dimension,
// listed in graded lexicographic order (length C(d + m, d)).
class MonomialBasis {
public:
    MonomialBasis(int dimension, int half_degree);

    int dimension() const { return dim_; }
    int half_degree() const { return half_degree_; }
    size_t size() const { return monomials_.size(); }
    const Monomial& operator[](size_t i) const { return monomials_[i]; }
    const std::vector<Monomial>& monomials() const { return monomials_; }
    std::optional<size_t> index_of(const Monomial& m) const;

    bool operator==(const MonomialBasis& o) const {
        return dim_ == o.dim_ && half_degree_ == o.half_degree_;
    }

private:
    int dim_;
    int half_degree_;
    std::vector<Monomial> monomials_;
    std::map<Monomial, size_t, GradedLexLess> index_;
};

// Dense symmetric Gram matrix.
using SymMatrix = Eigen::MatrixXd;

// b(x)^T Q b(x) expanded to a polynomial.  Q must be square with the basis
// length.
Polynomial gram_expand(const SymMatrix& q, const MonomialBasis& basis);

// For each product monomial reachable from the basis, the upper-triangular
// (i, j) positions (i <= j) whose product equals it.
std::map<Monomial, std::vector<std::pair<int, int>>, GradedLexLess>
gram_constraints(const MonomialBasis& basis);

// Eigendecomposition-backed sum-of-squares certificate: returns polynomials
// g_k with sum_k g_k^2 = b^T Q b.  Eigenvalues in [-psd_tol, 0) are clamped
// to zero; anything below -psd_tol throws.
std::vector<Polynomial> sos_certificate(const SymMatrix& q,
                                        const MonomialBasis& basis,
                                        double psd_tol = 1e-8);

// C(n, k) as size_t (exact for the small arguments used here).
size_t binomial(int n, int k);

} // namespace pps::poly
