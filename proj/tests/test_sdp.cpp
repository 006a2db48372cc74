// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Solver checks run against problems whose optimum is known in advance:
// either worked out by hand (tiny linear cases) or constructed from a
// randomly drawn primal-dual pair that satisfies complementary slackness,
// so the certified objective value is available before the solver runs.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "pps/sdp.hpp"

using namespace pps;
using sdp::SdpProblem;
using sdp::SdpStatus;

namespace {

using Entry = SdpProblem::Entry;

// Upper-triangular sparse form of a dense symmetric matrix.
std::vector<Entry> sparsify(int block, const Eigen::MatrixXd& mat,
                            double tol = 0.0) {
    std::vector<Entry> out;
    for (int i = 0; i < mat.rows(); ++i)
        for (int j = i; j < mat.cols(); ++j)
            if (std::abs(mat(i, j)) > tol)
                out.push_back({block, i, j, mat(i, j)});
    return out;
}

double frob_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a.array() * b.array()).sum();
}

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = u(rng);
    return m;
}

// Random orthogonal factor via QR of a Gaussian matrix.
Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ();
}

// A dense single-block instance built backwards from a known optimal pair:
//   X* = U diag(x_pos, 0) U',  Z* = U diag(0, z_pos) U'   (so X*Z* = 0),
//   C  = sum_k y*_k A_k + Z*,  b_k = <A_k, X*>.
// Strong duality holds with objective <C, X*> = b'y*.  The first constraint
// is the trace, which guarantees a strictly feasible dual point (lower y_1
// and Z gains a positive multiple of the identity), so the central path
// exists and an interior-point method can be expected to reach the optimum.
struct BuiltInstance {
    SdpProblem problem;
    double objective = 0.0;
};

BuiltInstance build_instance(unsigned seed, int n, int rank, int m) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.5, 2.0);

    Eigen::MatrixXd U = random_orthogonal(rng, n);
    Eigen::VectorXd xeig = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd zeig = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < rank; ++i) xeig(i) = u(rng);
    for (int i = rank; i < n; ++i) zeig(i) = u(rng);
    Eigen::MatrixXd xstar = U * xeig.asDiagonal() * U.transpose();
    Eigen::MatrixXd zstar = U * zeig.asDiagonal() * U.transpose();

    BuiltInstance out;
    out.problem.blocks = {n};
    Eigen::VectorXd ystar(m);
    Eigen::MatrixXd c = zstar;
    out.problem.rhs.resize(m);
    for (int k = 0; k < m; ++k) {
        Eigen::MatrixXd a = k == 0 ? Eigen::MatrixXd::Identity(n, n)
                                   : random_symmetric(rng, n);
        ystar(k) = u(rng) - 1.25; // mixed signs
        c += ystar(k) * a;
        out.problem.rhs(k) = frob_dot(a, xstar);
        out.problem.constraints.push_back(sparsify(0, a));
    }
    out.problem.objective = sparsify(0, c);
    out.objective = frob_dot(c, xstar);
    return out;
}

} // namespace

TEST_CASE("validate rejects malformed problems") {
    SdpProblem p;
    p.blocks = {2};
    p.rhs.resize(0);
    CHECK_NOTHROW(p.validate());

    SdpProblem bad = p;
    bad.objective = {{0, 1, 0, 1.0}}; // row > col
    CHECK_THROWS_AS(bad.validate(), Error);

    bad = p;
    bad.blocks = {-2};
    bad.objective = {{0, 0, 1, 1.0}}; // off-diagonal in diagonal block
    CHECK_THROWS_AS(bad.validate(), Error);

    bad = p;
    bad.constraints.push_back({{0, 0, 0, 1.0}});
    // rhs not resized
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("1x1 equality: min x s.t. x = 3") {
    SdpProblem p;
    p.blocks = {1};
    p.objective = {{0, 0, 0, 1.0}};
    p.constraints = {{{0, 0, 0, 1.0}}};
    p.rhs.resize(1);
    p.rhs << 3.0;
    auto sol = sdp::solve(p);
    CHECK(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(sol.X[0](0, 0) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("diagonal block behaves like an LP") {
    // min x1 + 2 x2  s.t.  x1 + x2 = 1,  x >= 0: optimum (1, 0), value 1.
    SdpProblem p;
    p.blocks = {-2};
    p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 2.0}};
    p.constraints = {{{0, 0, 0, 1.0}, {0, 1, 1, 1.0}}};
    p.rhs.resize(1);
    p.rhs << 1.0;
    auto sol = sdp::solve(p);
    CHECK(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(sol.X[0](1, 1) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("2x2 closest-psd: min trace s.t. off-diagonal pinned") {
    // min x11 + x22  s.t.  x12 = 1, X >= 0.  At the optimum x11 = x22 = 1
    // (det = 0), objective 2.
    SdpProblem p;
    p.blocks = {2};
    p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
    p.constraints = {{{0, 0, 1, 0.5}}}; // <A,X> counts x12 twice
    p.rhs.resize(1);
    p.rhs << 1.0;
    auto sol = sdp::solve(p);
    CHECK(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("constructed optima are recovered (dense single block)") {
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
        CAPTURE(seed);
        BuiltInstance inst = build_instance(seed, 6, 3, 4);
        auto sol = sdp::solve(inst.problem);
        CHECK(sol.status == SdpStatus::Optimal);
        CHECK(sol.primal_obj ==
              doctest::Approx(inst.objective).epsilon(1e-5));
        // Primal solution must be feasible and PSD.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sol.X[0]);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-7);
    }
}

TEST_CASE("constructed optimum with larger blocks and more constraints") {
    BuiltInstance inst = build_instance(99, 10, 4, 12);
    auto sol = sdp::solve(inst.problem);
    CHECK(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(inst.objective).epsilon(1e-5));
}

TEST_CASE("multi-block problem with a diagonal tail block") {
    // Block 0 (2x2 PSD): min trace with x12 = 1 -> contributes 2.
    // Block 1 (diag 2): min s1 + s2 with s1 + s2 = 1 -> contributes 1.
    SdpProblem p;
    p.blocks = {2, -2};
    p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}, {1, 0, 0, 1.0}, {1, 1, 1, 1.0}};
    p.constraints = {{{0, 0, 1, 0.5}}, {{1, 0, 0, 1.0}, {1, 1, 1, 1.0}}};
    p.rhs.resize(2);
    p.rhs << 1.0, 1.0;
    auto sol = sdp::solve(p);
    CHECK(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("primal infeasibility is detected") {
    // trace(X) = -1 has no PSD solution.
    SdpProblem p;
    p.blocks = {2};
    p.objective = {{0, 0, 0, 1.0}};
    p.constraints = {{{0, 0, 0, 1.0}, {0, 1, 1, 1.0}}};
    p.rhs.resize(1);
    p.rhs << -1.0;
    auto sol = sdp::solve(p);
    CHECK(sol.status == SdpStatus::Infeasible);
}

TEST_CASE("unbounded objective is flagged as dual infeasible") {
    // min -(x1 + x2) s.t. x1 - x2 = 0 over the diagonal cone: x1 = x2 = t
    // drives the objective to -infinity.
    SdpProblem p;
    p.blocks = {-2};
    p.objective = {{0, 0, 0, -1.0}, {0, 1, 1, -1.0}};
    p.constraints = {{{0, 0, 0, 1.0}, {0, 1, 1, -1.0}}};
    p.rhs.resize(1);
    p.rhs << 0.0;
    auto sol = sdp::solve(p);
    CHECK(sol.status == SdpStatus::DualInfeasible);
}

TEST_CASE("no constraints: X = 0 when C is psd, unbounded otherwise") {
    SdpProblem p;
    p.blocks = {2};
    p.objective = {{0, 0, 0, 1.0}, {0, 1, 1, 2.0}};
    auto sol = sdp::solve(p);
    CHECK(sol.status == SdpStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(0.0));

    p.objective = {{0, 0, 0, -1.0}};
    sol = sdp::solve(p);
    CHECK(sol.status == SdpStatus::DualInfeasible);
}

TEST_CASE("dimension and constraint caps are enforced") {
    SdpProblem p;
    p.blocks = {3};
    p.rhs.resize(0);
    sdp::SdpOptions opt;
    opt.dim_cap = 2;
    CHECK_THROWS_AS(sdp::solve(p, opt), Error);
}

TEST_CASE("sdpa text round-trips byte-identically") {
    BuiltInstance inst = build_instance(7, 4, 2, 3);
    inst.problem.blocks = {4}; // single block already
    std::string first = sdp::export_sdpa(inst.problem);
    SdpProblem back = sdp::parse_sdpa(first);
    std::string second = sdp::export_sdpa(back);
    CHECK(first == second);
    CHECK(back.blocks == inst.problem.blocks);
    CHECK(back.num_constraints() == inst.problem.num_constraints());
}

TEST_CASE("sdpa parser reads the documented layout") {
    const char* text =
        "* comment line\n"
        "2 =mdim\n"
        "2 =nblocks\n"
        "{2, -1}\n"
        "1.0 -2.5\n"
        "0 1 1 1 1.5\n"
        "0 2 1 1 -1\n"
        "1 1 1 2 0.5\n"
        "2 2 1 1 1\n";
    SdpProblem p = sdp::parse_sdpa(text);
    CHECK(p.blocks == std::vector<int>{2, -1});
    REQUIRE(p.num_constraints() == 2);
    CHECK(p.rhs(0) == doctest::Approx(1.0));
    CHECK(p.rhs(1) == doctest::Approx(-2.5));
    REQUIRE(p.objective.size() == 2);
    CHECK(p.objective[0] == Entry{0, 0, 0, 1.5});
    CHECK(p.objective[1] == Entry{1, 0, 0, -1.0});
    REQUIRE(p.constraints[0].size() == 1);
    CHECK(p.constraints[0][0] == Entry{0, 0, 1, 0.5});
    // Solve it too: min 1.5 x11 - s  s.t. 2*0.5*x12 = 1, s = -2.5 is
    // infeasible (s >= 0), so tighten: use only the first constraint.
    SdpProblem solvable = p;
    solvable.constraints.pop_back();
    solvable.rhs.conservativeResize(1);
    auto sol = sdp::solve(solvable);
    // min 1.5 x11 - s with x12 = 1: s unbounded above -> dual infeasible.
    CHECK(sol.status == SdpStatus::DualInfeasible);
}
