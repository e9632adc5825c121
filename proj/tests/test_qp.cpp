#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "hydrofcr/qp.hpp"
#include "support/oracles.hpp"

using namespace hydrofcr;

namespace {

qp::Problem scalar_bound_problem() {
    // min x^2 s.t. x >= 1
    qp::Problem p;
    p.P = Eigen::MatrixXd::Constant(1, 1, 2.0);
    p.q = Eigen::VectorXd::Zero(1);
    p.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
    p.l = Eigen::VectorXd::Constant(1, 1.0);
    p.u = Eigen::VectorXd::Constant(1, qp::kInf);
    return p;
}

} // namespace

TEST_CASE("active bound projection") {
    const qp::Solution s = qp::solve(scalar_bound_problem());
    REQUIRE(s.status == qp::Status::Solved);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.primal_res <= 1e-6);
    CHECK(s.dual_res <= 1e-6);
}

TEST_CASE("unconstrained stationary point") {
    // min (x-2)^2 + (y+1)^2
    qp::Problem p;
    p.P = 2.0 * Eigen::MatrixXd::Identity(2, 2);
    p.q.resize(2);
    p.q << -4.0, 2.0;
    p.A.resize(0, 2);
    p.l.resize(0);
    p.u.resize(0);
    const qp::Solution s = qp::solve(p);
    REQUIRE(s.status == qp::Status::Solved);
    CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(s.x[1] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("random PSD problems match the reference oracle") {
    std::mt19937_64 rng(7);
    int solved = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const qp::Problem prob = test::random_feasible_qp(rng);
        const qp::Solution s = qp::solve(prob);
        REQUIRE_MESSAGE(s.status == qp::Status::Solved, "trial ", trial);
        CHECK(s.primal_res <= 1e-6);
        CHECK(s.dual_res <= 1e-6);

        const test::AlmResult ref = test::alm_reference_solve(prob, 1e-9);
        const double scale = std::max(1.0, std::abs(ref.objective));
        CHECK_MESSAGE(std::abs(s.objective - ref.objective) / scale <= 1e-5, "trial ", trial,
                      " obj=", s.objective, " ref=", ref.objective);
        ++solved;
    }
    CHECK(solved == 200);
}

TEST_CASE("complementary slackness on inactive bounds") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const qp::Problem prob = test::random_feasible_qp(rng);
        const qp::Solution s = qp::solve(prob);
        REQUIRE(s.status == qp::Status::Solved);
        const Eigen::VectorXd ax = prob.A * s.x;
        for (Eigen::Index i = 0; i < prob.num_constraints(); ++i) {
            const double y = s.y[i];
            if (std::isfinite(prob.u[i]))
                CHECK(std::abs(std::max(y, 0.0) * (ax[i] - prob.u[i])) <=
                      1e-5 * (1.0 + std::abs(y)));
            if (std::isfinite(prob.l[i]))
                CHECK(std::abs(std::min(y, 0.0) * (ax[i] - prob.l[i])) <=
                      1e-5 * (1.0 + std::abs(y)));
        }
    }
}

TEST_CASE("argmin is invariant to positive cost scaling") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        qp::Problem prob = test::random_feasible_qp(rng);
        prob.P.diagonal().array() += 0.5;  // unique argmin
        const qp::Solution base = qp::solve(prob, 1e-9, 100000);
        REQUIRE(base.status == qp::Status::Solved);
        prob.P *= 37.5;
        prob.q *= 37.5;
        const qp::Solution scaled = qp::solve(prob, 1e-9, 100000);
        REQUIRE(scaled.status == qp::Status::Solved);
        CHECK((base.x - scaled.x).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
}

TEST_CASE("warm start never costs more than a second cold start") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const qp::Problem prob = test::random_feasible_qp(rng);
        qp::Solver solver(prob.P, prob.A);
        solver.set_vectors(prob.q, prob.l, prob.u);
        const qp::Solution cold = solver.solve();
        REQUIRE(cold.status == qp::Status::Solved);

        qp::Solver solver2(prob.P, prob.A);
        solver2.set_vectors(prob.q, prob.l, prob.u);
        const qp::Solution warm = solver2.solve(cold.x, cold.y);
        REQUIRE(warm.status == qp::Status::Solved);
        CHECK(warm.iterations <= 2 * cold.iterations);
    }
}

TEST_CASE("primal infeasibility is detected") {
    // x >= 1 and x <= 0
    qp::Problem p;
    p.P = Eigen::MatrixXd::Constant(1, 1, 2.0);
    p.q = Eigen::VectorXd::Zero(1);
    p.A.resize(2, 1);
    p.A << 1.0, 1.0;
    p.l.resize(2);
    p.u.resize(2);
    p.l << 1.0, -qp::kInf;
    p.u << qp::kInf, 0.0;
    const qp::Solution s = qp::solve(p, 1e-6, 5000);
    CHECK(s.status != qp::Status::Solved);
}

TEST_CASE("deterministic for fixed inputs") {
    std::mt19937_64 rng(99);
    const qp::Problem prob = test::random_feasible_qp(rng);
    const qp::Solution a = qp::solve(prob);
    const qp::Solution b = qp::solve(prob);
    CHECK(a.iterations == b.iterations);
    CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("csv dump writes the five matrices") {
    const qp::Problem p = scalar_bound_problem();
    qp::dump_csv(p, "/tmp/hydrofcr_qp_test_");
    std::ifstream in("/tmp/hydrofcr_qp_test_P.csv");
    CHECK(in.good());
}
