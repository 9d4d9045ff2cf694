#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles/kkt.hpp"
#include "oracles/random_lp.hpp"
#include "oracles/tableau_simplex.hpp"
#include "sccprice/lp_text.hpp"
#include "sccprice/simplex.hpp"

using namespace sccprice;
using opt::kInf;
using opt::LinearProgram;
using opt::LpStatus;
using opt::Row;
using opt::Sense;

TEST_CASE("single >= constraint yields dual 1", "[lp]") {
    LinearProgram p;
    p.add_variable("x", 0.0, kInf, 1.0);
    p.add_row({{{0, 1.0}}, Sense::GreaterEq, 3.0, "floor"});
    opt::LpSolution sol = opt::solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == Catch::Approx(3.0));
    CHECK(sol.objective == Catch::Approx(3.0));
    CHECK(sol.duals[0] == Catch::Approx(1.0));
    CHECK(sol.row_activity[0] == Catch::Approx(3.0));
    CHECK_FALSE(sol.row_degenerate[0]);
    CHECK_FALSE(oracle::check_kkt(p, sol).has_value());
}

TEST_CASE("box LP solves on bounds alone", "[lp]") {
    LinearProgram p;
    p.add_variable("x", 0.0, 4.0, -1.0);
    p.add_variable("y", 1.0, 3.0, 2.0);
    opt::LpSolution sol = opt::solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == 4.0);
    CHECK(sol.x[1] == 1.0);
    CHECK(sol.objective == Catch::Approx(-2.0));
    CHECK(sol.reduced_costs[0] == Catch::Approx(-1.0));
    CHECK(sol.reduced_costs[1] == Catch::Approx(2.0));
    CHECK_FALSE(oracle::check_kkt(p, sol).has_value());
}

TEST_CASE("equality row with negative dual", "[lp]") {
    // min -2x - y  s.t.  x + y = 5, x <= 3, y <= 4.
    LinearProgram p;
    p.add_variable("x", 0.0, 3.0, -2.0);
    p.add_variable("y", 0.0, 4.0, -1.0);
    p.add_row({{{0, 1.0}, {1, 1.0}}, Sense::Equal, 5.0, "bal"});
    opt::LpSolution sol = opt::solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == Catch::Approx(3.0));
    CHECK(sol.x[1] == Catch::Approx(2.0));
    CHECK(sol.objective == Catch::Approx(-8.0));
    // Raising the balance by 1 adds one more unit of y: objective -1.
    CHECK(sol.duals[0] == Catch::Approx(-1.0));
    CHECK_FALSE(oracle::check_kkt(p, sol).has_value());
}

TEST_CASE("unbounded LP is detected", "[lp]") {
    LinearProgram p;
    p.add_variable("x", 0.0, kInf, -1.0);
    p.add_row({{{0, 1.0}}, Sense::GreaterEq, 1.0, "floor"});
    opt::LpSolution sol = opt::solve_lp(p);
    CHECK(sol.status == LpStatus::Unbounded);
}

TEST_CASE("infeasible LP is detected with a positive measure", "[lp]") {
    LinearProgram p;
    p.add_variable("x", 0.0, kInf, 1.0);
    p.add_row({{{0, 1.0}}, Sense::LessEq, -2.0, "ceiling"});
    opt::LpSolution sol = opt::solve_lp(p);
    CHECK(sol.status == LpStatus::Infeasible);
    CHECK(sol.infeasibility > 1.0);
}

TEST_CASE("degenerate binding row is flagged", "[lp]") {
    LinearProgram p;
    p.add_variable("x", 0.0, 1.0, 1.0);
    p.add_row({{{0, 1.0}}, Sense::LessEq, 0.0, "cap"});
    opt::LpSolution sol = opt::solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == 0.0);
    CHECK(sol.row_degenerate[0]);
}

TEST_CASE("zero objective marks dual degeneracy", "[lp]") {
    LinearProgram p;
    p.add_variable("x", 0.0, 1.0, 0.0);
    opt::LpSolution sol = opt::solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.dual_degenerate);
}

TEST_CASE("free variables are handled", "[lp]") {
    // min x + y with x free, pinned by two inequalities.
    LinearProgram p;
    p.add_variable("x", -kInf, kInf, 1.0);
    p.add_variable("y", 0.0, kInf, 1.0);
    p.add_row({{{0, 1.0}, {1, 1.0}}, Sense::GreaterEq, -4.0, "lo"});
    p.add_row({{{0, -1.0}, {1, 1.0}}, Sense::GreaterEq, 2.0, "hi"});
    opt::LpSolution sol = opt::solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    // Unique vertex: the first row binds and y sits on its lower bound.
    CHECK(sol.x[0] == Catch::Approx(-4.0));
    CHECK(sol.x[1] == Catch::Approx(0.0).margin(1e-12));
    CHECK(sol.objective == Catch::Approx(-4.0));
    CHECK_FALSE(oracle::check_kkt(p, sol).has_value());
}

TEST_CASE("random corpus matches tableau oracle and passes KKT", "[lp]") {
    int optimal = 0, infeasible = 0, unbounded = 0;
    for (unsigned seed = 1; seed <= 120; ++seed) {
        std::mt19937 rng(seed);
        LinearProgram p = oracle::random_lp(rng);
        CAPTURE(seed);
        oracle::TabResult ref = oracle::tableau_solve(p);
        opt::LpSolution sol = opt::solve_lp(p);
        switch (ref.status) {
            case oracle::TabResult::Optimal:
                REQUIRE(sol.status == LpStatus::Optimal);
                CHECK(std::abs(sol.objective - ref.objective) <=
                      1e-7 * (1.0 + std::abs(ref.objective)));
                {
                    auto verdict = oracle::check_kkt(p, sol);
                    if (verdict) FAIL("KKT: " << *verdict << " (seed " << seed << ")");
                }
                ++optimal;
                break;
            case oracle::TabResult::Infeasible:
                REQUIRE(sol.status == LpStatus::Infeasible);
                ++infeasible;
                break;
            case oracle::TabResult::Unbounded:
                REQUIRE(sol.status == LpStatus::Unbounded);
                ++unbounded;
                break;
        }
    }
    INFO("optimal=" << optimal << " infeasible=" << infeasible << " unbounded=" << unbounded);
    CHECK(optimal >= 20);
}

TEST_CASE("dual warm start after a bound change matches a cold solve", "[lp]") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        LinearProgram p = oracle::random_lp(rng);
        opt::SimplexSolver solver(p);
        opt::LpSolution base = solver.solve();
        if (base.status != LpStatus::Optimal) continue;
        opt::SimplexSolver::Basis warm = solver.basis();
        // Tighten the first variable into a narrower box.
        double lo = std::isfinite(p.lower[0]) ? p.lower[0] : -1.0;
        std::vector<opt::BoundChange> ch{{0, lo, lo + 0.25}};
        opt::LpSolution warm_sol = solver.solve(ch, &warm);

        LinearProgram q = p;
        q.lower[0] = lo;
        q.upper[0] = lo + 0.25;
        opt::LpSolution cold = opt::solve_lp(q);
        REQUIRE(warm_sol.status == cold.status);
        if (cold.status == LpStatus::Optimal) {
            CHECK(std::abs(warm_sol.objective - cold.objective) <=
                  1e-7 * (1.0 + std::abs(cold.objective)));
            auto verdict = oracle::check_kkt(q, warm_sol);
            if (verdict) FAIL("warm KKT: " << *verdict << " (trial " << trial << ")");
        }
    }
}

TEST_CASE("repeat solves are bitwise identical", "[lp]") {
    std::mt19937 rng(11);
    LinearProgram p = oracle::random_lp(rng);
    opt::LpSolution a = opt::solve_lp(p);
    opt::LpSolution b = opt::solve_lp(p);
    REQUIRE(a.status == b.status);
    CHECK(a.x == b.x);
    CHECK(a.duals == b.duals);
    CHECK(a.reduced_costs == b.reduced_costs);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("LP text export round-trips the shape", "[lp]") {
    LinearProgram p;
    p.add_variable("x", 0.0, 4.0, -1.0);
    p.add_variable("y", 1.0, kInf, 2.5);
    p.add_row({{{0, 1.0}, {1, -2.0}}, Sense::LessEq, 3.0, "cap"});
    p.add_row({{{0, 1.0}, {1, 1.0}}, Sense::Equal, 2.0, "bal"});
    std::string text = opt::to_lp_text(p, "cost");
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("cap:") != std::string::npos);
    CHECK(text.find("bal:") != std::string::npos);
    CHECK(text.find("Bounds") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
    CHECK(text.find("- 2 y") != std::string::npos);
}

TEST_CASE("validation rejects malformed programs", "[lp]") {
    LinearProgram p;
    p.add_variable("x", 1.0, 0.0, 1.0);
    CHECK_THROWS_AS(opt::solve_lp(p), ValidationError);

    LinearProgram q;
    q.add_variable("x", 0.0, 1.0, 1.0);
    q.add_row({{{0, 1.0}, {0, 2.0}}, Sense::LessEq, 1.0, "dup"});
    CHECK_THROWS_AS(opt::solve_lp(q), ValidationError);
}
