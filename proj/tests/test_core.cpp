#include <catch2/catch_amalgamated.hpp>

#include "dfls/core.hpp"

using namespace dfls;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("parameter validation accepts the documented ranges") {
    SolverParams p;
    p.theta = 0.5;
    p.delta = 0.5;
    p.gamma = 1e-6;
    p.c = 0.5;
    p.initial_steps = {1.0, 1.0};
    REQUIRE_NOTHROW(validate_params(p, 2));
}

TEST_CASE("parameter validation names the first violated constraint") {
    SolverParams p;

    SECTION("theta on the boundary") {
        p.theta = 1.0;
        REQUIRE_THROWS_WITH(validate_params(p, 2), ContainsSubstring("theta must lie in (0,1)"));
    }
    SECTION("c = 0 excluded") {
        p.c = 0.0;
        REQUIRE_THROWS_WITH(validate_params(p, 2), ContainsSubstring("c must lie in (0,1]"));
    }
    SECTION("c = 1 allowed") {
        p.c = 1.0;
        REQUIRE_NOTHROW(validate_params(p, 2));
    }
    SECTION("delta = 1 excluded") {
        p.delta = 1.0;
        REQUIRE_THROWS_WITH(validate_params(p, 2), ContainsSubstring("delta"));
    }
    SECTION("gamma must be positive") {
        p.gamma = 0.0;
        REQUIRE_THROWS_WITH(validate_params(p, 2), ContainsSubstring("gamma"));
    }
    SECTION("initial step length mismatch") {
        p.initial_steps = {1.0};
        REQUIRE_THROWS_WITH(validate_params(p, 2), ContainsSubstring("initial_steps"));
    }
    SECTION("initial steps must be positive") {
        p.initial_steps = {1.0, 0.0};
        REQUIRE_THROWS_WITH(validate_params(p, 2), ContainsSubstring("initial_steps[1]"));
    }
    SECTION("stop_delta positive") {
        p.stop_delta = 0.0;
        REQUIRE_THROWS_WITH(validate_params(p, 2), ContainsSubstring("stop_delta"));
    }
    SECTION("budgets positive") {
        p.max_evaluations = 0;
        REQUIRE_THROWS_WITH(validate_params(p, 2), ContainsSubstring("max_evaluations"));
    }
}

TEST_CASE("bounds validation") {
    SECTION("strict ordering required") {
        Bounds b{{0.0}, {0.0}};
        REQUIRE_THROWS_AS(b.validate(), std::invalid_argument);
    }
    SECTION("NaN rejected") {
        Bounds b{{std::nan("")}, {1.0}};
        REQUIRE_THROWS_WITH(b.validate(), ContainsSubstring("NaN"));
    }
    SECTION("infinite entries are fine") {
        Bounds b{{-kInfinity, 0.0}, {kInfinity, kInfinity}};
        REQUIRE_NOTHROW(b.validate());
        REQUIRE(b.contains({1e300, 0.5}));
    }
    SECTION("containment is exact") {
        Bounds b{{0.0}, {1.0}};
        REQUIRE(b.contains({0.0}));
        REQUIRE(b.contains({1.0}));
        REQUIRE_FALSE(b.contains({std::nextafter(1.0, 2.0)}));
        REQUIRE_FALSE(b.contains({std::nan("")}));
    }
}

static Problem square_problem() {
    Problem p;
    p.n = 1;
    p.bounds = uniform_box(1, -10.0, 10.0);
    p.objective = [](const Vector& x) { return x[0] * x[0]; };
    return p;
}

TEST_CASE("evaluate counts exactly once per call") {
    Problem p = square_problem();
    EvalCounter counter;
    REQUIRE(evaluate(p, counter, {2.0}) == 4.0);
    REQUIRE(counter.count == 1);

    SECTION("no caching: repeated points still count") {
        evaluate(p, counter, {0.0});
        evaluate(p, counter, {0.0});
        REQUIRE(counter.count == 3);
    }
}

TEST_CASE("evaluate rejects infeasible points before counting") {
    Problem p = square_problem();
    EvalCounter counter;
    REQUIRE_THROWS_AS(evaluate(p, counter, {11.0}), std::domain_error);
    REQUIRE(counter.count == 0);
}
