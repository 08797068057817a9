#include <doctest.h>

#include "tmpc/errors.hpp"
#include "tmpc/mdp.hpp"
#include "tmpc/rng.hpp"

using namespace tmpc;

namespace {

Trajectory scored(std::vector<double> scores) {
    Trajectory t;
    t.origin = PromptState{"prompt", TaskKind::synthetic};
    for (std::size_t i = 0; i < scores.size(); ++i) {
        t.segments.push_back(Segment{"s" + std::to_string(i) + ".", i});
    }
    t.segment_scores = std::move(scores);
    return t;
}

} // namespace

TEST_CASE("advance appends one action") {
    Trajectory empty;
    const Trajectory one = advance(empty, Segment{"hello", 0});
    CHECK(one.segments.size() == 1);
    CHECK(one.segments[0].text == "hello");
    CHECK(empty.segments.empty()); // input untouched

    const Trajectory two = advance(one, Segment{"world", 1});
    CHECK(two.segments.size() == 2);
    CHECK(two.segments[0].text == "hello");
    CHECK(two.segments[1].text == "world");
}

TEST_CASE("advance rejects index mismatches") {
    Trajectory one;
    one.segments.push_back(Segment{"hello", 0});
    CHECK_THROWS_AS(advance(one, Segment{"x", 0}), ContractViolation);
    CHECK_THROWS_AS(advance(one, Segment{"x", 2}), ContractViolation);
}

TEST_CASE("advance is deterministic") {
    Trajectory base;
    base.segments.push_back(Segment{"a", 0});
    const Trajectory first = advance(base, Segment{"b", 1});
    const Trajectory second = advance(base, Segment{"b", 1});
    REQUIRE(first.segments.size() == second.segments.size());
    for (std::size_t i = 0; i < first.segments.size(); ++i) {
        CHECK(first.segments[i].text == second.segments[i].text);
        CHECK(first.segments[i].index == second.segments[i].index);
    }
}

TEST_CASE("prefix property: states rebuild by reconstruction") {
    Rng rng(7);
    for (int round = 0; round < 50; ++round) {
        const std::size_t length = 1 + rng.next_index(8);
        Trajectory full;
        for (std::size_t i = 0; i < length; ++i) {
            full = advance(full, Segment{"w" + std::to_string(rng.next_index(100)), i});
        }
        Trajectory rebuilt;
        for (std::size_t t = 0; t < length; ++t) {
            rebuilt = advance(rebuilt, full.segments[t]);
            // State at step t equals state at t-1 plus segment t-1.
            for (std::size_t k = 0; k <= t; ++k) {
                CHECK(rebuilt.segments[k].text == full.segments[k].text);
            }
        }
    }
}

TEST_CASE("trajectory_utility sums segment scores") {
    CHECK(trajectory_utility(scored({0.5, 0.3, 0.2})) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trajectory_utility(scored({})) == 0.0);
    CHECK(trajectory_utility(scored({-1.0, 2.5})) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("trajectory_utility requires scores") {
    Trajectory t;
    t.segments.push_back(Segment{"a", 0});
    CHECK_THROWS_AS(trajectory_utility(t), UnscoredTrajectoryError);
}

TEST_CASE("utility is linear under concatenation") {
    Rng rng(11);
    for (int round = 0; round < 100; ++round) {
        std::vector<double> a(rng.next_index(6));
        std::vector<double> b(rng.next_index(6));
        for (double& v : a) {
            v = rng.next_gaussian();
        }
        for (double& v : b) {
            v = rng.next_gaussian();
        }
        std::vector<double> both = a;
        both.insert(both.end(), b.begin(), b.end());
        const double lhs = trajectory_utility(scored(both));
        const double rhs = trajectory_utility(scored(a)) + trajectory_utility(scored(b));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("trajectory_text joins segments with single spaces") {
    Trajectory t;
    t.segments = {Segment{"alpha.", 0}, Segment{"bravo.", 1}};
    CHECK(trajectory_text(t) == "alpha. bravo.");
}

TEST_CASE("make_prompt_state rejects empty prompts") {
    CHECK_THROWS_AS(make_prompt_state("", TaskKind::long_form), ContractViolation);
    CHECK(make_prompt_state("q", TaskKind::long_form).prompt_text == "q");
}
