#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "tmpc/aggregate.hpp"
#include "tmpc/errors.hpp"
#include "tmpc/rng.hpp"

using namespace tmpc;

namespace {

// Reference softmax at extended precision, independent of the implementation.
std::vector<double> softmax_oracle(const std::vector<double>& utilities, double lambda) {
    long double sum = 0.0L;
    std::vector<long double> raw(utilities.size());
    for (std::size_t i = 0; i < utilities.size(); ++i) {
        raw[i] = expl(static_cast<long double>(utilities[i]) / static_cast<long double>(lambda));
        sum += raw[i];
    }
    std::vector<double> out(utilities.size());
    for (std::size_t i = 0; i < utilities.size(); ++i) {
        out[i] = static_cast<double>(raw[i] / sum);
    }
    return out;
}

Trajectory rollout_with(std::vector<double> scores, const std::string& id) {
    Trajectory t;
    t.origin = PromptState{"p", TaskKind::synthetic};
    for (std::size_t i = 0; i < scores.size(); ++i) {
        t.segments.push_back(Segment{id + "-" + std::to_string(i) + ".", i});
    }
    t.segment_scores = std::move(scores);
    t.rollout_id = id;
    return t;
}

} // namespace

TEST_CASE("equal utilities weigh uniformly") {
    const auto w = mppi_weights({2.0, 2.0, 2.0}, 1.0);
    for (double v : w) {
        CHECK(std::abs(v - 1.0 / 3.0) < 1e-15);
    }
}

TEST_CASE("the [0, ln 3] case is exact") {
    const auto w = mppi_weights({0.0, std::log(3.0)}, 1.0);
    CHECK(std::abs(w[0] - 0.25) < 1e-12);
    CHECK(std::abs(w[1] - 0.75) < 1e-12);
}

TEST_CASE("small lambda concentrates mass, matching the high-precision oracle") {
    const std::vector<double> utilities = {1.0, 2.0};
    const auto w = mppi_weights(utilities, 0.01);
    CHECK(std::abs(w[0] - 0.0) < 1e-6);
    CHECK(std::abs(w[1] - 1.0) < 1e-6);

    const auto oracle = softmax_oracle(utilities, 0.01);
    CHECK(std::abs(w[0] - oracle[0]) < 1e-12);
    CHECK(std::abs(w[1] - oracle[1]) < 1e-12);
}

TEST_CASE("weights sum to one and match the oracle on random inputs") {
    Rng rng(5);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> utilities(1 + rng.next_index(12));
        for (double& u : utilities) {
            u = rng.next_gaussian() * 5.0;
        }
        const double lambda = 0.1 + rng.next_double() * 5.0;
        const auto w = mppi_weights(utilities, lambda);

        double sum = 0.0;
        for (double v : w) {
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);

        const auto oracle = softmax_oracle(utilities, lambda);
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(std::abs(w[i] - oracle[i]) < 1e-9);
        }
        // Ordering of weights matches ordering of utilities.
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            for (std::size_t j = i + 1; j < w.size(); ++j) {
                if (utilities[i] < utilities[j]) {
                    CHECK(w[i] <= w[j]);
                }
            }
        }
    }
}

TEST_CASE("weights are shift invariant") {
    Rng rng(9);
    for (const double shift : {-50.0, 1.0, 17.25, 100.0}) {
        std::vector<double> utilities(6);
        for (double& u : utilities) {
            u = rng.next_gaussian() * 3.0;
        }
        std::vector<double> shifted = utilities;
        for (double& u : shifted) {
            u += shift;
        }
        const auto w0 = mppi_weights(utilities, 0.7);
        const auto w1 = mppi_weights(shifted, 0.7);
        for (std::size_t i = 0; i < w0.size(); ++i) {
            CHECK(std::abs(w0[i] - w1[i]) < 1e-12);
        }
    }
}

TEST_CASE("lambda limits: argmax at 1e-4, uniform at 1e6") {
    const std::vector<double> utilities = {0.3, 1.7, -2.0, 0.9};
    const auto sharp = mppi_weights(utilities, 1e-4);
    CHECK(*std::max_element(sharp.begin(), sharp.end()) > 0.999);
    CHECK(sharp[1] > 0.999);

    const auto flat = mppi_weights(utilities, 1e6);
    for (double v : flat) {
        CHECK(std::abs(v - 0.25) < 1e-3);
    }
}

TEST_CASE("mppi_weights rejects bad input") {
    CHECK_THROWS_AS(mppi_weights({}, 1.0), ContractViolation);
    CHECK_THROWS_AS(mppi_weights({1.0, std::nan("")}, 1.0), ContractViolation);
    CHECK_THROWS_AS(mppi_weights({1.0}, 0.0), ContractViolation);
    CHECK_THROWS_AS(mppi_weights({1.0}, -2.0), ContractViolation);
}

TEST_CASE("tmpc_select keeps threshold-qualified segments across rollouts") {
    const std::vector<Trajectory> rollouts = {rollout_with({0.5}, "r0"),
                                              rollout_with({2.0}, "r1")};
    const auto selected = tmpc_select(rollouts, AggregationConfig{1.0, 1.0});
    REQUIRE(selected.size() == 1);
    CHECK(selected[0].source_rollout == "r1");
    CHECK(selected[0].score == 2.0);
    CHECK(selected[0].rollout_weight > 0.0);
}

TEST_CASE("tmpc_select yields nothing when every rollout is below alpha") {
    const std::vector<Trajectory> rollouts = {rollout_with({0.1, 0.2}, "a"),
                                              rollout_with({0.3}, "b"),
                                              rollout_with({0.0}, "c")};
    CHECK(tmpc_select(rollouts, AggregationConfig{1.0, 1.0}).empty());
}

TEST_CASE("tmpc_select membership equals the flat filter and ignores order") {
    Rng rng(77);
    for (int round = 0; round < 50; ++round) {
        std::vector<Trajectory> rollouts;
        for (int k = 0; k < 5; ++k) {
            std::vector<double> scores(1 + rng.next_index(5));
            for (double& s : scores) {
                s = rng.next_gaussian();
            }
            rollouts.push_back(rollout_with(scores, "k" + std::to_string(k)));
        }
        const AggregationConfig config{1.0, 0.3};

        std::set<std::string> expected;
        for (const Trajectory& r : rollouts) {
            const auto& scores = *r.segment_scores;
            for (std::size_t i = 0; i < scores.size(); ++i) {
                if (scores[i] >= config.alpha) {
                    expected.insert(r.segments[i].text);
                }
            }
        }

        std::set<std::string> got;
        for (const SubgoalEntry& e : tmpc_select(rollouts, config)) {
            got.insert(e.payload_text());
        }
        CHECK(got == expected);

        std::vector<Trajectory> reversed(rollouts.rbegin(), rollouts.rend());
        std::set<std::string> got_reversed;
        for (const SubgoalEntry& e : tmpc_select(reversed, config)) {
            got_reversed.insert(e.payload_text());
        }
        CHECK(got_reversed == expected);
    }
}

TEST_CASE("tmpc_select propagates the batch weights") {
    const std::vector<Trajectory> rollouts = {rollout_with({0.0}, "low"),
                                              rollout_with({std::log(3.0)}, "high")};
    const auto selected = tmpc_select(rollouts, AggregationConfig{1.0, -1.0});
    REQUIRE(selected.size() == 2);
    CHECK(std::abs(selected[0].rollout_weight - 0.25) < 1e-12);
    CHECK(std::abs(selected[1].rollout_weight - 0.75) < 1e-12);
}
