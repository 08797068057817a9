#pragma once

#include <vector>

#include "tmpc/mdp.hpp"
#include "tmpc/subgoal.hpp"

namespace tmpc {

struct AggregationConfig {
    double lambda = 1.0; // exploration-exploitation temperature, > 0
    double alpha = 0.0;  // selection threshold, shared with the subgoal buffer
};

// Soft utility weights w_i proportional to exp(J_i / lambda), max-shifted for
// numeric stability, normalized to sum 1. Shift-invariant; ordering of the
// weights matches the ordering of the utilities. Throws ContractViolation on
// empty input, non-finite utilities, or lambda <= 0.
std::vector<double> mppi_weights(const std::vector<double>& utilities, double lambda);

// Discrete aggregation over a batch of scored rollouts: the union of each
// rollout's threshold-qualified segments, annotated with the rollout's MPPI
// weight as ranking metadata. Membership equals a flat filter over every
// (rollout, segment) pair.
std::vector<SubgoalEntry> tmpc_select(const std::vector<Trajectory>& rollouts,
                                      const AggregationConfig& config);

} // namespace tmpc
