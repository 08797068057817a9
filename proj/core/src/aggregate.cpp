#include "tmpc/aggregate.hpp"

#include <algorithm>
#include <cmath>

#include "tmpc/errors.hpp"

namespace tmpc {

std::vector<double> mppi_weights(const std::vector<double>& utilities, double lambda) {
    if (utilities.empty()) {
        throw ContractViolation("mppi_weights: utilities must be non-empty");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ContractViolation("mppi_weights: lambda must be positive and finite");
    }
    for (double u : utilities) {
        if (!std::isfinite(u)) {
            throw ContractViolation("mppi_weights: utilities must be finite");
        }
    }

    const double max_u = *std::max_element(utilities.begin(), utilities.end());
    std::vector<double> weights(utilities.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < utilities.size(); ++i) {
        weights[i] = std::exp((utilities[i] - max_u) / lambda);
        sum += weights[i];
    }
    for (double& w : weights) {
        w /= sum;
    }
    return weights;
}

std::vector<SubgoalEntry> tmpc_select(const std::vector<Trajectory>& rollouts,
                                      const AggregationConfig& config) {
    std::vector<double> utilities;
    utilities.reserve(rollouts.size());
    for (const Trajectory& rollout : rollouts) {
        utilities.push_back(trajectory_utility(rollout)); // throws if unscored
    }

    std::vector<SubgoalEntry> selected;
    if (rollouts.empty()) {
        return selected;
    }
    const std::vector<double> weights = mppi_weights(utilities, config.lambda);
    for (std::size_t i = 0; i < rollouts.size(); ++i) {
        std::vector<SubgoalEntry> entries = identify_subgoals(rollouts[i], config.alpha);
        for (SubgoalEntry& entry : entries) {
            entry.rollout_weight = weights[i];
            selected.push_back(std::move(entry));
        }
    }
    return selected;
}

} // namespace tmpc
