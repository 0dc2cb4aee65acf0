#pragma once

#include <span>
#include <string>
#include <vector>

#include "slaterec/core/distribution.hpp"
#include "slaterec/core/errors.hpp"

namespace slaterec {

/// P(s'|s,a) = sum_i P(i|s,a) P(s'|s,i) over the k slate slots plus null.
/// `item_next[j]` is the next-state distribution after consuming slot j.
inline std::vector<double> factored_transition(std::span<const double> choice,
                                               std::span<const std::vector<double>> item_next) {
  if (choice.size() != item_next.size()) {
    throw ModelError("factored_transition: one next-state distribution per slot required");
  }
  if (!is_distribution(choice, 1e-9)) {
    throw InvalidDistribution("factored_transition: choice probabilities invalid");
  }
  const std::size_t num_next = item_next.front().size();
  std::vector<double> out(num_next, 0.0);
  for (std::size_t j = 0; j < choice.size(); ++j) {
    if (item_next[j].size() != num_next || !is_distribution(item_next[j], 1e-9)) {
      throw ModelError("factored_transition: item-conditional distribution " + std::to_string(j) +
                       " is invalid");
    }
    for (std::size_t t = 0; t < num_next; ++t) out[t] += choice[j] * item_next[j][t];
  }
  return out;
}

/// r(s,a) = sum_i P(i|s,a) r(s,i); `item_reward` has k entries, the null slot pays 0.
inline double factored_reward(std::span<const double> choice, std::span<const double> item_reward) {
  double r = 0.0;
  for (std::size_t j = 0; j < item_reward.size(); ++j) r += choice[j] * item_reward[j];
  return r;
}

}  // namespace slaterec
