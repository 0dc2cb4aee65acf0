#pragma once

#include <utility>
#include <vector>

#include "slaterec/core/slate.hpp"

namespace slaterec::learner {

/// One observed (s, a, s') triple. The known choice distribution P(.|s,a)
/// and the realized response travel with it so the likelihood and the
/// covariance never need to re-query the environment.
template <class State>
struct TransitionTuple {
  State state;
  Slate slate;
  State next;
  std::vector<double> choice;
  UserResponse response;
};

/// D and D'. Append-only; after episode n both hold exactly n tuples.
template <class State>
struct Datasets {
  std::vector<TransitionTuple<State>> primary;
  std::vector<TransitionTuple<State>> secondary;

  std::size_t episodes() const { return primary.size(); }
  std::size_t num_samples() const { return primary.size() + secondary.size(); }
  bool empty() const { return primary.empty() && secondary.empty(); }

  void append(TransitionTuple<State> first, TransitionTuple<State> second) {
    primary.push_back(std::move(first));
    secondary.push_back(std::move(second));
  }

  // Visits D then D'.
  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& t : primary) fn(t);
    for (const auto& t : secondary) fn(t);
  }
};

}  // namespace slaterec::learner
