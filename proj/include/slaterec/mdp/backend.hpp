#pragma once

#include <concepts>
#include <cstddef>
#include <vector>

#include "slaterec/core/rng.hpp"
#include "slaterec/core/slate.hpp"

namespace slaterec {

template <class State>
struct StepResult {
  State next;
  UserResponse response;
  std::vector<double> choice;  // known P(i|s,a) the response was drawn from
  double reward = 0.0;         // known r(s, consumed item)
};

/// A sampleable episodic environment the learner can only reset to d0 and
/// step forward. It also exposes the quantities treated as known: the
/// item-level choice function and per-item selection propensities at the
/// current state.
template <class B>
concept Backend = requires(B& b, const B& cb, const Slate& a, Rng& rng) {
  typename B::State;
  { b.reset(rng) } -> std::convertible_to<typename B::State>;
  { b.step(a, rng) } -> std::same_as<StepResult<typename B::State>>;
  { cb.state() } -> std::convertible_to<typename B::State>;
  { cb.choice_probs(a) } -> std::same_as<std::vector<double>>;
  { cb.propensities() } -> std::same_as<std::vector<double>>;
  { cb.num_items() } -> std::convertible_to<std::size_t>;
  { cb.slate_size() } -> std::convertible_to<std::size_t>;
  { cb.discount() } -> std::convertible_to<double>;
};

template <class P, class State>
concept PolicyFor = requires(const P& p, const State& s, Rng& rng) {
  { p(s, rng) } -> std::same_as<Slate>;
};

}  // namespace slaterec
