#pragma once

#include <cstddef>

#include "slaterec/mdp/backend.hpp"

namespace slaterec {

template <class State>
struct RollIn {
  State state;
  std::size_t length = 0;  // actions executed before termination
};

/// Draws s ~ d^pi: start from d0; before every action terminate with
/// probability 1 - gamma, otherwise act with pi and step.
template <Backend B, PolicyFor<typename B::State> P>
RollIn<typename B::State> rollin_sample(B& backend, const P& policy, Rng& rng) {
  using State = typename B::State;
  const double stop = 1.0 - backend.discount();
  RollIn<State> out{State(backend.reset(rng)), 0};
  while (!rng.bernoulli(stop)) {
    Slate a = policy(out.state, rng);
    out.state = backend.step(a, rng).next;
    ++out.length;
  }
  return out;
}

}  // namespace slaterec
