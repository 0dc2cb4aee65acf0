#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "slaterec/core/errors.hpp"
#include "slaterec/learner/dataset.hpp"
#include "slaterec/mdp/low_rank.hpp"

namespace slaterec::learner {

inline constexpr double kProbabilityFloor = 1e-12;

struct Likelihood {
  double mean = 0.0;     // empirical mean log-likelihood over D + D'
  bool clamped = false;  // some tuple hit the probability floor
};

/// ln sum_{i in a} P(i|s,a) mu(s')^T phi(s,i), floored at 1e-12 inside the log.
template <class State, class Model>
  requires LowRankFeatureModel<Model, State>
double tuple_log_likelihood(const Model& model, const TransitionTuple<State>& t, bool* clamped) {
  double p = t.choice[t.slate.size()] * model.transition_prob(t.state, model.null_id(), t.next);
  for (std::size_t j = 0; j < t.slate.size(); ++j) {
    p += t.choice[j] * model.transition_prob(t.state, t.slate[j], t.next);
  }
  if (!(p >= kProbabilityFloor)) {
    if (clamped) *clamped = true;
    p = kProbabilityFloor;
  }
  return std::log(p);
}

template <class State, class Model>
  requires LowRankFeatureModel<Model, State>
Likelihood mean_log_likelihood(const Model& model, const Datasets<State>& data) {
  Likelihood out;
  double total = 0.0;
  data.for_each([&](const TransitionTuple<State>& t) {
    total += tuple_log_likelihood(model, t, &out.clamped);
  });
  out.mean = data.empty() ? 0.0 : total / double(data.num_samples());
  return out;
}

struct FiniteMleResult {
  std::size_t index = 0;
  Likelihood likelihood;
  std::vector<double> scores;  // mean log-likelihood of every member
};

/// Exact argmax over an enumerated model class; the first maximizer wins ties.
template <class State, class Model>
  requires LowRankFeatureModel<Model, State>
FiniteMleResult mle_fit(const Datasets<State>& data, std::span<const Model> members) {
  if (data.empty()) throw ConfigError("mle_fit needs a nonempty dataset");
  if (members.empty()) throw ConfigError("mle_fit needs a nonempty model class");
  FiniteMleResult out;
  out.scores.reserve(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    const Likelihood l = mean_log_likelihood(members[m], data);
    out.scores.push_back(l.mean);
    if (m == 0 || l.mean > out.likelihood.mean) {
      out.index = m;
      out.likelihood = l;
    }
  }
  return out;
}

}  // namespace slaterec::learner
