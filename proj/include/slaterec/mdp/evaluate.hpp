#pragma once

#include <cmath>
#include <concepts>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/distribution.hpp"
#include "slaterec/core/errors.hpp"
#include "slaterec/mdp/backend.hpp"
#include "slaterec/mdp/policy.hpp"

namespace slaterec {

/// Finite MDP with an enumerated action set and expected rewards r(s,a).
template <class M>
concept EnumerableModel = requires(const M& m, std::size_t s, std::size_t a) {
  { m.num_states() } -> std::convertible_to<std::size_t>;
  { m.num_actions() } -> std::convertible_to<std::size_t>;
  { m.transition(s, a) } -> std::convertible_to<Eigen::VectorXd>;
  { m.reward(s, a) } -> std::convertible_to<double>;
  { m.initial() } -> std::convertible_to<Eigen::VectorXd>;
  { m.discount() } -> std::convertible_to<double>;
};

enum class EvalMode { exact, monte_carlo };

struct PolicyValue {
  double value = 0.0;
  double std_error = 0.0;  // zero in exact mode
  std::size_t rollouts = 0;
};

/// Smallest H with gamma^H <= tol; truncating there keeps MC bias below tol.
inline std::size_t truncation_horizon(double discount, double tol = 1e-12) {
  if (discount <= 0.0) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(tol) / std::log(discount)));
}

inline PolicyValue summarize(const std::vector<double>& returns) {
  PolicyValue v;
  v.rollouts = returns.size();
  if (returns.empty()) return v;
  double mean = 0.0;
  for (double g : returns) mean += g;
  mean /= double(returns.size());
  double var = 0.0;
  for (double g : returns) var += (g - mean) * (g - mean);
  if (returns.size() > 1) var /= double(returns.size() - 1);
  v.value = mean;
  v.std_error = std::sqrt(var / double(returns.size()));
  return v;
}

/// Per-state values of `pi` by solving (I - gamma P_pi) V = r_pi.
template <EnumerableModel M>
Eigen::VectorXd exact_state_values(const M& model, const TabularPolicy& pi) {
  const auto n = static_cast<Eigen::Index>(model.num_states());
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
      const double w = pi.prob(s, a);
      if (w == 0.0) continue;
      p_pi.row(static_cast<Eigen::Index>(s)) += w * model.transition(s, a).transpose();
      r_pi[static_cast<Eigen::Index>(s)] += w * model.reward(s, a);
    }
  }
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - model.discount() * p_pi;
  Eigen::VectorXd v = lhs.partialPivLu().solve(r_pi);
  const double residual = (lhs * v - r_pi).lpNorm<Eigen::Infinity>();
  if (!(residual <= 1e-10)) throw NumericalError("policy evaluation linear solve did not converge");
  return v;
}

template <EnumerableModel M>
PolicyValue policy_evaluate(const M& model, const TabularPolicy& pi, EvalMode mode,
                            Rng* rng = nullptr, std::size_t rollouts = 0) {
  if (mode == EvalMode::exact) {
    PolicyValue out;
    out.value = model.initial().dot(exact_state_values(model, pi));
    return out;
  }
  if (rng == nullptr || rollouts == 0) {
    throw ConfigError("Monte-Carlo evaluation needs a generator and a rollout count");
  }
  const double gamma = model.discount();
  const std::size_t horizon = truncation_horizon(gamma);
  const Eigen::VectorXd d0 = model.initial();
  const std::vector<double> init(d0.data(), d0.data() + d0.size());
  std::vector<double> returns;
  returns.reserve(rollouts);
  for (std::size_t m = 0; m < rollouts; ++m) {
    std::size_t s = sample_index(*rng, init);
    double g = 0.0;
    double scale = 1.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t a = pi.sample_action(s, *rng);
      g += scale * model.reward(s, a);
      const Eigen::VectorXd next = model.transition(s, a);
      s = sample_index(*rng, std::span<const double>(next.data(), static_cast<std::size_t>(next.size())));
      scale *= gamma;
    }
    returns.push_back(g);
  }
  return summarize(returns);
}

/// One truncated discounted return of `policy` in a sampleable backend.
template <Backend B, PolicyFor<typename B::State> P>
double sampled_return(B& backend, const P& policy, Rng& rng) {
  const double gamma = backend.discount();
  const std::size_t horizon = truncation_horizon(gamma);
  typename B::State s = backend.reset(rng);
  double g = 0.0;
  double scale = 1.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    auto step = backend.step(policy(s, rng), rng);
    g += scale * step.reward;
    s = std::move(step.next);
    scale *= gamma;
  }
  return g;
}

/// Sampleable backends only support Monte-Carlo evaluation.
template <Backend B, PolicyFor<typename B::State> P>
PolicyValue policy_evaluate(B& backend, const P& policy, EvalMode mode, Rng& rng,
                            std::size_t rollouts) {
  if (mode == EvalMode::exact) {
    throw UnsupportedMode("exact evaluation requires an enumerable model");
  }
  std::vector<double> returns;
  returns.reserve(rollouts);
  for (std::size_t m = 0; m < rollouts; ++m) returns.push_back(sampled_return(backend, policy, rng));
  return summarize(returns);
}

}  // namespace slaterec
