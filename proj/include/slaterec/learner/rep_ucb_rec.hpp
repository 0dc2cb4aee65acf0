#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/errors.hpp"
#include "slaterec/learner/covariance.hpp"
#include "slaterec/learner/dataset.hpp"
#include "slaterec/learner/schedule.hpp"
#include "slaterec/mdp/backend.hpp"
#include "slaterec/mdp/rollin.hpp"
#include "slaterec/mdp/uniform_slate.hpp"

namespace slaterec::learner {

/// How the two post-roll-in actions are chosen.
enum class Collection {
  uniform_slate,  // exploration action: random target + least-likely fillers
  on_policy,      // keep following the behaviour policy (epsilon-greedy baseline)
};

template <Backend B, PolicyFor<typename B::State> P>
std::pair<TransitionTuple<typename B::State>, TransitionTuple<typename B::State>>
collect_episode_tuples(B& backend, const P& policy, Rng& rng,
                       Collection mode = Collection::uniform_slate) {
  using State = typename B::State;
  auto act = [&](const State& s) {
    if (mode == Collection::on_policy) return policy(s, rng);
    return uniform_slate(backend.propensities(), backend.slate_size(), rng);
  };
  RollIn<State> start = rollin_sample(backend, policy, rng);

  Slate a = act(start.state);
  auto step = backend.step(a, rng);
  TransitionTuple<State> first{std::move(start.state), std::move(a), step.next, std::move(step.choice),
                               step.response};

  Slate a2 = act(first.next);
  step = backend.step(a2, rng);
  TransitionTuple<State> second{first.next, std::move(a2), std::move(step.next), std::move(step.choice),
                                step.response};
  return {std::move(first), std::move(second)};
}

struct EpisodeMetrics {
  std::size_t episode = 0;
  std::size_t num_samples = 0;
  std::optional<double> log_likelihood;
  std::optional<double> mean_bonus;
  std::optional<double> value_learned;
  std::optional<double> value_true;
  std::optional<double> suboptimality;
  std::optional<double> wallclock_ms;
};

template <class Model>
struct FitOutcome {
  Model model;
  double log_likelihood = 0.0;
  bool clamped = false;
};

template <class Policy>
struct PlanOutcome {
  Policy policy;
  std::optional<double> value_learned;
};

/// What the outer loop needs from a backend-specific bundle.
template <class C>
concept LearnerComponents = requires(C& c, const typename C::Policy& pi,
                                     const Datasets<typename C::State>& data,
                                     const typename C::Model& model, const EllipticalBonus* bonus,
                                     Rng& rng) {
  typename C::State;
  typename C::Model;
  typename C::Policy;
  { c.initial_policy() } -> std::same_as<typename C::Policy>;
  { c.fit(data, rng) } -> std::same_as<FitOutcome<typename C::Model>>;
  { c.plan(model, bonus, rng) } -> std::same_as<PlanOutcome<typename C::Policy>>;
  { c.deploy(pi, 0.0) } -> std::same_as<typename C::Policy>;
  { c.true_value(pi) } -> std::same_as<std::optional<double>>;
  { c.optimal_value() } -> std::same_as<std::optional<double>>;
};

struct LearnerOptions {
  std::size_t episodes = 1;
  bool use_bonus = true;
  Collection collection = Collection::uniform_slate;
  double deploy_epsilon = 0.0;  // mix each planned policy with uniform before deploying
  bool record_wallclock = false;
};

/// Component failure tagged with the episode it happened in.
class EpisodeError : public Error {
 public:
  EpisodeError(std::size_t episode, const std::string& what)
      : Error("episode " + std::to_string(episode) + ": " + what), episode_(episode) {}
  std::size_t episode() const { return episode_; }

 private:
  std::size_t episode_;
};

template <class C>
struct LearnerRun {
  std::vector<typename C::Policy> policies;  // pi_1..pi_N as deployed
  std::vector<EpisodeMetrics> metrics;
  Datasets<typename C::State> data;
  std::optional<typename C::Model> model;  // last fit
  Eigen::MatrixXd covariance;              // last Sigma_hat
  Schedule schedule;                       // last (alpha, lambda)
};

/// Outer loop: roll in with pi_{n-1}, take two exploration actions, refit
/// the model on D + D', rebuild Sigma over D, plan against r + b. The
/// returned policy list defines the output mixture.
template <Backend B, LearnerComponents C>
  requires std::same_as<typename B::State, typename C::State> &&
           PolicyFor<typename C::Policy, typename C::State>
LearnerRun<C> run_learner(B& backend, C& comps, const HyperParams& hp, const LearnerOptions& opts,
                          Rng& rng, const std::function<void(const EpisodeMetrics&)>& sink = {}) {
  hp.validate();
  using Clock = std::chrono::steady_clock;
  LearnerRun<C> run;
  typename C::Policy behaviour = comps.initial_policy();
  const std::optional<double> optimum = comps.optimal_value();
  for (std::size_t n = 1; n <= opts.episodes; ++n) {
    const auto started = Clock::now();
    try {
      auto tuples = collect_episode_tuples(backend, behaviour, rng, opts.collection);
      run.data.append(std::move(tuples.first), std::move(tuples.second));
      run.schedule = schedule(n, hp);

      FitOutcome<typename C::Model> fit = comps.fit(run.data, rng);
      run.covariance = update_covariance(run.data.primary, fit.model, run.schedule.lambda);
      const EllipticalBonus bonus_fn(run.covariance, run.schedule.alpha);
      double bonus_sum = 0.0;
      for (const auto& t : run.data.primary) {
        bonus_sum += bonus_fn(averaged_feature(fit.model, t.state, t.slate, std::span<const double>(t.choice)));
      }

      PlanOutcome<typename C::Policy> plan = comps.plan(fit.model, opts.use_bonus ? &bonus_fn : nullptr, rng);
      typename C::Policy deployed =
          opts.deploy_epsilon > 0.0 ? comps.deploy(plan.policy, opts.deploy_epsilon) : plan.policy;

      EpisodeMetrics m;
      m.episode = n;
      m.num_samples = run.data.num_samples();
      m.log_likelihood = fit.log_likelihood;
      m.mean_bonus = bonus_sum / double(run.data.primary.size());
      m.value_learned = plan.value_learned;
      m.value_true = comps.true_value(deployed);
      if (m.value_true && optimum) m.suboptimality = *optimum - *m.value_true;
      if (opts.record_wallclock) {
        m.wallclock_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
      }
      if (sink) sink(m);
      run.metrics.push_back(m);
      run.model = std::move(fit.model);
      run.policies.push_back(deployed);
      behaviour = std::move(deployed);
    } catch (const EpisodeError&) {
      throw;
    } catch (const std::exception& e) {
      throw EpisodeError(n, e.what());
    }
  }
  return run;
}

}  // namespace slaterec::learner
