#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "slaterec/learner/mle.hpp"
#include "slaterec/learner/pg_planner.hpp"
#include "slaterec/learner/rep_ucb_rec.hpp"
#include "slaterec/learner/response_model.hpp"
#include "slaterec/learner/tabular_planner.hpp"
#include "slaterec/mdp/evaluate.hpp"
#include "slaterec/mdp/simulator_backend.hpp"
#include "slaterec/oracle/tabular.hpp"

namespace slaterec::learner {

/// Tabular backend: finite model class, exact planning over all k-subsets.
/// The instance's ground truth is only touched by the evaluation hooks.
class TabularComponents {
 public:
  using State = std::size_t;
  using Model = TabularLowRankModel;
  using Policy = TabularPolicy;

  TabularComponents(std::shared_ptr<const oracle::TabularLowRankMDP> mdp, std::vector<Model> members,
                    double planner_tol = 1e-8)
      : mdp_(std::move(mdp)), members_(std::move(members)), tol_(planner_tol),
        optimum_(oracle::optimal_value(*mdp_)) {}

  Policy initial_policy() const { return TabularPolicy::uniform(mdp_->action_set(), mdp_->num_states()); }

  FitOutcome<Model> fit(const Datasets<State>& data, Rng&) {
    const FiniteMleResult r = mle_fit(data, std::span<const Model>(members_));
    last_index_ = r.index;
    return FitOutcome<Model>{members_[r.index], r.likelihood.mean, r.likelihood.clamped};
  }

  PlanOutcome<Policy> plan(const Model& model, const EllipticalBonus* bonus, Rng&) const {
    TabularPlan p = plan_tabular(mdp_->problem(), mdp_->action_set(), model, bonus, tol_);
    return PlanOutcome<Policy>{std::move(p.policy), p.value_learned};
  }

  Policy deploy(const Policy& pi, double eps) const { return pi.mixed_with_uniform(eps); }

  std::optional<double> true_value(const Policy& pi) const {
    return policy_evaluate(*mdp_, pi, EvalMode::exact).value;
  }

  std::optional<double> optimal_value() const { return optimum_; }

  std::size_t last_index() const { return last_index_; }
  const std::vector<Model>& members() const { return members_; }

 private:
  std::shared_ptr<const oracle::TabularLowRankMDP> mdp_;
  std::vector<Model> members_;
  double tol_;
  double optimum_;
  std::size_t last_index_ = 0;
};

/// Simulator backend: parametric response model, policy-gradient planning
/// over target items, Monte-Carlo evaluation in a private copy of the
/// environment on its own generator.
class SimulatorComponents {
 public:
  using State = HistoryState;
  using Model = ResponseModel;
  using Policy = TargetItemPolicy;

  struct Options {
    std::size_t rank = 3;
    std::size_t buckets = 8;
    ResponseFitOptions fit;
    PolicyGradientOptions planner;
    std::size_t eval_rollouts = 200;
  };

  SimulatorComponents(const SimulatorBackend& backend, Options opts, Rng& init_rng, std::uint64_t eval_seed)
      : estimator_(std::make_shared<InterestEstimator>(backend.environment().catalog_ptr(),
                                                       backend.discount())),
        eval_backend_(backend), eval_seed_(eval_seed), opts_(opts), window_(backend.window()),
        discount_(backend.discount()), slate_size_(backend.slate_size()),
        model_(estimator_, backend.num_items(), opts.rank, opts.buckets, init_rng),
        last_policy_(estimator_, backend.slate_size()) {}

  Policy initial_policy() const { return TargetItemPolicy(estimator_, slate_size_); }

  FitOutcome<Model> fit(const Datasets<State>& data, Rng&) {
    ResponseFit r = fit_response_model(data, model_, opts_.fit);
    model_ = r.model;
    return FitOutcome<Model>{std::move(r.model), r.likelihood.mean, r.likelihood.clamped};
  }

  PlanOutcome<Policy> plan(const Model& model, const EllipticalBonus* bonus, Rng& rng) {
    PolicyGradientPlan p =
        plan_policy_gradient(model, bonus, last_policy_, discount_, window_, opts_.planner, rng);
    last_policy_ = p.policy;
    return PlanOutcome<Policy>{std::move(p.policy), p.value_learned};
  }

  Policy deploy(const Policy& pi, double eps) const { return pi.with_epsilon(eps); }

  template <PolicyFor<HistoryState> P>
  std::optional<double> true_value(const P& pi) {
    if (opts_.eval_rollouts == 0) return std::nullopt;
    Rng rng(eval_seed_);
    return policy_evaluate(eval_backend_, pi, EvalMode::monte_carlo, rng, opts_.eval_rollouts).value;
  }

  std::optional<double> optimal_value() const { return std::nullopt; }

  std::shared_ptr<const InterestEstimator> estimator() const { return estimator_; }

 private:
  std::shared_ptr<const InterestEstimator> estimator_;
  SimulatorBackend eval_backend_;
  std::uint64_t eval_seed_;
  Options opts_;
  std::size_t window_;
  double discount_;
  std::size_t slate_size_;
  Model model_;
  Policy last_policy_;
};

}  // namespace slaterec::learner
