#pragma once

#include <memory>
#include <vector>

#include "slaterec/env/choice.hpp"
#include "slaterec/mdp/backend.hpp"
#include "slaterec/oracle/tabular.hpp"

namespace slaterec::oracle {

/// Sampleable view of a tabular instance with atomic integer states.
class TabularBackend {
 public:
  using State = std::size_t;

  explicit TabularBackend(std::shared_ptr<const TabularLowRankMDP> mdp) : mdp_(std::move(mdp)) {
    const auto& d0 = mdp_->initial();
    initial_.assign(d0.data(), d0.data() + d0.size());
  }

  State reset(Rng& rng) {
    state_ = sample_index(rng, initial_);
    return state_;
  }

  StepResult<State> step(const Slate& slate, Rng& rng) {
    const auto& problem = mdp_->problem();
    validate_slate(slate, problem.num_items, problem.slate_size);
    StepResult<State> out;
    out.choice = problem.choice(state_, slate);
    out.response.chosen = env::sample_choice(rng, out.choice);
    const ItemId consumed = consumed_item(out.response, slate, problem.num_items);
    out.reward = problem.item_reward(state_, consumed);
    out.response.engagement = out.reward;
    const Eigen::VectorXd next = mdp_->truth().next_state_distribution(state_, consumed);
    state_ = sample_index(rng, std::span<const double>(next.data(), static_cast<std::size_t>(next.size())));
    out.next = state_;
    return out;
  }

  State state() const { return state_; }
  void set_state(State s) { state_ = s; }
  std::vector<double> choice_probs(const Slate& slate) const {
    return mdp_->problem().choice(state_, slate);
  }
  std::vector<double> propensities() const { return mdp_->problem().propensities(state_); }
  std::size_t num_items() const { return mdp_->problem().num_items; }
  std::size_t slate_size() const { return mdp_->problem().slate_size; }
  double discount() const { return mdp_->discount(); }
  const TabularLowRankMDP& mdp() const { return *mdp_; }

 private:
  std::shared_ptr<const TabularLowRankMDP> mdp_;
  std::vector<double> initial_;
  State state_ = 0;
};

}  // namespace slaterec::oracle
