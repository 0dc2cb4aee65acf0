#pragma once

#include <cmath>
#include <vector>

#include "slaterec/env/environment.hpp"
#include "slaterec/mdp/backend.hpp"
#include "slaterec/mdp/history.hpp"

namespace slaterec {

/// Learner-facing view of the simulated user: the observable state is the
/// interaction window, while choice and engagement come from the hidden
/// interest vector.
class SimulatorBackend {
 public:
  using State = HistoryState;

  SimulatorBackend(env::Environment environment, std::size_t window)
      : env_(std::move(environment)), window_(window), history_(window) {}

  HistoryState reset(Rng& rng) {
    env_.reset(rng);
    history_ = HistoryState(window_);
    return history_;
  }

  StepResult<HistoryState> step(const Slate& slate, Rng& rng) {
    env::StepOutcome out = env_.step(slate, rng);
    history_.push(slate, out.response);
    return StepResult<HistoryState>{history_, out.response, std::move(out.choice),
                                    out.response.engagement};
  }

  const HistoryState& state() const { return history_; }
  std::vector<double> choice_probs(const Slate& slate) const { return env_.choice_probs_for(slate); }

  // Singleton-slate selection probability of every item at the current user.
  std::vector<double> propensities() const {
    const auto& catalog = env_.catalog();
    std::vector<double> out(catalog.size());
    for (ItemId i = 0; i < catalog.size(); ++i) {
      const double x = catalog[i].topics.dot(env_.user().interest);
      out[i] = 1.0 / (1.0 + std::exp(-x));
    }
    return out;
  }

  std::size_t num_items() const { return env_.catalog().size(); }
  std::size_t slate_size() const { return env_.slate_size(); }
  double discount() const { return env_.discount(); }
  std::size_t window() const { return window_; }
  const env::Environment& environment() const { return env_; }

 private:
  env::Environment env_;
  std::size_t window_;
  HistoryState history_;
};

}  // namespace slaterec
