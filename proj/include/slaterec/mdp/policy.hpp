#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/distribution.hpp"
#include "slaterec/core/errors.hpp"
#include "slaterec/core/rng.hpp"
#include "slaterec/core/slate.hpp"

namespace slaterec {

/// Uniform over all k-subsets of the catalog, for any state type.
class UniformRandomPolicy {
 public:
  UniformRandomPolicy(std::size_t num_items, std::size_t k) : num_items_(num_items), k_(k) {
    if (k_ == 0 || k_ > num_items_) throw ConfigError("uniform policy needs 1 <= k <= |I|");
  }

  template <class State>
  Slate operator()(const State&, Rng& rng) const {
    std::vector<ItemId> pool(num_items_);
    std::iota(pool.begin(), pool.end(), ItemId{0});
    for (std::size_t j = 0; j < k_; ++j) {
      std::swap(pool[j], pool[j + rng.index(num_items_ - j)]);
    }
    pool.resize(k_);
    std::sort(pool.begin(), pool.end());
    return Slate{std::move(pool)};
  }

 private:
  std::size_t num_items_;
  std::size_t k_;
};

using ActionSet = std::vector<Slate>;

/// Stationary policy over atomic states: row s is a distribution over an
/// enumerated action set.
class TabularPolicy {
 public:
  TabularPolicy(std::shared_ptr<const ActionSet> actions, Eigen::MatrixXd probs)
      : actions_(std::move(actions)), probs_(std::move(probs)) {
    if (!actions_ || probs_.cols() != static_cast<Eigen::Index>(actions_->size())) {
      throw ConfigError("tabular policy: action set and probability table disagree");
    }
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
      const Eigen::VectorXd row = probs_.row(s).transpose();
      if (!is_distribution(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                           1e-9)) {
        throw InvalidDistribution("tabular policy row " + std::to_string(s) + " invalid");
      }
    }
  }

  static TabularPolicy deterministic(std::shared_ptr<const ActionSet> actions,
                                     const std::vector<std::size_t>& choice) {
    Eigen::MatrixXd probs =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(choice.size()),
                              static_cast<Eigen::Index>(actions->size()));
    for (std::size_t s = 0; s < choice.size(); ++s) {
      probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(choice[s])) = 1.0;
    }
    return TabularPolicy(std::move(actions), std::move(probs));
  }

  static TabularPolicy uniform(std::shared_ptr<const ActionSet> actions, std::size_t num_states) {
    const auto a = static_cast<Eigen::Index>(actions->size());
    Eigen::MatrixXd probs =
        Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(num_states), a, 1.0 / double(a));
    return TabularPolicy(std::move(actions), std::move(probs));
  }

  // (1 - eps) * this + eps * uniform over the action set.
  TabularPolicy mixed_with_uniform(double eps) const {
    Eigen::MatrixXd probs =
        (1.0 - eps) * probs_ + Eigen::MatrixXd::Constant(probs_.rows(), probs_.cols(),
                                                         eps / double(probs_.cols()));
    return TabularPolicy(actions_, std::move(probs));
  }

  std::size_t num_states() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t num_actions() const { return actions_->size(); }
  double prob(std::size_t s, std::size_t a) const {
    return probs_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  const Eigen::MatrixXd& probs() const { return probs_; }
  const ActionSet& actions() const { return *actions_; }
  std::shared_ptr<const ActionSet> action_set() const { return actions_; }

  std::size_t sample_action(std::size_t s, Rng& rng) const {
    const auto row = probs_.row(static_cast<Eigen::Index>(s));
    std::vector<double> p(row.begin(), row.end());
    return sample_index(rng, p);
  }

  Slate operator()(std::size_t s, Rng& rng) const { return (*actions_)[sample_action(s, rng)]; }

 private:
  std::shared_ptr<const ActionSet> actions_;
  Eigen::MatrixXd probs_;  // S x |A|
};

}  // namespace slaterec
