#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/distribution.hpp"
#include "slaterec/learner/surrogate.hpp"
#include "slaterec/mdp/uniform_slate.hpp"

namespace slaterec::learner {

/// Stochastic policy over target items, pi(i|s) = softmax(theta x(s)); the
/// target is padded with the least-likely fillers under the interest
/// estimate. With probability `epsilon` the target is uniform instead.
class TargetItemPolicy {
 public:
  TargetItemPolicy(std::shared_ptr<const InterestEstimator> estimator, std::size_t slate_size)
      : estimator_(std::move(estimator)), slate_size_(slate_size),
        theta_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(estimator_->catalog().size()),
                                     static_cast<Eigen::Index>(estimator_->feature_dim()))) {}

  std::vector<double> target_probs_at(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd logits = theta_ * x;
    std::vector<double> p = softmax(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())));
    if (epsilon_ > 0.0) {
      for (double& v : p) v = (1.0 - epsilon_) * v + epsilon_ / double(p.size());
    }
    return p;
  }

  Slate slate_at(const Eigen::VectorXd& u_hat, ItemId target) const {
    return slate_for_target(target, estimator_->propensities_at(u_hat), slate_size_);
  }

  Slate operator()(const HistoryState& s, Rng& rng) const {
    const Eigen::VectorXd x = estimator_->features(s);
    const ItemId target = sample_index(rng, target_probs_at(x));
    return slate_at(x.head(x.size() - 1), target);
  }

  Eigen::MatrixXd& theta() { return theta_; }
  const Eigen::MatrixXd& theta() const { return theta_; }
  double epsilon() const { return epsilon_; }
  TargetItemPolicy with_epsilon(double eps) const {
    TargetItemPolicy out = *this;
    out.epsilon_ = eps;
    return out;
  }
  const InterestEstimator& estimator() const { return *estimator_; }
  std::size_t slate_size() const { return slate_size_; }

 private:
  std::shared_ptr<const InterestEstimator> estimator_;
  std::size_t slate_size_;
  Eigen::MatrixXd theta_;  // |I| x (T+1)
  double epsilon_ = 0.0;
};

/// Targets the item with the highest immediate engagement under the
/// interest estimate. Deterministic.
class MyopicSimPolicy {
 public:
  MyopicSimPolicy(std::shared_ptr<const InterestEstimator> estimator, std::size_t slate_size)
      : estimator_(std::move(estimator)), slate_size_(slate_size) {}

  Slate operator()(const HistoryState& s, Rng&) const {
    const Eigen::VectorXd u = estimator_->estimate(s);
    const auto& catalog = estimator_->catalog();
    ItemId best = 0;
    double best_value = -1.0;
    for (ItemId i = 0; i < catalog.size(); ++i) {
      const double v = env::engagement(env::UserState{u}, catalog[i], estimator_->discount());
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    return slate_for_target(best, estimator_->propensities_at(u), slate_size_);
  }

 private:
  std::shared_ptr<const InterestEstimator> estimator_;
  std::size_t slate_size_;
};

}  // namespace slaterec::learner
