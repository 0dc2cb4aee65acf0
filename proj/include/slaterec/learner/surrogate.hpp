#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/env/catalog.hpp"
#include "slaterec/env/choice.hpp"
#include "slaterec/env/dynamics.hpp"
#include "slaterec/mdp/history.hpp"

namespace slaterec::learner {

/// Recovers an interest estimate from the observable window. Each non-null
/// consumption with positive length reveals i^T u through the engagement
/// formula; the estimate is the ridge solution of those projections,
/// clipped to the unit box. Used wherever the learner must score items at
/// states it only imagines.
class InterestEstimator {
 public:
  InterestEstimator(std::shared_ptr<const env::ItemCatalog> catalog, double discount, double ridge = 1.0)
      : catalog_(std::move(catalog)), discount_(discount), ridge_(ridge) {}

  Eigen::VectorXd estimate(const HistoryState& s) const {
    const auto t = static_cast<Eigen::Index>(catalog_->num_topics());
    Eigen::MatrixXd gram = ridge_ * Eigen::MatrixXd::Identity(t, t);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(t);
    bool any = false;
    for (const auto& e : s.entries()) {
      if (e.padding || is_null_choice(e.response, e.slate)) continue;
      const env::Item& item = (*catalog_)[e.slate[e.response.chosen]];
      if (item.length <= 1e-9) continue;
      const double affinity =
          std::clamp(2.0 * e.response.engagement / ((1.0 - discount_) * item.length) - 1.0, -1.0, 1.0);
      gram.noalias() += item.topics * item.topics.transpose();
      rhs += item.topics * (affinity * double(t));
      any = true;
    }
    if (!any) return Eigen::VectorXd::Zero(t);
    return env::clip_unit_box(gram.ldlt().solve(rhs));
  }

  /// [estimate; 1]
  Eigen::VectorXd features(const HistoryState& s) const {
    const Eigen::VectorXd u = estimate(s);
    Eigen::VectorXd x(u.size() + 1);
    x << u, 1.0;
    return x;
  }

  std::size_t feature_dim() const { return catalog_->num_topics() + 1; }

  std::vector<double> propensities_at(const Eigen::VectorXd& u) const {
    std::vector<double> out(catalog_->size());
    for (ItemId i = 0; i < catalog_->size(); ++i) {
      out[i] = 1.0 / (1.0 + std::exp(-(*catalog_)[i].topics.dot(u)));
    }
    return out;
  }

  std::vector<double> choice_at(const Eigen::VectorXd& u, const Slate& slate) const {
    return env::choice_probs(env::UserState{u}, slate, *catalog_);
  }

  const env::ItemCatalog& catalog() const { return *catalog_; }
  double discount() const { return discount_; }

 private:
  std::shared_ptr<const env::ItemCatalog> catalog_;
  double discount_;
  double ridge_;
};

}  // namespace slaterec::learner
