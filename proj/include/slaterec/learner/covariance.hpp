#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/errors.hpp"
#include "slaterec/learner/dataset.hpp"
#include "slaterec/mdp/low_rank.hpp"

namespace slaterec::learner {

/// Choice-averaged feature sum_{i in a} P(i|s,a) phi(s,i); slot k is the null item.
template <class State, class Model>
  requires LowRankFeatureModel<Model, State>
Eigen::VectorXd averaged_feature(const Model& model, const State& s, const Slate& slate,
                                 std::span<const double> choice) {
  Eigen::VectorXd out = choice[slate.size()] * model.feature(s, model.null_id());
  for (std::size_t j = 0; j < slate.size(); ++j) out += choice[j] * model.feature(s, slate[j]);
  return out;
}

/// Sigma = sum over D of f f^T + lambda I, rebuilt from scratch for the current features.
template <class State, class Model>
  requires LowRankFeatureModel<Model, State>
Eigen::MatrixXd update_covariance(const std::vector<TransitionTuple<State>>& data, const Model& model,
                                  double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("covariance regularizer must be > 0");
  const auto d = static_cast<Eigen::Index>(model.rank());
  Eigen::MatrixXd sigma = lambda * Eigen::MatrixXd::Identity(d, d);
  for (const auto& t : data) {
    const Eigen::VectorXd f = averaged_feature(model, t.state, t.slate, t.choice);
    sigma.noalias() += f * f.transpose();
  }
  return sigma;
}

/// min(alpha sqrt(f^T Sigma^{-1} f), 2)
class EllipticalBonus {
 public:
  EllipticalBonus(const Eigen::MatrixXd& sigma, double alpha) : llt_(sigma), alpha_(alpha) {
    if (llt_.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  }

  double quadratic_form(const Eigen::VectorXd& f) const {
    return std::max(0.0, f.dot(llt_.solve(f)));
  }

  double operator()(const Eigen::VectorXd& f) const {
    return std::min(alpha_ * std::sqrt(quadratic_form(f)), 2.0);
  }

  double alpha() const { return alpha_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double alpha_;
};

inline double bonus(const Eigen::VectorXd& feature, const Eigen::MatrixXd& sigma, double alpha) {
  return EllipticalBonus(sigma, alpha)(feature);
}

}  // namespace slaterec::learner
