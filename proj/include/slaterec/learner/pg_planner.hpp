#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/distribution.hpp"
#include "slaterec/learner/covariance.hpp"
#include "slaterec/learner/response_model.hpp"
#include "slaterec/learner/sim_policy.hpp"
#include "slaterec/mdp/evaluate.hpp"

namespace slaterec::learner {

struct PolicyGradientOptions {
  std::size_t batch = 32;
  std::size_t max_iterations = 40;
  std::size_t patience = 5;
  double learning_rate = 2.0;
  double horizon_tolerance = 1e-2;  // rollouts stop once gamma^t falls below this
  std::size_t eval_rollouts = 64;
};

struct ImaginedStep {
  Eigen::VectorXd x;
  ItemId target = 0;
  std::vector<double> target_probs;
  double reward = 0.0;  // r_hat + bonus
};

/// One rollout in the learned model from an empty window. Choice and
/// fillers use the interest estimate; the reward is the model's expected
/// engagement averaged over the estimated choice; the next window entry
/// samples the chosen item and an engagement bucket midpoint.
inline double imagined_rollout(const ResponseModel& model, const TargetItemPolicy& policy,
                               const EllipticalBonus* bonus, double discount, std::size_t window,
                               std::size_t horizon, Rng& rng, std::vector<ImaginedStep>* trace) {
  HistoryState s(window);
  double g = 0.0;
  double scale = 1.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    ImaginedStep step;
    step.x = model.estimator().features(s);
    const Eigen::VectorXd u = step.x.head(step.x.size() - 1);
    step.target_probs = policy.target_probs_at(step.x);
    step.target = sample_index(rng, step.target_probs);
    const Slate slate = policy.slate_at(u, step.target);
    const std::vector<double> p = model.estimator().choice_at(u, slate);
    double r = 0.0;
    for (std::size_t j = 0; j < slate.size(); ++j) r += p[j] * model.expected_engagement_at(step.x, slate[j]);
    if (bonus) {
      Eigen::VectorXd f = p[slate.size()] * model.feature_at(step.x, model.null_id());
      for (std::size_t j = 0; j < slate.size(); ++j) f += p[j] * model.feature_at(step.x, slate[j]);
      r += (*bonus)(f);
    }
    step.reward = r;
    g += scale * r;
    scale *= discount;

    UserResponse resp;
    resp.chosen = sample_index(rng, p);
    const ItemId consumed = consumed_item(resp, slate, model.null_id());
    if (consumed != model.null_id()) {
      const Eigen::VectorXd buckets = model.bucket_distribution_at(step.x, consumed);
      const std::size_t b =
          sample_index(rng, std::span<const double>(buckets.data(), static_cast<std::size_t>(buckets.size())));
      resp.engagement = model.bucket_mid(b);
    }
    s.push(slate, resp);
    if (trace) trace->push_back(std::move(step));
  }
  return g;
}

struct PolicyGradientPlan {
  TargetItemPolicy policy;
  double value_with_bonus = 0.0;  // best batch estimate under (P_hat, r + b)
  double value_learned = 0.0;     // fresh estimate under (P_hat, r)
  std::size_t iterations = 0;
};

/// REINFORCE with a per-step batch-mean baseline on imagined rollouts.
/// Keeps the best parameters seen and stops once the batch estimate has not
/// improved for `patience` iterations.
inline PolicyGradientPlan plan_policy_gradient(const ResponseModel& model, const EllipticalBonus* bonus,
                                               TargetItemPolicy start, double discount, std::size_t window,
                                               const PolicyGradientOptions& opts, Rng& rng) {
  const std::size_t horizon = truncation_horizon(discount, opts.horizon_tolerance);
  TargetItemPolicy current = std::move(start);
  TargetItemPolicy best = current;
  double best_value = -1e300;
  std::size_t stale = 0;
  std::size_t it = 0;
  for (; it < opts.max_iterations && stale < opts.patience; ++it) {
    std::vector<std::vector<ImaginedStep>> traces(opts.batch);
    double mean_return = 0.0;
    for (auto& trace : traces) {
      mean_return += imagined_rollout(model, current, bonus, discount, window, horizon, rng, &trace);
    }
    mean_return /= double(opts.batch);
    if (mean_return > best_value + 1e-12) {
      best_value = mean_return;
      best = current;
      stale = 0;
    } else {
      ++stale;
    }

    // Returns-to-go and the per-step baseline.
    std::vector<std::vector<double>> to_go(opts.batch, std::vector<double>(horizon, 0.0));
    std::vector<double> baseline(horizon, 0.0);
    for (std::size_t m = 0; m < opts.batch; ++m) {
      double acc = 0.0;
      for (std::size_t t = horizon; t-- > 0;) {
        acc = traces[m][t].reward + discount * acc;
        to_go[m][t] = acc;
        baseline[t] += acc / double(opts.batch);
      }
    }
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(current.theta().rows(), current.theta().cols());
    for (std::size_t m = 0; m < opts.batch; ++m) {
      double scale = 1.0;
      for (std::size_t t = 0; t < horizon; ++t) {
        const ImaginedStep& st = traces[m][t];
        const double adv = scale * (to_go[m][t] - baseline[t]);
        Eigen::VectorXd score = -Eigen::Map<const Eigen::VectorXd>(st.target_probs.data(),
                                                                   static_cast<Eigen::Index>(st.target_probs.size()));
        score[static_cast<Eigen::Index>(st.target)] += 1.0;
        grad.noalias() += adv * score * st.x.transpose();
        scale *= discount;
      }
    }
    current.theta() += opts.learning_rate / double(opts.batch) * grad;
  }

  PolicyGradientPlan out{best, best_value, 0.0, it};
  double total = 0.0;
  for (std::size_t m = 0; m < opts.eval_rollouts; ++m) {
    total += imagined_rollout(model, best, nullptr, discount, window, horizon, rng, nullptr);
  }
  out.value_learned = opts.eval_rollouts ? total / double(opts.eval_rollouts) : 0.0;
  return out;
}

}  // namespace slaterec::learner
