#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/errors.hpp"
#include "slaterec/learner/covariance.hpp"
#include "slaterec/mdp/low_rank.hpp"
#include "slaterec/mdp/policy.hpp"
#include "slaterec/oracle/tabular.hpp"

namespace slaterec::learner {

struct TabularPlan {
  TabularPolicy policy;
  Eigen::VectorXd values;          // optimal values under (P_hat, r + b)
  double bellman_residual = 0.0;   // ||T V - V||_inf of `values`
  double value_learned = 0.0;      // V^policy under (P_hat, r), from d0
  std::size_t sweeps = 0;
};

/// Value iteration in the learned model with the bonus-augmented reward.
/// The expectation over s' goes through the factorization:
/// E_{P_hat}[V(s')] = phi_avg(s,a)^T (sum_s' mu(s') V(s')).
/// Greedy extraction takes the lowest action index among maximizers.
inline TabularPlan plan_tabular(const oracle::TabularProblem& problem,
                                std::shared_ptr<const ActionSet> actions,
                                const TabularLowRankModel& model, const EllipticalBonus* bonus,
                                double tol = 1e-8) {
  const std::size_t n = problem.num_states;
  const std::size_t na = actions->size();
  const double gamma = problem.discount;

  Eigen::MatrixXd reward(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(na));
  Eigen::MatrixXd augmented(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(na));
  std::vector<Eigen::VectorXd> features(n * na);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      const Slate& slate = (*actions)[a];
      const std::vector<double> p = problem.choice(s, slate);
      const auto si = static_cast<Eigen::Index>(s);
      const auto ai = static_cast<Eigen::Index>(a);
      features[s * na + a] = averaged_feature(model, s, slate, std::span<const double>(p));
      reward(si, ai) = problem.slate_reward(s, slate, p);
      augmented(si, ai) = reward(si, ai) + (bonus ? (*bonus)(features[s * na + a]) : 0.0);
    }
  }

  const double ceiling = 3.0 / (1.0 - gamma);
  Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(na));
  auto backup = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd mass = model.mu().transpose() * v;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) =
            augmented(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) +
            gamma * features[s * na + a].dot(mass);
      }
    }
    Eigen::VectorXd next = q.rowwise().maxCoeff();
    if (!(next.cwiseAbs().maxCoeff() <= ceiling)) {
      throw NumericalError("planner value iterates exceeded (1 + 2) / (1 - gamma)");
    }
    return next;
  };

  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::size_t sweeps = 0;
  double residual = 0.0;
  while (true) {
    Eigen::VectorXd next = backup(v);
    ++sweeps;
    residual = (next - v).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    if (residual <= tol) break;
    if (sweeps > 10000000) throw NumericalError("planner value iteration did not converge");
  }
  // v is now T applied to an iterate with residual <= tol, so its own residual is <= gamma * tol.
  const Eigen::VectorXd check = backup(v);
  residual = (check - v).lpNorm<Eigen::Infinity>();

  std::vector<std::size_t> greedy(n);
  for (std::size_t s = 0; s < n; ++s) {
    Eigen::Index best = 0;
    q.row(static_cast<Eigen::Index>(s)).maxCoeff(&best);
    greedy[s] = static_cast<std::size_t>(best);
  }
  TabularPolicy policy = TabularPolicy::deterministic(actions, greedy);

  // Reward-only value of the greedy policy in the learned model.
  const auto ns = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd p_pi(ns, ns);
  Eigen::VectorXd r_pi(ns);
  for (std::size_t s = 0; s < n; ++s) {
    const auto si = static_cast<Eigen::Index>(s);
    p_pi.row(si) = (model.mu() * features[s * na + greedy[s]]).transpose();
    r_pi[si] = reward(si, static_cast<Eigen::Index>(greedy[s]));
  }
  const Eigen::VectorXd v_learned =
      (Eigen::MatrixXd::Identity(ns, ns) - gamma * p_pi).partialPivLu().solve(r_pi);
  return TabularPlan{std::move(policy), std::move(v), residual, problem.initial.dot(v_learned), sweeps};
}

}  // namespace slaterec::learner
