#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "slaterec/core/errors.hpp"
#include "slaterec/core/slate.hpp"

namespace slaterec {

/// Anything exposing a rank-d item-level feature map phi(s, i) and the
/// induced transition probability P(s'|s,i) = mu(s')^T phi(s, i).
/// Item id `num_items` denotes the null item.
template <class M, class State>
concept LowRankFeatureModel = requires(const M& m, const State& s, ItemId i) {
  { m.rank() } -> std::convertible_to<std::size_t>;
  { m.null_id() } -> std::convertible_to<ItemId>;
  { m.feature(s, i) } -> std::convertible_to<Eigen::VectorXd>;
  { m.transition_prob(s, i, s) } -> std::convertible_to<double>;
};

/// Enumerable (mu, phi) pair over atomic states 0..S-1.
class TabularLowRankModel {
 public:
  TabularLowRankModel() = default;
  TabularLowRankModel(std::size_t num_states, std::size_t num_items, Eigen::MatrixXd phi,
                      Eigen::MatrixXd mu)
      : num_states_(num_states), num_items_(num_items), phi_(std::move(phi)), mu_(std::move(mu)) {
    const auto rows = static_cast<Eigen::Index>(num_states_ * (num_items_ + 1));
    if (phi_.rows() != rows || mu_.rows() != static_cast<Eigen::Index>(num_states_) ||
        phi_.cols() != mu_.cols() || phi_.cols() == 0) {
      throw ModelError("tabular low-rank model: inconsistent matrix shapes");
    }
  }

  std::size_t num_states() const { return num_states_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t rank() const { return static_cast<std::size_t>(mu_.cols()); }
  ItemId null_id() const { return num_items_; }

  // phi row for (s, i); i == num_items() is null.
  Eigen::Index row(std::size_t s, ItemId i) const {
    return static_cast<Eigen::Index>(s * (num_items_ + 1) + i);
  }

  Eigen::VectorXd feature(std::size_t s, ItemId i) const { return phi_.row(row(s, i)).transpose(); }

  double transition_prob(std::size_t s, ItemId i, std::size_t next) const {
    return mu_.row(static_cast<Eigen::Index>(next)).dot(phi_.row(row(s, i)));
  }

  Eigen::VectorXd next_state_distribution(std::size_t s, ItemId i) const {
    return mu_ * phi_.row(row(s, i)).transpose();
  }

  const Eigen::MatrixXd& phi() const { return phi_; }
  const Eigen::MatrixXd& mu() const { return mu_; }

 private:
  std::size_t num_states_ = 0;
  std::size_t num_items_ = 0;
  Eigen::MatrixXd phi_;  // (S * (|I|+1)) x d
  Eigen::MatrixXd mu_;   // S x d, row s' is mu(s')
};

struct NormalizationReport {
  double max_feature_norm = 0.0;  // max ||phi(s,i)||_2
  double max_sum_error = 0.0;     // max |sum_s' P(s'|s,i) - 1|
  double min_prob = 0.0;          // min P(s'|s,i)
  double max_mass_norm = 0.0;     // max_f ||sum_s' mu(s') f(s')||_2 over f in [0,1]^S

  bool valid(std::size_t rank, double tol) const {
    return max_feature_norm <= 1.0 + tol && max_sum_error <= tol && min_prob >= -tol &&
           max_mass_norm <= std::sqrt(static_cast<double>(rank)) + tol;
  }
};

/// Checks the low-rank normalization constraints by enumeration. The mass
/// bound maximizes a convex function over the box [0,1]^S, so vertices
/// suffice; beyond 20 states a coordinate-wise upper bound is reported.
inline NormalizationReport check_normalization(const TabularLowRankModel& m) {
  NormalizationReport rep;
  rep.min_prob = 1.0;
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (ItemId i = 0; i <= m.num_items(); ++i) {
      rep.max_feature_norm = std::max(rep.max_feature_norm, m.feature(s, i).norm());
      const Eigen::VectorXd p = m.next_state_distribution(s, i);
      rep.max_sum_error = std::max(rep.max_sum_error, std::abs(p.sum() - 1.0));
      rep.min_prob = std::min(rep.min_prob, p.minCoeff());
    }
  }
  const auto& mu = m.mu();
  const std::size_t n = m.num_states();
  if (n <= 20) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(mu.cols());
      for (std::size_t s = 0; s < n; ++s) {
        if (mask & (std::uint64_t{1} << s)) acc += mu.row(static_cast<Eigen::Index>(s)).transpose();
      }
      rep.max_mass_norm = std::max(rep.max_mass_norm, acc.norm());
    }
  } else {
    Eigen::VectorXd bound(mu.cols());
    for (Eigen::Index z = 0; z < mu.cols(); ++z) {
      bound[z] = std::max(mu.col(z).cwiseMax(0.0).sum(), -mu.col(z).cwiseMin(0.0).sum());
    }
    rep.max_mass_norm = bound.norm();
  }
  return rep;
}

}  // namespace slaterec
