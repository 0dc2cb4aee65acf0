#pragma once

#include <algorithm>
#include <cmath>

#include "slaterec/core/errors.hpp"
#include "slaterec/core/rng.hpp"
#include "slaterec/env/catalog.hpp"
#include "slaterec/env/user.hpp"

namespace slaterec::env {

/// u' = c0 u + c1 q(i) (i - u) + eps, eps ~ N(0, c3 I). c3 is a variance.
struct DynamicsParams {
  double c0 = 0.9;
  double c1 = 0.1;
  double c3 = 0.01;

  void validate() const {
    if (!(c0 >= 0.0)) throw ConfigError("dynamics: c0 must be >= 0");
    if (!(c1 >= 0.0)) throw ConfigError("dynamics: c1 must be >= 0");
    if (!(c3 >= 0.0)) throw ConfigError("dynamics: c3 must be >= 0");
  }
};

inline Eigen::VectorXd clip_unit_box(Eigen::VectorXd v) {
  return v.cwiseMax(-1.0).cwiseMin(1.0);
}

inline UserState transition_user(const UserState& user, const Item& item,
                                 const DynamicsParams& params, Rng& rng) {
  Eigen::VectorXd next =
      params.c0 * user.interest + params.c1 * item.quality * (item.topics - user.interest);
  if (params.c3 > 0.0) {
    const double sd = std::sqrt(params.c3);
    for (Eigen::Index t = 0; t < next.size(); ++t) next[t] += rng.normal(0.0, sd);
  }
  return UserState{clip_unit_box(std::move(next))};
}

/// Consumption time, scaled so one step pays at most 1 - gamma:
/// (1 - gamma) * l(i) * ((i.u)/T + 1) / 2. The null item has length 0.
inline double engagement(const UserState& user, const Item& item, double discount) {
  const auto topics = static_cast<double>(item.topics.size());
  const double affinity = item.topics.dot(user.interest) / topics;
  const double value = (1.0 - discount) * item.length * (affinity + 1.0) / 2.0;
  return std::clamp(value, 0.0, 1.0 - discount);
}

/// Initial user distribution: interest entries i.i.d. Uniform(-1, 1).
inline UserState sample_initial_user(Rng& rng, std::size_t num_topics) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(num_topics));
  for (Eigen::Index t = 0; t < u.size(); ++t) u[t] = rng.uniform(-1.0, 1.0);
  return UserState{std::move(u)};
}

}  // namespace slaterec::env
