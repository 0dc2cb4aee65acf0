#pragma once

#include <Eigen/Dense>

namespace slaterec::env {

/// Latent interest vector; hidden from the recommender.
struct UserState {
  Eigen::VectorXd interest;
};

}  // namespace slaterec::env
