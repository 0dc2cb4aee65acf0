#pragma once

#include <cmath>
#include <cstddef>

#include "slaterec/core/errors.hpp"

namespace slaterec::learner {

struct HyperParams {
  double delta = 0.1;            // failure probability
  double target_accuracy = 0.1;  // epsilon of the PAC statement; informational
  double discount = 0.9;
  std::size_t rank = 3;
  std::size_t slate_size = 2;
  std::size_t num_items = 5;
  double model_class_size = 8;  // |M|, or a capacity proxy for parametric classes
  double c_alpha = 1.0;
  double c_lambda = 1.0;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");
    if (!(target_accuracy > 0.0 && target_accuracy < 1.0)) {
      throw ConfigError("target_accuracy must be in (0,1)");
    }
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must be in [0,1)");
    if (rank == 0 || slate_size == 0 || num_items == 0) throw ConfigError("rank, k and |I| must be >= 1");
    if (!(model_class_size >= 1.0)) throw ConfigError("model class size must be >= 1");
    if (!(c_alpha > 0.0) || !(c_lambda > 0.0)) throw ConfigError("c_alpha and c_lambda must be > 0");
  }
};

struct Schedule {
  double alpha = 0.0;
  double lambda = 0.0;
};

/// alpha_n = c_alpha sqrt((k|I| + d^2) gamma ln(|M| n / delta))
/// lambda_n = c_lambda d ln(|M| n / delta)
inline Schedule schedule(std::size_t n, const HyperParams& hp) {
  if (n == 0) throw ConfigError("schedule is defined for n >= 1");
  const double log_term = std::log(hp.model_class_size * double(n) / hp.delta);
  const double d = double(hp.rank);
  const double width = double(hp.slate_size * hp.num_items) + d * d;
  Schedule out;
  out.alpha = hp.c_alpha * std::sqrt(width * hp.discount * log_term);
  out.lambda = hp.c_lambda * d * log_term;
  return out;
}

}  // namespace slaterec::learner
