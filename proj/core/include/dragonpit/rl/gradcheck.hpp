#pragma once

#include <functional>

#include "dragonpit/rl/tensor.hpp"

namespace dragonpit::rl {

struct GradCheckReport {
  double max_rel_err = 0;
  std::string worst_param;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
  double analytic = 0;
  double numeric = 0;
  long long entries_checked = 0;
};

// Central-difference verification of analytic gradients.
// Call with parameters that already hold the analytic gradient of the loss
// (zero_grad + backward done by the caller). loss_value must recompute the
// scalar loss from the parameters' current values. Each checked entry is
// perturbed by +-h with h scaled to the entry's magnitude.
// max_entries_per_param > 0 checks a deterministic stride sample.
GradCheckReport check_gradients(const std::vector<Parameter*>& params,
                                const std::function<double()>& loss_value,
                                int max_entries_per_param = -1,
                                double base_h = 1e-5);

}  // namespace dragonpit::rl
