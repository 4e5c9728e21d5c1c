#include "dragonpit/rl/gradcheck.hpp"

#include <cmath>

namespace dragonpit::rl {

GradCheckReport check_gradients(const std::vector<Parameter*>& params,
                                const std::function<double()>& loss_value,
                                int max_entries_per_param, double base_h) {
  GradCheckReport report;
  for (Parameter* p : params) {
    const Eigen::Index total = p->value.size();
    if (total == 0) continue;
    Eigen::Index stride = 1;
    if (max_entries_per_param > 0 && total > max_entries_per_param)
      stride = (total + max_entries_per_param - 1) / max_entries_per_param;
    for (Eigen::Index flat = 0; flat < total; flat += stride) {
      Eigen::Index r = flat % p->value.rows();
      Eigen::Index c = flat / p->value.rows();
      const double saved = p->value(r, c);
      const double h = base_h * std::max(1.0, std::abs(saved));
      p->value(r, c) = saved + h;
      const double up = loss_value();
      p->value(r, c) = saved - h;
      const double down = loss_value();
      p->value(r, c) = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad(r, c);
      const double rel = std::abs(analytic - numeric) /
                         std::max({1.0, std::abs(analytic), std::abs(numeric)});
      ++report.entries_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p->name;
        report.worst_row = r;
        report.worst_col = c;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace dragonpit::rl
