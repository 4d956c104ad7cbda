#include "dmn/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace dmn {

GradReport finite_diff_check(std::span<const GradCheckGroup> groups,
                             const std::function<Scalar()>& loss_fn,
                             Scalar step, Scalar tolerance) {
  if (step <= 0.0)
    throw std::invalid_argument("finite_diff_check: step must be positive");

  GradReport report;
  report.tolerance = tolerance;

  for (const GradCheckGroup& grp : groups) {
    if (!grp.param || !grp.analytic)
      throw std::invalid_argument("finite_diff_check: null group '" + grp.name + "'");
    Matrix& p = *grp.param;
    const Matrix& a = *grp.analytic;
    if (p.rows() != a.rows() || p.cols() != a.cols())
      throw std::invalid_argument("finite_diff_check: analytic gradient shape mismatch for '" +
                                  grp.name + "'");

    // Two accumulation passes worth of state: the largest entrywise
    // discrepancy and the group's gradient scale. Normalizing by the scale
    // (not entry-by-entry) keeps the check meaningful: a central difference
    // carries roundoff of roughly eps*|loss|/(2*step), which would dominate
    // any entry whose true gradient is tiny even when the analytic gradient
    // is exact.
    Scalar worst_diff = 0.0;
    Index worst_i = 0, worst_j = 0;
    Scalar scale = 0.0;
    for (Index i = 0; i < p.rows(); ++i) {
      for (Index j = 0; j < p.cols(); ++j) {
        const Scalar saved = p(i, j);
        p(i, j) = saved + step;
        const Scalar up = loss_fn();
        p(i, j) = saved - step;
        const Scalar down = loss_fn();
        p(i, j) = saved;

        const Scalar numeric = (up - down) / (2.0 * step);
        const Scalar analytic = a(i, j);
        scale = std::max({scale, std::abs(analytic), std::abs(numeric)});
        const Scalar diff = std::abs(analytic - numeric);
        if (diff > worst_diff) {
          worst_diff = diff;
          worst_i = i;
          worst_j = j;
        }
      }
    }

    GroupErrorStat stat{grp.name, worst_diff / std::max(scale, Scalar{1e-8})};
    if (stat.max_rel_error > report.max_rel_error) {
      report.max_rel_error = stat.max_rel_error;
      report.worst =
          grp.name + "[" + std::to_string(worst_i) + "," + std::to_string(worst_j) + "]";
    }
    report.groups.push_back(std::move(stat));
  }

  report.pass = report.max_rel_error <= tolerance;
  return report;
}

} // namespace dmn
