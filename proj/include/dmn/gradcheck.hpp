#ifndef DMN_GRADCHECK_HPP
#define DMN_GRADCHECK_HPP

#include "dmn/types.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dmn {

/// One parameter block to verify: the live parameter storage (perturbed in
/// place and restored) paired with the analytic gradient for it.
struct GradCheckGroup {
  std::string name;
  Matrix* param = nullptr;
  const Matrix* analytic = nullptr;
};

struct GroupErrorStat {
  std::string name;
  Scalar max_rel_error = 0.0;
};

struct GradReport {
  std::vector<GroupErrorStat> groups;
  Scalar max_rel_error = 0.0;
  Scalar tolerance = 0.0;
  bool pass = false;
  std::string worst; // "group[i,j]" of the largest error
};

/// Central-difference check: compares (f(x+h)-f(x-h))/2h against the
/// analytic gradient for every entry of every group. A group's error is its
/// largest entrywise discrepancy |a-n| relative to the group's gradient
/// scale, max(|a|, |n|, 1e-8) over the group — roundoff in the loss puts an
/// absolute noise floor of about eps*|loss|/(2h) under every difference, so
/// normalizing entry-by-entry would fail entries whose true gradient sits
/// below that floor no matter how exact the analytic gradient is. loss_fn
/// must be deterministic (dropout off).
GradReport finite_diff_check(std::span<const GradCheckGroup> groups,
                             const std::function<Scalar()>& loss_fn,
                             Scalar step, Scalar tolerance);

} // namespace dmn

#endif
