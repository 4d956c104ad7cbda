#ifndef DMN_OPTIMIZER_HPP
#define DMN_OPTIMIZER_HPP

#include "dmn/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace dmn {

struct TrainConfig {
  Scalar learning_rate = 1e-3; // toy default; 5e-6 suits a fine-tuned encoder
  int batch_size = 4;
  int epochs = 10;
  Scalar warmup_fraction = 0.1;
  std::uint64_t seed = 0;
  Scalar matching_dropout = 0.3;
  Scalar gradient_clip_norm = 1.0; // 0 disables clipping

  void validate() const;
};

/// Adam moment accumulators, aligned entry-for-entry with a fixed parameter
/// ordering (see parameters()).
struct OptimizerState {
  std::int64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

OptimizerState init_optimizer_state(std::span<const Matrix* const> params);

/// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8, bias correction) with
/// linear learning-rate warmup over warmup_fraction of total_steps, then
/// constant. Gradients are clipped to cfg.gradient_clip_norm by global norm
/// first. A non-finite gradient skips the step, logs one line on `log`, and
/// returns false; nothing is mutated in that case.
bool adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads,
               OptimizerState& state, const TrainConfig& cfg, std::int64_t total_steps,
               std::ostream* log = nullptr);

/// sqrt of the summed squared entries across all gradients.
Scalar global_norm(std::span<const Matrix> grads);

} // namespace dmn

#endif
