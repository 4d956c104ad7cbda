#include "dmn/optimizer.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dmn {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
    throw std::invalid_argument("TrainConfig: warmup_fraction must be in [0,1)");
  if (matching_dropout < 0.0 || matching_dropout >= 1.0)
    throw std::invalid_argument("TrainConfig: matching_dropout must be in [0,1)");
  if (gradient_clip_norm < 0.0)
    throw std::invalid_argument("TrainConfig: gradient_clip_norm must be >= 0");
}

OptimizerState init_optimizer_state(std::span<const Matrix* const> params) {
  OptimizerState state;
  state.m.reserve(params.size());
  state.v.reserve(params.size());
  for (const Matrix* p : params) {
    state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
    state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  return state;
}

Scalar global_norm(std::span<const Matrix> grads) {
  Scalar sq = 0.0;
  for (const Matrix& g : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

bool adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads,
               OptimizerState& state, const TrainConfig& cfg, std::int64_t total_steps,
               std::ostream* log) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i]->rows() || grads[i].cols() != params[i]->cols())
      throw std::invalid_argument("adam_step: gradient shape " + shape_of(grads[i]) +
                                  " does not match parameter " + shape_of(*params[i]));
    if (!all_finite(grads[i])) {
      if (log)
        *log << "adam_step: non-finite gradient in group " << i << " at step " << state.step + 1
             << ", step skipped\n";
      return false;
    }
  }

  constexpr Scalar beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const std::int64_t t = ++state.step;

  Scalar lr = cfg.learning_rate;
  const Scalar warmup_steps = cfg.warmup_fraction * static_cast<Scalar>(total_steps);
  if (warmup_steps > 0.0 && static_cast<Scalar>(t) < warmup_steps)
    lr *= static_cast<Scalar>(t) / warmup_steps;

  Scalar scale = 1.0;
  if (cfg.gradient_clip_norm > 0.0) {
    const Scalar norm = global_norm(grads);
    if (norm > cfg.gradient_clip_norm) scale = cfg.gradient_clip_norm / norm;
  }

  const Scalar bc1 = 1.0 - std::pow(beta1, static_cast<Scalar>(t));
  const Scalar bc2 = 1.0 - std::pow(beta2, static_cast<Scalar>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix g = grads[i] * scale;
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g.cwiseProduct(g);
    const Matrix mhat = state.m[i] / bc1;
    const Matrix vhat = state.v[i] / bc2;
    params[i]->array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
  }
  return true;
}

} // namespace dmn
