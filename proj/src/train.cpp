#include "dmn/train.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace dmn {

EvalResult evaluate(const Model& m, std::span<const MultiChoiceExample> data,
                    const PrecomputedEmbeddings* pre) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  EvalResult result;
  result.predictions.reserve(data.size());
  int correct = 0;
  for (const MultiChoiceExample& ex : data) {
    Tape tape;
    const ModelBinding binding = bind_model(tape, m);
    const ModelForward fwd =
        model_forward(tape, m, binding, ex, DropoutMode::eval, nullptr, pre);
    result.predictions.push_back(fwd.prediction);
    if (fwd.prediction == ex.gold) ++correct;
  }
  result.accuracy = static_cast<Scalar>(correct) / static_cast<Scalar>(data.size());
  return result;
}

TrainResult train(Model& m, std::span<const MultiChoiceExample> train_data,
                  std::span<const MultiChoiceExample> dev_data, const TrainConfig& cfg,
                  std::ostream* log, const PrecomputedEmbeddings* pre,
                  OptimizerState* opt_out) {
  cfg.validate();
  m.config.validate();
  if (train_data.empty()) throw std::invalid_argument("train: empty training set");
  if (dev_data.empty()) throw std::invalid_argument("train: empty dev set");
  for (const MultiChoiceExample& ex : train_data) validate_example(ex);

  // The training config owns the dropout rate; the model records what it was
  // trained with.
  m.config.match.matching_dropout = cfg.matching_dropout;

  std::vector<NamedParam> registry = parameters(m);
  std::vector<Matrix*> param_ptrs;
  std::vector<const Matrix*> param_views;
  for (NamedParam& p : registry) {
    param_ptrs.push_back(p.value);
    param_views.push_back(p.value);
  }
  OptimizerState state = init_optimizer_state(param_views);

  const std::int64_t batches_per_epoch =
      (static_cast<std::int64_t>(train_data.size()) + cfg.batch_size - 1) / cfg.batch_size;
  const std::int64_t total_steps = batches_per_epoch * cfg.epochs;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  std::vector<Matrix> best_params;
  std::vector<Matrix> grad_accum(registry.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);

    Scalar loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      for (std::size_t i = 0; i < registry.size(); ++i)
        grad_accum[i] = Matrix::Zero(registry[i].value->rows(), registry[i].value->cols());

      for (std::size_t k = start; k < stop; ++k) {
        const MultiChoiceExample& ex = train_data[order[k]];
        Tape tape;
        const ModelBinding binding = bind_model(tape, m);
        const ModelForward fwd =
            model_forward(tape, m, binding, ex, DropoutMode::train, &rng, pre);
        const Scalar loss = tape.value(fwd.loss)(0, 0);
        if (!std::isfinite(loss))
          throw std::runtime_error("train: non-finite loss on example '" + ex.id + "' (epoch " +
                                   std::to_string(epoch) + ")");
        loss_sum += loss;
        backward(tape, fwd.loss);
        for (std::size_t i = 0; i < registry.size(); ++i)
          grad_accum[i] += tape.grad(binding.ordered[i]);
      }
      adam_step(param_ptrs, grad_accum, state, cfg, total_steps, log);
    }

    const EvalResult dev = evaluate(m, dev_data, pre);
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.train_loss = loss_sum / static_cast<Scalar>(train_data.size());
    metrics.dev_accuracy = dev.accuracy;
    metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(metrics);
    if (log)
      *log << "epoch=" << metrics.epoch << " train_loss=" << metrics.train_loss
           << " dev_acc=" << metrics.dev_accuracy << " seconds=" << metrics.wall_seconds << '\n';

    if (result.best_epoch == 0 || dev.accuracy > result.best_dev_accuracy) {
      result.best_epoch = epoch;
      result.best_dev_accuracy = dev.accuracy;
      best_params.clear();
      for (const NamedParam& p : registry) best_params.push_back(*p.value);
    }
  }

  // Model selection: the epoch with the best dev accuracy wins (earliest on
  // ties).
  if (result.best_epoch > 0)
    for (std::size_t i = 0; i < registry.size(); ++i) *registry[i].value = best_params[i];
  if (opt_out) *opt_out = std::move(state);
  return result;
}

} // namespace dmn
