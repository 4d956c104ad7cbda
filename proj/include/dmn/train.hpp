#ifndef DMN_TRAIN_HPP
#define DMN_TRAIN_HPP

#include "dmn/data.hpp"
#include "dmn/model.hpp"
#include "dmn/optimizer.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace dmn {

struct EpochMetrics {
  int epoch = 0;         // 1-based
  Scalar train_loss = 0; // mean per-example loss over the epoch
  Scalar dev_accuracy = 0;
  double wall_seconds = 0;
};

struct EvalResult {
  Scalar accuracy = 0;
  std::vector<int> predictions; // one per example, input order
};

struct TrainResult {
  std::vector<EpochMetrics> history;
  int best_epoch = 0; // 1-based; 0 when no epochs ran
  Scalar best_dev_accuracy = 0;
};

/// Accuracy of argmax predictions (dropout off, deterministic, parameters
/// untouched).
EvalResult evaluate(const Model& m, std::span<const MultiChoiceExample> data,
                    const PrecomputedEmbeddings* pre = nullptr);

/// Full training run: seeded shuffle each epoch, gradients summed over each
/// batch, one Adam step per batch, dev evaluation per epoch. One line per
/// epoch is written to `log` (epoch=… train_loss=… dev_acc=… seconds=…).
/// cfg.matching_dropout is applied to the model for the run. The model is
/// left at the epoch with the best dev accuracy (earliest wins ties);
/// opt_out, when given, receives the final optimizer state.
TrainResult train(Model& m, std::span<const MultiChoiceExample> train_data,
                  std::span<const MultiChoiceExample> dev_data, const TrainConfig& cfg,
                  std::ostream* log = nullptr, const PrecomputedEmbeddings* pre = nullptr,
                  OptimizerState* opt_out = nullptr);

} // namespace dmn

#endif
