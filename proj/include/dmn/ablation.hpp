#ifndef DMN_ABLATION_HPP
#define DMN_ABLATION_HPP

#include "dmn/model.hpp"
#include "dmn/train.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dmn {

struct AblationCell {
  std::string variant;
  std::uint64_t seed = 0;
  Scalar dev_accuracy = 0;
};

struct AblationRow {
  std::string variant;
  Scalar mean = 0;
  Scalar stdev = 0;
  Scalar delta_vs_full = 0; // accuracy points (x100), this variant minus full
};

struct AblationReport {
  std::vector<AblationCell> cells; // variant-major, seed-minor
  std::vector<AblationRow> rows;   // full, unidirectional, concat-fusion, no-qa-matching
  std::string footnote;
};

/// Trains and evaluates the four variants (full, unidirectional matching,
/// concat fusion, no question-answer matching) over the same `num_seeds`
/// seeds (base_train.seed + k) and aggregates mean ± stdev plus deltas versus
/// the full model. Per-run progress goes to `log` when given.
AblationReport run_ablation_suite(const ModelConfig& base_model, const TrainConfig& base_train,
                                  std::span<const MultiChoiceExample> train_data,
                                  std::span<const MultiChoiceExample> dev_data, int num_seeds,
                                  std::ostream* log = nullptr);

std::string format_ablation_text(const AblationReport& report);
std::string format_ablation_json(const AblationReport& report);

} // namespace dmn

#endif
