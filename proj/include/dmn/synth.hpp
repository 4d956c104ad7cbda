#ifndef DMN_SYNTH_HPP
#define DMN_SYNTH_HPP

#include "dmn/data.hpp"
#include "dmn/types.hpp"

#include <cstdint>

namespace dmn {

/// Desk-scale stand-in for a multi-choice reading task. Each passage embeds a
/// contiguous key phrase; the correct candidate is a reordering of the key,
/// distractors share a tunable fraction of (non-key) passage tokens plus
/// tokens absent from the passage, and never the key phrase itself. High
/// overlap makes distractors superficially similar to the passage.
struct SynthTaskSpec {
  int vocab_size = 64;
  int num_candidates = 4;
  int passage_len = 20;
  int answer_len = 4;
  Scalar distractor_overlap = 0.5; // fraction of answer tokens drawn from the passage
  int train_size = 2000;
  int dev_size = 500;
  int test_size = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthDatasets {
  std::vector<MultiChoiceExample> train, dev, test;
};

/// Deterministic in spec.seed: the same spec yields identical datasets.
SynthDatasets generate_synthetic(const SynthTaskSpec& spec);

} // namespace dmn

#endif
