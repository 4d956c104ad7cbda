#include "dmn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dmn {

void SynthTaskSpec::validate() const {
  if (num_candidates < 2) throw std::invalid_argument("SynthTaskSpec: num_candidates must be >= 2");
  if (passage_len < 1 || answer_len < 1)
    throw std::invalid_argument("SynthTaskSpec: lengths must be >= 1");
  if (answer_len > passage_len)
    throw std::invalid_argument("SynthTaskSpec: answer_len " + std::to_string(answer_len) +
                                " exceeds passage_len " + std::to_string(passage_len));
  if (distractor_overlap < 0.0 || distractor_overlap > 1.0)
    throw std::invalid_argument("SynthTaskSpec: distractor_overlap must be in [0,1]");
  if (train_size < 0 || dev_size < 0 || test_size < 0)
    throw std::invalid_argument("SynthTaskSpec: split sizes must be >= 0");
  // Distractors need tokens outside passage+key, and the key must be distinct
  // tokens: keep the vocabulary comfortably larger than one passage.
  if (vocab_size < passage_len + answer_len + 1)
    throw std::invalid_argument("SynthTaskSpec: vocab_size must exceed passage_len + answer_len");
}

namespace {

std::string token_name(int id) { return "w" + std::to_string(id); }

std::string join(const std::vector<int>& ids) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out << ' ';
    out << token_name(ids[i]);
  }
  return out.str();
}

// k distinct values from [0, n) excluding `excluded`, uniform order.
std::vector<int> sample_distinct(int n, int k, const std::set<int>& excluded,
                                 std::mt19937_64& rng) {
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    if (!excluded.count(i)) pool.push_back(i);
  if (static_cast<int>(pool.size()) < k)
    throw std::logic_error("generate_synthetic: token pool exhausted");
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

MultiChoiceExample make_example(const SynthTaskSpec& spec, const std::string& id,
                                std::mt19937_64& rng) {
  // Key phrase: answer_len distinct tokens, embedded contiguously in the
  // passage at a random offset; filler positions hold random non-key tokens.
  const std::vector<int> key = sample_distinct(spec.vocab_size, spec.answer_len, {}, rng);
  const std::set<int> key_set(key.begin(), key.end());

  std::vector<int> passage(static_cast<std::size_t>(spec.passage_len));
  std::uniform_int_distribution<int> any_token(0, spec.vocab_size - 1);
  for (int& t : passage) {
    do t = any_token(rng); while (key_set.count(t));
  }
  std::uniform_int_distribution<int> offset_dist(0, spec.passage_len - spec.answer_len);
  const int offset = offset_dist(rng);
  for (int i = 0; i < spec.answer_len; ++i)
    passage[static_cast<std::size_t>(offset + i)] = key[static_cast<std::size_t>(i)];

  std::set<int> passage_set(passage.begin(), passage.end());

  // Correct candidate: the key phrase reordered.
  std::vector<int> correct = key;
  std::shuffle(correct.begin(), correct.end(), rng);

  // Question: tokens unrelated to the key (the signal lives in passage/answer
  // matching, as in cloze-style distractor tasks).
  const std::vector<int> question = sample_distinct(spec.vocab_size, spec.answer_len, key_set, rng);

  // Distractors: `overlap` fraction of tokens from the passage (but never key
  // tokens), the rest from outside the passage entirely.
  const int n_overlap = static_cast<int>(std::lround(spec.distractor_overlap * spec.answer_len));
  std::vector<int> passage_non_key;
  for (int t : passage_set)
    if (!key_set.count(t)) passage_non_key.push_back(t);

  MultiChoiceExample ex;
  ex.id = id;
  ex.passage = join(passage);
  ex.question = join(question);
  std::uniform_int_distribution<int> gold_dist(0, spec.num_candidates - 1);
  ex.gold = gold_dist(rng);

  std::set<int> outside_excluded = key_set;
  outside_excluded.insert(passage_set.begin(), passage_set.end());
  for (int c = 0; c < spec.num_candidates; ++c) {
    if (c == ex.gold) {
      ex.candidates.push_back(join(correct));
      continue;
    }
    const int from_passage = std::min<int>(n_overlap, static_cast<int>(passage_non_key.size()));
    std::vector<int> cand;
    if (from_passage > 0) {
      std::vector<int> picks = passage_non_key;
      std::shuffle(picks.begin(), picks.end(), rng);
      cand.assign(picks.begin(), picks.begin() + from_passage);
    }
    const std::vector<int> outside =
        sample_distinct(spec.vocab_size, spec.answer_len - from_passage, outside_excluded, rng);
    cand.insert(cand.end(), outside.begin(), outside.end());
    std::shuffle(cand.begin(), cand.end(), rng);
    ex.candidates.push_back(join(cand));
  }
  return ex;
}

std::vector<MultiChoiceExample> make_split(const SynthTaskSpec& spec, const std::string& split,
                                           int count, std::uint64_t sub_seed) {
  std::mt19937_64 rng(sub_seed);
  std::vector<MultiChoiceExample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(make_example(spec, "synth-" + split + "-" + std::to_string(i), rng));
  return out;
}

} // namespace

SynthDatasets generate_synthetic(const SynthTaskSpec& spec) {
  spec.validate();
  SynthDatasets out;
  out.train = make_split(spec, "train", spec.train_size, spec.seed * 3 + 1);
  out.dev = make_split(spec, "dev", spec.dev_size, spec.seed * 3 + 2);
  out.test = make_split(spec, "test", spec.test_size, spec.seed * 3 + 3);
  return out;
}

} // namespace dmn
