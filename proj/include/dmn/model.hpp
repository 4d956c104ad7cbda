#ifndef DMN_MODEL_HPP
#define DMN_MODEL_HPP

#include "dmn/data.hpp"
#include "dmn/encoder.hpp"
#include "dmn/gradcheck.hpp"
#include "dmn/matching.hpp"
#include "dmn/tape.hpp"
#include "dmn/types.hpp"
#include "dmn/vocab.hpp"

#include <random>
#include <string>
#include <vector>

namespace dmn {

enum class EncoderKind { lookup, precomputed };
std::string to_string(EncoderKind k);
EncoderKind encoder_from_string(const std::string& s);

struct ModelConfig {
  int hidden = 32;
  int max_seq_len = 64;
  EncoderKind encoder = EncoderKind::lookup;
  MatchConfig match;

  void validate() const;
};

/// The trainable state: configuration, vocabulary, embedding table (lookup
/// encoder only) and the matching parameters.
struct Model {
  ModelConfig config;
  Vocabulary vocab;
  Matrix embedding; // vocab.size() x hidden; empty for the precomputed encoder
  MatchParameters match;
};

/// Fresh model with seeded initialization. The vocabulary is copied in; the
/// embedding table covers every vocabulary id (lookup encoder only).
Model init_model(const ModelConfig& cfg, const Vocabulary& vocab, std::uint64_t seed);

/// Named view of every trainable matrix, in a fixed order shared by the
/// optimizer, serializer and gradient checker. Pair groups are named
/// "pq"/"pa"/"qa" ("pair" when parameters are shared); the classifier is "v".
struct NamedParam {
  std::string name;
  Matrix* value = nullptr;
};
std::vector<NamedParam> parameters(Model& m);

struct NamedParamView {
  std::string name;
  const Matrix* value = nullptr;
};
std::vector<NamedParamView> parameters(const Model& m);

/// Tape handles for one forward pass, aligned with parameters(m).
struct ModelBinding {
  TripletParamVars params;
  Var embedding;           // invalid for the precomputed encoder
  std::vector<Var> ordered; // same order as parameters(m)
};
ModelBinding bind_model(Tape& tape, const Model& m);

struct ModelForward {
  Var loss;
  Var logits;   // 1 x N
  Vector probs; // N
  int prediction = -1; // argmax of probs, ties toward the lowest index
};

/// Full forward pass for one example: encode the triplet per candidate, match,
/// fuse, score, and take the candidate-softmax loss at the gold index.
/// `pre` is required for (and only consulted by) the precomputed encoder.
ModelForward model_forward(Tape& tape, const Model& m, const ModelBinding& binding,
                           const MultiChoiceExample& ex, DropoutMode mode,
                           std::mt19937_64* rng = nullptr,
                           const PrecomputedEmbeddings* pre = nullptr);

/// Argmax with ties broken toward the lowest index.
int argmax_lowest(const Vector& probs);

/// Central-difference check of the example's loss against the analytic
/// gradients of every parameter group (dropout off). The model's parameters
/// are perturbed in place and restored.
GradReport model_gradient_check(Model& m, const MultiChoiceExample& ex, Scalar step,
                                Scalar tolerance, const PrecomputedEmbeddings* pre = nullptr);

/// Key under which candidate `index` of example `id` is stored in a
/// precomputed-embedding container (role = answer).
std::string candidate_key(const std::string& example_id, int index);

} // namespace dmn

#endif
