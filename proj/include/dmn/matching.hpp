#ifndef DMN_MATCHING_HPP
#define DMN_MATCHING_HPP

#include "dmn/tape.hpp"
#include "dmn/types.hpp"

#include <random>
#include <span>
#include <string>

namespace dmn {

/// dual: one independent row-softmax per matching direction (default,
/// restores swap symmetry). literal: a single row-softmax whose transpose
/// weights the reverse direction.
enum class AttentionNorm { dual, literal };
enum class MatchDirection { bidirectional, unidirectional };
enum class FusionKind { gated, concat };

struct MatchConfig {
  AttentionNorm attention = AttentionNorm::dual;
  MatchDirection direction = MatchDirection::bidirectional;
  FusionKind fusion = FusionKind::gated;
  bool use_qa_pair = true;
  Scalar matching_dropout = 0.3;
  bool share_pair_parameters = false;

  void validate() const;
};

/// Learnable weights for one sequence pair. b is kept as a 1 x l row so all
/// parameters share the Matrix representation.
struct PairParameters {
  Matrix w;  // l x l, attention bilinear form
  Matrix w1; // l x l, first-direction projection
  Matrix w2; // l x l, second-direction projection
  Matrix w3; // l x l, gate weight for the first pooled vector
  Matrix w4; // l x l, gate weight for the second pooled vector
  Matrix b;  // 1 x l, gate bias
};

/// All matching/classification weights: one PairParameters per pair plus the
/// candidate scorer v (length depends on the active configuration).
struct MatchParameters {
  PairParameters pq, pa, qa;
  Matrix v; // L x 1
};

/// Length of the final triplet representation C under a configuration.
int representation_length(const MatchConfig& cfg, int hidden);

PairParameters init_pair_parameters(int hidden, std::mt19937_64& rng);
MatchParameters init_match_parameters(int hidden, const MatchConfig& cfg, std::mt19937_64& rng);

/// Tape handles for one pair's parameters.
struct PairVars {
  Var w, w1, w2, w3, w4, b;
};

PairVars bind_pair(Tape& tape, const PairParameters& pp);

/// Intermediate results of the pairwise matching stage. Handles not produced
/// by the active configuration (e.g. the v-side in unidirectional mode) are
/// invalid.
struct MatchHalf {
  Var attn_u; // row-normalized u -> v attention
  Var attn_v; // v -> u weights: independent softmax (dual) or transposed attn_u (literal)
  Var e_u, e_v;
  Var s_u, s_v;
};

/// Attention + ReLU projections for one ordered pair (Hu, Hv). Dropout at
/// cfg.matching_dropout is applied to S^u/S^v in train mode (rng required).
MatchHalf bidirectional_match(Tape& tape, Var hu, Var hv, const PairVars& pp,
                              const MatchConfig& cfg, DropoutMode mode,
                              std::mt19937_64* rng);

struct FuseOut {
  Var m_u, m_v; // pooled 1 x l vectors
  Var gate;     // in (0,1) elementwise; invalid unless gated fusion ran
  Var fused;    // 1 x l (gated / unidirectional) or 1 x 2l (concat)
};

/// Row-wise max pooling followed by the configured fusion of the two pooled
/// vectors. With an invalid s_v (unidirectional) the pooled first vector
/// passes through.
FuseOut gated_fuse(Tape& tape, Var s_u, Var s_v, const PairVars& pp, const MatchConfig& cfg);

struct PairTrace {
  MatchHalf match;
  FuseOut fuse;
};

struct TripletVars {
  Var c; // 1 x representation_length
  PairTrace pq, pa, qa;
};

struct TripletParamVars {
  PairVars pq, pa, qa;
  Var v;
};

/// Match + fuse for (p,q), (p,a) and, when configured, (q,a); concatenates
/// the fused vectors into C ordered [pq; pa; qa].
TripletVars triplet_representation(Tape& tape, Var hp, Var hq, Var ha,
                                   const TripletParamVars& params, const MatchConfig& cfg,
                                   DropoutMode mode, std::mt19937_64* rng);

struct ScoredLoss {
  Var loss;   // scalar node
  Var logits; // 1 x N
  Vector probs;
};

/// Scores each candidate representation with v, normalizes over candidates
/// and returns the negative log likelihood of the gold candidate.
ScoredLoss score_and_loss(Tape& tape, std::span<const Var> reps, Var v, int gold);

std::string to_string(AttentionNorm a);
std::string to_string(MatchDirection d);
std::string to_string(FusionKind f);
AttentionNorm attention_from_string(const std::string& s);
MatchDirection direction_from_string(const std::string& s);
FusionKind fusion_from_string(const std::string& s);

} // namespace dmn

#endif
