#include "dmn/matching.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dmn {

void MatchConfig::validate() const {
  if (matching_dropout < 0.0 || matching_dropout >= 1.0)
    throw std::invalid_argument("MatchConfig: matching_dropout must be in [0,1)");
}

int representation_length(const MatchConfig& cfg, int hidden) {
  const int per_pair = cfg.direction == MatchDirection::unidirectional ? 1
                       : cfg.fusion == FusionKind::concat              ? 2
                                                                       : 1;
  const int pairs = cfg.use_qa_pair ? 3 : 2;
  return per_pair * pairs * hidden;
}

namespace {

Matrix glorot_uniform(int rows, int cols, std::mt19937_64& rng) {
  const Scalar limit = std::sqrt(6.0 / static_cast<Scalar>(rows + cols));
  std::uniform_real_distribution<Scalar> unif(-limit, limit);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = unif(rng);
  return m;
}

} // namespace

PairParameters init_pair_parameters(int hidden, std::mt19937_64& rng) {
  PairParameters pp;
  pp.w = glorot_uniform(hidden, hidden, rng);
  pp.w1 = glorot_uniform(hidden, hidden, rng);
  pp.w2 = glorot_uniform(hidden, hidden, rng);
  pp.w3 = glorot_uniform(hidden, hidden, rng);
  pp.w4 = glorot_uniform(hidden, hidden, rng);
  pp.b = Matrix::Zero(1, hidden);
  return pp;
}

MatchParameters init_match_parameters(int hidden, const MatchConfig& cfg, std::mt19937_64& rng) {
  MatchParameters mp;
  mp.pq = init_pair_parameters(hidden, rng);
  mp.pa = init_pair_parameters(hidden, rng);
  mp.qa = init_pair_parameters(hidden, rng);
  const int len = representation_length(cfg, hidden);
  std::uniform_real_distribution<Scalar> unif(-0.1, 0.1);
  mp.v = Matrix(len, 1);
  for (Index i = 0; i < mp.v.rows(); ++i) mp.v(i, 0) = unif(rng);
  return mp;
}

PairVars bind_pair(Tape& tape, const PairParameters& pp) {
  PairVars vars;
  vars.w = tape.param(pp.w);
  vars.w1 = tape.param(pp.w1);
  vars.w2 = tape.param(pp.w2);
  vars.w3 = tape.param(pp.w3);
  vars.w4 = tape.param(pp.w4);
  vars.b = tape.param(pp.b);
  return vars;
}

MatchHalf bidirectional_match(Tape& tape, Var hu, Var hv, const PairVars& pp,
                              const MatchConfig& cfg, DropoutMode mode,
                              std::mt19937_64* rng) {
  const Index l = tape.value(hu).cols();
  if (tape.value(hv).cols() != l)
    throw std::invalid_argument("bidirectional_match: hidden size mismatch " +
                                shape_of(tape.value(hu)) + " vs " + shape_of(tape.value(hv)));
  const bool drop = mode == DropoutMode::train && cfg.matching_dropout > 0.0;
  if (drop && !rng)
    throw std::invalid_argument("bidirectional_match: train-mode dropout needs an rng");

  MatchHalf out;
  Var scores = matmul(tape, matmul(tape, hu, pp.w), transpose(tape, hv));
  out.attn_u = softmax_rows(tape, scores);
  out.e_u = matmul(tape, out.attn_u, hv);
  out.s_u = relu(tape, matmul(tape, out.e_u, pp.w1));
  if (drop) out.s_u = dropout(tape, out.s_u, cfg.matching_dropout, mode, *rng);

  if (cfg.direction == MatchDirection::bidirectional) {
    out.attn_v = cfg.attention == AttentionNorm::dual
                     ? softmax_rows(tape, transpose(tape, scores))
                     : transpose(tape, out.attn_u);
    out.e_v = matmul(tape, out.attn_v, hu);
    out.s_v = relu(tape, matmul(tape, out.e_v, pp.w2));
    if (drop) out.s_v = dropout(tape, out.s_v, cfg.matching_dropout, mode, *rng);
  }
  return out;
}

FuseOut gated_fuse(Tape& tape, Var s_u, Var s_v, const PairVars& pp, const MatchConfig& cfg) {
  FuseOut out;
  out.m_u = maxpool_over_rows(tape, s_u);
  if (!s_v.valid()) { // unidirectional: the pooled first direction passes through
    out.fused = out.m_u;
    return out;
  }
  out.m_v = maxpool_over_rows(tape, s_v);
  if (cfg.fusion == FusionKind::gated) {
    Var pre = add(tape, add(tape, matmul(tape, out.m_u, pp.w3), matmul(tape, out.m_v, pp.w4)),
                  pp.b);
    out.gate = sigmoid(tape, pre);
    out.fused = add(tape, hadamard(tape, out.gate, out.m_u),
                    hadamard(tape, one_minus(tape, out.gate), out.m_v));
  } else {
    const std::array<Var, 2> parts{out.m_u, out.m_v};
    out.fused = concat_cols(tape, parts);
  }
  return out;
}

namespace {

PairTrace match_and_fuse(Tape& tape, Var hu, Var hv, const PairVars& pp, const MatchConfig& cfg,
                         DropoutMode mode, std::mt19937_64* rng) {
  PairTrace trace;
  trace.match = bidirectional_match(tape, hu, hv, pp, cfg, mode, rng);
  trace.fuse = gated_fuse(tape, trace.match.s_u, trace.match.s_v, pp, cfg);
  return trace;
}

} // namespace

TripletVars triplet_representation(Tape& tape, Var hp, Var hq, Var ha,
                                   const TripletParamVars& params, const MatchConfig& cfg,
                                   DropoutMode mode, std::mt19937_64* rng) {
  cfg.validate();
  TripletVars out;
  out.pq = match_and_fuse(tape, hp, hq, params.pq, cfg, mode, rng);
  out.pa = match_and_fuse(tape, hp, ha, params.pa, cfg, mode, rng);
  std::vector<Var> parts{out.pq.fuse.fused, out.pa.fuse.fused};
  if (cfg.use_qa_pair) {
    out.qa = match_and_fuse(tape, hq, ha, params.qa, cfg, mode, rng);
    parts.push_back(out.qa.fuse.fused);
  }
  out.c = concat_cols(tape, parts);
  return out;
}

ScoredLoss score_and_loss(Tape& tape, std::span<const Var> reps, Var v, int gold) {
  if (reps.size() < 2)
    throw std::invalid_argument("score_and_loss: need at least 2 candidates, got " +
                                std::to_string(reps.size()));
  if (gold < 0 || static_cast<std::size_t>(gold) >= reps.size())
    throw std::out_of_range("score_and_loss: gold index " + std::to_string(gold) +
                            " out of range for " + std::to_string(reps.size()) + " candidates");
  const Index vlen = tape.value(v).rows();
  std::vector<Var> logit_vars;
  logit_vars.reserve(reps.size());
  for (Var rep : reps) {
    const Matrix& c = tape.value(rep);
    if (c.rows() != 1 || c.cols() != vlen)
      throw std::invalid_argument("score_and_loss: representation " + shape_of(c) +
                                  " incompatible with scorer of length " + std::to_string(vlen));
    logit_vars.push_back(matmul(tape, rep, v));
  }
  ScoredLoss out;
  out.logits = concat_cols(tape, logit_vars);
  out.loss = nll_from_logits(tape, out.logits, gold);
  out.probs = candidate_probs(tape.value(out.logits));
  return out;
}

std::string to_string(AttentionNorm a) { return a == AttentionNorm::dual ? "dual" : "literal"; }
std::string to_string(MatchDirection d) {
  return d == MatchDirection::bidirectional ? "bidirectional" : "unidirectional";
}
std::string to_string(FusionKind f) { return f == FusionKind::gated ? "gated" : "concat"; }

AttentionNorm attention_from_string(const std::string& s) {
  if (s == "dual") return AttentionNorm::dual;
  if (s == "literal") return AttentionNorm::literal;
  throw std::invalid_argument("unknown attention mode '" + s + "' (expected dual|literal)");
}

MatchDirection direction_from_string(const std::string& s) {
  if (s == "bi" || s == "bidirectional") return MatchDirection::bidirectional;
  if (s == "uni" || s == "unidirectional") return MatchDirection::unidirectional;
  throw std::invalid_argument("unknown direction '" + s + "' (expected bi|uni)");
}

FusionKind fusion_from_string(const std::string& s) {
  if (s == "gated") return FusionKind::gated;
  if (s == "concat") return FusionKind::concat;
  throw std::invalid_argument("unknown fusion '" + s + "' (expected gated|concat)");
}

} // namespace dmn
