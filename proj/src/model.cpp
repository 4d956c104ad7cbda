#include "dmn/model.hpp"

#include <stdexcept>

namespace dmn {

std::string to_string(EncoderKind k) {
  return k == EncoderKind::lookup ? "lookup" : "precomputed";
}

EncoderKind encoder_from_string(const std::string& s) {
  if (s == "lookup") return EncoderKind::lookup;
  if (s == "precomputed") return EncoderKind::precomputed;
  throw std::invalid_argument("unknown encoder '" + s + "' (expected lookup|precomputed)");
}

void ModelConfig::validate() const {
  if (hidden < 1) throw std::invalid_argument("ModelConfig: hidden must be >= 1");
  if (max_seq_len < 1) throw std::invalid_argument("ModelConfig: max_seq_len must be >= 1");
  match.validate();
}

Model init_model(const ModelConfig& cfg, const Vocabulary& vocab, std::uint64_t seed) {
  cfg.validate();
  Model m;
  m.config = cfg;
  m.vocab = vocab;
  if (cfg.encoder == EncoderKind::lookup)
    m.embedding = init_embedding_table(static_cast<int>(vocab.size()), cfg.hidden, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  m.match = init_match_parameters(cfg.hidden, cfg.match, rng);
  if (cfg.match.share_pair_parameters) {
    m.match.pa = m.match.pq;
    m.match.qa = m.match.pq;
  }
  return m;
}

namespace {

void push_group(std::vector<NamedParam>& out, const std::string& group, PairParameters& pp) {
  out.push_back({group + ".w", &pp.w});
  out.push_back({group + ".w1", &pp.w1});
  out.push_back({group + ".w2", &pp.w2});
  out.push_back({group + ".w3", &pp.w3});
  out.push_back({group + ".w4", &pp.w4});
  out.push_back({group + ".b", &pp.b});
}

void push_pair_vars(std::vector<Var>& out, const PairVars& vars) {
  out.push_back(vars.w);
  out.push_back(vars.w1);
  out.push_back(vars.w2);
  out.push_back(vars.w3);
  out.push_back(vars.w4);
  out.push_back(vars.b);
}

} // namespace

std::vector<NamedParam> parameters(Model& m) {
  std::vector<NamedParam> out;
  if (m.config.encoder == EncoderKind::lookup) out.push_back({"embedding", &m.embedding});
  if (m.config.match.share_pair_parameters) {
    push_group(out, "pair", m.match.pq);
  } else {
    push_group(out, "pq", m.match.pq);
    push_group(out, "pa", m.match.pa);
    if (m.config.match.use_qa_pair) push_group(out, "qa", m.match.qa);
  }
  out.push_back({"v", &m.match.v});
  return out;
}

std::vector<NamedParamView> parameters(const Model& m) {
  std::vector<NamedParamView> out;
  for (const NamedParam& p : parameters(const_cast<Model&>(m))) // read-only view
    out.push_back({p.name, p.value});
  return out;
}

ModelBinding bind_model(Tape& tape, const Model& m) {
  ModelBinding binding;
  if (m.config.encoder == EncoderKind::lookup) {
    binding.embedding = tape.param(m.embedding);
    binding.ordered.push_back(binding.embedding);
  }
  if (m.config.match.share_pair_parameters) {
    const PairVars shared = bind_pair(tape, m.match.pq);
    push_pair_vars(binding.ordered, shared);
    binding.params.pq = shared;
    binding.params.pa = shared;
    binding.params.qa = shared;
  } else {
    binding.params.pq = bind_pair(tape, m.match.pq);
    push_pair_vars(binding.ordered, binding.params.pq);
    binding.params.pa = bind_pair(tape, m.match.pa);
    push_pair_vars(binding.ordered, binding.params.pa);
    if (m.config.match.use_qa_pair) {
      binding.params.qa = bind_pair(tape, m.match.qa);
      push_pair_vars(binding.ordered, binding.params.qa);
    }
  }
  binding.params.v = tape.param(m.match.v);
  binding.ordered.push_back(binding.params.v);
  return binding;
}

int argmax_lowest(const Vector& probs) {
  int best = 0;
  for (Index i = 1; i < probs.size(); ++i)
    if (probs(i) > probs(best)) best = static_cast<int>(i);
  return best;
}

std::string candidate_key(const std::string& example_id, int index) {
  return example_id + "#" + std::to_string(index);
}

namespace {

// Tokenize, substituting a single unknown-token placeholder for text that
// yields no tokens (empty questions in story-completion inputs).
TokenSequence tokens_or_placeholder(const std::string& text, const Vocabulary& vocab,
                                    int max_len) {
  if (split_tokens(text).empty()) return TokenSequence{{Vocabulary::unknown_id}, 1};
  return tokenize(text, vocab, max_len);
}

Var frozen_input(Tape& tape, const PrecomputedEmbeddings& pre, const std::string& key, Role role,
                 int hidden) {
  const Matrix& h = pre.lookup(key, role);
  if (h.cols() != hidden)
    throw std::invalid_argument("precomputed embedding for '" + key + "' (" + role_name(role) +
                                ") has hidden size " + std::to_string(h.cols()) +
                                ", configured " + std::to_string(hidden));
  return tape.input(h);
}

} // namespace

ModelForward model_forward(Tape& tape, const Model& m, const ModelBinding& binding,
                           const MultiChoiceExample& ex, DropoutMode mode, std::mt19937_64* rng,
                           const PrecomputedEmbeddings* pre) {
  validate_example(ex);
  const ModelConfig& cfg = m.config;
  const int n = static_cast<int>(ex.candidates.size());

  Var hp, hq;
  std::vector<Var> ha(static_cast<std::size_t>(n));
  if (cfg.encoder == EncoderKind::lookup) {
    hp = encode_lookup(tape, binding.embedding,
                       tokens_or_placeholder(ex.passage, m.vocab, cfg.max_seq_len));
    hq = encode_lookup(tape, binding.embedding,
                       tokens_or_placeholder(ex.question, m.vocab, cfg.max_seq_len));
    for (int i = 0; i < n; ++i)
      ha[static_cast<std::size_t>(i)] = encode_lookup(
          tape, binding.embedding,
          tokens_or_placeholder(ex.candidates[static_cast<std::size_t>(i)], m.vocab,
                                cfg.max_seq_len));
  } else {
    if (!pre)
      throw std::invalid_argument(
          "model_forward: the precomputed encoder needs an embeddings container");
    hp = frozen_input(tape, *pre, ex.id, Role::passage, cfg.hidden);
    hq = frozen_input(tape, *pre, ex.id, Role::question, cfg.hidden);
    for (int i = 0; i < n; ++i)
      ha[static_cast<std::size_t>(i)] =
          frozen_input(tape, *pre, candidate_key(ex.id, i), Role::answer, cfg.hidden);
  }

  std::vector<Var> reps;
  reps.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const TripletVars tv = triplet_representation(tape, hp, hq, ha[static_cast<std::size_t>(i)],
                                                  binding.params, cfg.match, mode, rng);
    reps.push_back(tv.c);
  }

  const ScoredLoss scored = score_and_loss(tape, reps, binding.params.v, ex.gold);
  ModelForward out;
  out.loss = scored.loss;
  out.logits = scored.logits;
  out.probs = scored.probs;
  out.prediction = argmax_lowest(out.probs);
  return out;
}

GradReport model_gradient_check(Model& m, const MultiChoiceExample& ex, Scalar step,
                                Scalar tolerance, const PrecomputedEmbeddings* pre) {
  const std::vector<NamedParam> registry = parameters(m);

  std::vector<Matrix> analytic(registry.size());
  {
    Tape tape;
    const ModelBinding binding = bind_model(tape, m);
    const ModelForward fwd = model_forward(tape, m, binding, ex, DropoutMode::eval, nullptr, pre);
    backward(tape, fwd.loss);
    for (std::size_t i = 0; i < registry.size(); ++i) analytic[i] = tape.grad(binding.ordered[i]);
  }

  std::vector<GradCheckGroup> groups;
  for (std::size_t i = 0; i < registry.size(); ++i)
    groups.push_back({registry[i].name, registry[i].value, &analytic[i]});

  const auto loss_fn = [&]() -> Scalar {
    Tape tape;
    const ModelBinding binding = bind_model(tape, m);
    const ModelForward fwd = model_forward(tape, m, binding, ex, DropoutMode::eval, nullptr, pre);
    return tape.value(fwd.loss)(0, 0);
  };
  return finite_diff_check(groups, loss_fn, step, tolerance);
}

} // namespace dmn
