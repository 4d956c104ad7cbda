#include "dmn/serialize.hpp"

#include "dmn/binio.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dmn {

namespace {

constexpr char kMagic[4] = {'D', 'M', 'N', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_config(std::ostream& os, const ModelConfig& cfg) {
  binio::write_u32(os, static_cast<std::uint32_t>(cfg.hidden));
  binio::write_u32(os, static_cast<std::uint32_t>(cfg.max_seq_len));
  binio::write_u8(os, cfg.encoder == EncoderKind::lookup ? 0 : 1);
  binio::write_u8(os, cfg.match.attention == AttentionNorm::dual ? 0 : 1);
  binio::write_u8(os, cfg.match.direction == MatchDirection::bidirectional ? 0 : 1);
  binio::write_u8(os, cfg.match.fusion == FusionKind::gated ? 0 : 1);
  binio::write_u8(os, cfg.match.use_qa_pair ? 1 : 0);
  binio::write_u8(os, cfg.match.share_pair_parameters ? 1 : 0);
  binio::write_f64(os, cfg.match.matching_dropout);
}

ModelConfig read_config(std::istream& is) {
  ModelConfig cfg;
  cfg.hidden = static_cast<int>(binio::read_u32(is));
  cfg.max_seq_len = static_cast<int>(binio::read_u32(is));
  cfg.encoder = binio::read_u8(is) == 0 ? EncoderKind::lookup : EncoderKind::precomputed;
  cfg.match.attention = binio::read_u8(is) == 0 ? AttentionNorm::dual : AttentionNorm::literal;
  cfg.match.direction =
      binio::read_u8(is) == 0 ? MatchDirection::bidirectional : MatchDirection::unidirectional;
  cfg.match.fusion = binio::read_u8(is) == 0 ? FusionKind::gated : FusionKind::concat;
  cfg.match.use_qa_pair = binio::read_u8(is) != 0;
  cfg.match.share_pair_parameters = binio::read_u8(is) != 0;
  cfg.match.matching_dropout = binio::read_f64(is);
  cfg.validate();
  return cfg;
}

} // namespace

void save_model(const Model& m, const std::filesystem::path& path,
                const OptimizerState* optimizer) {
  std::ostringstream payload(std::ios::binary);
  write_config(payload, m.config);

  const std::vector<std::string>& tokens = m.vocab.tokens();
  binio::write_u64(payload, tokens.size());
  for (const std::string& t : tokens) binio::write_string(payload, t);

  const std::vector<NamedParamView> params = parameters(m);
  binio::write_u32(payload, static_cast<std::uint32_t>(params.size()));
  for (const NamedParamView& p : params) {
    binio::write_string(payload, p.name);
    binio::write_matrix(payload, *p.value);
  }

  binio::write_u8(payload, optimizer ? 1 : 0);
  if (optimizer) {
    if (optimizer->m.size() != params.size())
      throw std::invalid_argument("save_model: optimizer state does not match parameter count");
    binio::write_u64(payload, static_cast<std::uint64_t>(optimizer->step));
    for (std::size_t i = 0; i < params.size(); ++i) {
      binio::write_matrix(payload, optimizer->m[i]);
      binio::write_matrix(payload, optimizer->v[i]);
    }
  }

  const std::string body = payload.str();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open '" + path.string() + "'");
  out.write(kMagic, sizeof kMagic);
  binio::write_u32(out, kVersion);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  binio::write_u32(out, binio::crc32(body.data(), body.size()));
  if (!out) throw std::runtime_error("save_model: write to '" + path.string() + "' failed");
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open '" + path.string() + "'");
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  constexpr std::size_t header = sizeof kMagic + 4, footer = 4;
  if (raw.size() < header + footer)
    throw std::runtime_error("load_model: '" + path.string() + "' is truncated");
  if (raw.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("load_model: '" + path.string() + "' is not a model file");

  std::istringstream is(raw.substr(sizeof kMagic), std::ios::binary);
  const std::uint32_t version = binio::read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("load_model: version " + std::to_string(version) +
                             " unsupported (expected " + std::to_string(kVersion) + ")");

  const std::size_t body_len = raw.size() - header - footer;
  std::istringstream crc_in(raw.substr(raw.size() - footer), std::ios::binary);
  const std::uint32_t expect = binio::read_u32(crc_in);
  const std::uint32_t actual = binio::crc32(raw.data() + header, body_len);
  if (expect != actual)
    throw std::runtime_error("load_model: checksum mismatch in '" + path.string() +
                             "' (file corrupted or truncated)");

  std::istringstream body(raw.substr(header, body_len), std::ios::binary);
  ModelBundle bundle;
  bundle.model.config = read_config(body);

  const std::uint64_t vocab_count = binio::read_u64(body);
  for (std::uint64_t i = 0; i < vocab_count; ++i)
    bundle.model.vocab.add(binio::read_string(body));

  const std::uint32_t param_count = binio::read_u32(body);
  std::vector<std::pair<std::string, Matrix>> stored;
  stored.reserve(param_count);
  for (std::uint32_t i = 0; i < param_count; ++i) {
    std::string name = binio::read_string(body);
    Matrix value = binio::read_matrix(body);
    stored.emplace_back(std::move(name), std::move(value));
  }

  // Route matrices into the model through the canonical registry, which also
  // pins the expected set of names for this config.
  const std::vector<NamedParam> registry = parameters(bundle.model);
  if (registry.size() != stored.size())
    throw std::runtime_error("load_model: expected " + std::to_string(registry.size()) +
                             " parameters for this config, file has " +
                             std::to_string(stored.size()));
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (registry[i].name != stored[i].first)
      throw std::runtime_error("load_model: parameter '" + stored[i].first + "' where '" +
                               registry[i].name + "' was expected");
    *registry[i].value = std::move(stored[i].second);
  }
  if (bundle.model.config.match.share_pair_parameters) {
    bundle.model.match.pa = bundle.model.match.pq;
    bundle.model.match.qa = bundle.model.match.pq;
  }

  const int l = bundle.model.config.hidden;
  const int rep_len = representation_length(bundle.model.config.match, l);
  for (const NamedParam& p : registry) {
    const Matrix& value = *p.value;
    const bool ok = p.name == "embedding"
                        ? value.rows() == bundle.model.vocab.size() && value.cols() == l
                    : p.name == "v"       ? value.rows() == rep_len && value.cols() == 1
                    : p.name.ends_with(".b") ? value.rows() == 1 && value.cols() == l
                                             : value.rows() == l && value.cols() == l;
    if (!ok)
      throw std::runtime_error("load_model: parameter '" + p.name + "' has shape " +
                               shape_of(value) + ", inconsistent with the stored config");
  }

  if (binio::read_u8(body) != 0) {
    OptimizerState state;
    state.step = static_cast<std::int64_t>(binio::read_u64(body));
    for (std::size_t i = 0; i < registry.size(); ++i) {
      state.m.push_back(binio::read_matrix(body));
      state.v.push_back(binio::read_matrix(body));
    }
    bundle.optimizer = std::move(state);
  }
  return bundle;
}

} // namespace dmn
