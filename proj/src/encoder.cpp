#include "dmn/encoder.hpp"

#include "dmn/binio.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

namespace dmn {

Matrix init_embedding_table(int vocab_size, int hidden, std::uint64_t seed) {
  if (vocab_size < 2 || hidden < 1)
    throw std::invalid_argument("init_embedding_table: need vocab_size >= 2 and hidden >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> unif(-0.1, 0.1);
  Matrix table(vocab_size, hidden);
  for (Index i = 0; i < table.rows(); ++i)
    for (Index j = 0; j < table.cols(); ++j) table(i, j) = unif(rng);
  return table;
}

Var encode_lookup(Tape& tape, Var table, const TokenSequence& tokens) {
  return embedding_rows(tape, table, tokens.ids);
}

std::string role_name(Role role) {
  switch (role) {
    case Role::passage: return "passage";
    case Role::question: return "question";
    case Role::answer: return "answer";
  }
  return "?";
}

namespace {

constexpr char kMagic[4] = {'D', 'M', 'N', 'E'};
constexpr std::uint32_t kVersion = 1;

} // namespace

void PrecomputedEmbeddings::add(const std::string& example_id, Role role, Matrix h) {
  if (h.rows() < 1 || h.cols() < 1)
    throw std::invalid_argument("precomputed embeddings: empty matrix for '" + example_id + "'");
  records_[{example_id, static_cast<int>(role)}] = std::move(h);
}

bool PrecomputedEmbeddings::contains(const std::string& example_id, Role role) const {
  return records_.count({example_id, static_cast<int>(role)}) > 0;
}

const Matrix& PrecomputedEmbeddings::lookup(const std::string& example_id, Role role) const {
  auto it = records_.find({example_id, static_cast<int>(role)});
  if (it == records_.end())
    throw std::runtime_error("precomputed embeddings: no entry for id '" + example_id +
                             "' role '" + role_name(role) + "'");
  return it->second;
}

std::vector<std::string> PrecomputedEmbeddings::example_ids() const {
  std::set<std::string> ids;
  for (const auto& [key, value] : records_) ids.insert(key.first);
  return {ids.begin(), ids.end()};
}

void PrecomputedEmbeddings::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("precomputed embeddings: cannot open '" + path.string() + "'");
  os.write(kMagic, 4);
  binio::write_u32(os, kVersion);
  binio::write_u64(os, records_.size());
  for (const auto& [key, matrix] : records_) {
    binio::write_string(os, key.first);
    binio::write_u8(os, static_cast<std::uint8_t>(key.second));
    binio::write_matrix(os, matrix);
  }
  if (!os) throw std::runtime_error("precomputed embeddings: write failed for '" + path.string() + "'");
}

namespace {

void load_one_file(const std::filesystem::path& path, PrecomputedEmbeddings& out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("precomputed embeddings: cannot open '" + path.string() + "'");
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || !std::equal(magic, magic + 4, kMagic))
    throw std::runtime_error("precomputed embeddings: '" + path.string() + "' is not an embedding file");
  const std::uint32_t version = binio::read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("precomputed embeddings: version " + std::to_string(version) +
                             " unsupported (expected " + std::to_string(kVersion) + ")");
  const std::uint64_t count = binio::read_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = binio::read_string(is);
    const std::uint8_t role = binio::read_u8(is);
    if (role > 2)
      throw std::runtime_error("precomputed embeddings: bad role byte in '" + path.string() + "'");
    out.add(id, static_cast<Role>(role), binio::read_matrix(is));
  }
}

} // namespace

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::filesystem::path& path) {
  PrecomputedEmbeddings out;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw std::runtime_error("precomputed embeddings: directory '" + path.string() + "' is empty");
    for (const auto& f : files) load_one_file(f, out);
  } else {
    load_one_file(path, out);
  }
  return out;
}

} // namespace dmn
