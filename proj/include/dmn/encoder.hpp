#ifndef DMN_ENCODER_HPP
#define DMN_ENCODER_HPP

#include "dmn/tape.hpp"
#include "dmn/types.hpp"
#include "dmn/vocab.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dmn {

/// Hidden matrices of one (passage, question, candidate) triplet.
struct EncodedTriplet {
  Matrix hp, hq, ha;
};

/// Learnable vocab_size x hidden embedding table, uniform in [-0.1, 0.1].
Matrix init_embedding_table(int vocab_size, int hidden, std::uint64_t seed);

/// Row lookup on the tape: output row t equals table row ids[t]; gradients
/// flow back into the looked-up table rows.
Var encode_lookup(Tape& tape, Var table, const TokenSequence& tokens);

enum class Role { passage, question, answer };
std::string role_name(Role role);

/// Container of frozen, externally computed sequence embeddings keyed by
/// (example_id, role). File layout is documented in docs/formats.md; a
/// directory path loads every regular file inside it.
class PrecomputedEmbeddings {
public:
  void add(const std::string& example_id, Role role, Matrix h);
  bool contains(const std::string& example_id, Role role) const;

  /// The stored matrix, bit-identical to what was added. Throws a lookup
  /// error naming the id and role when absent.
  const Matrix& lookup(const std::string& example_id, Role role) const;

  /// Distinct example ids present, sorted.
  std::vector<std::string> example_ids() const;
  std::size_t record_count() const { return records_.size(); }

  void save(const std::filesystem::path& path) const;
  static PrecomputedEmbeddings load(const std::filesystem::path& path);

private:
  std::map<std::pair<std::string, int>, Matrix> records_;
};

} // namespace dmn

#endif
