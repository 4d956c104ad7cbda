#ifndef DMN_VOCAB_HPP
#define DMN_VOCAB_HPP

#include <string>
#include <unordered_map>
#include <vector>

namespace dmn {

/// Token-string -> id map. Id 0 is reserved (padding, never produced),
/// id 1 is the unknown token; real tokens start at 2.
class Vocabulary {
public:
  static constexpr int padding_id = 0;
  static constexpr int unknown_id = 1;

  /// Id for a token, unknown_id if absent.
  int lookup(const std::string& token) const;
  /// Inserts the token if new; returns its id either way.
  int add(const std::string& token);
  bool contains(const std::string& token) const;

  /// Total id space (reserved ids included); every id < size().
  int size() const { return static_cast<int>(tokens_.size()) + 2; }

  /// Tokens in id order, starting at id 2.
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Vocabulary over all tokens of the given texts, ids assigned in first
  /// occurrence order.
  static Vocabulary build(const std::vector<std::string>& texts);

private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> tokens_;
};

struct TokenSequence {
  std::vector<int> ids;
  int original_length = 0; // token count before truncation
};

/// Lowercases and splits into word and single-character punctuation tokens.
std::vector<std::string> split_tokens(const std::string& text);

/// split_tokens + vocabulary lookup + tail truncation to max_len.
/// Rejects text that yields no tokens.
TokenSequence tokenize(const std::string& text, const Vocabulary& vocab, int max_len);

} // namespace dmn

#endif
