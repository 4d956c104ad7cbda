#include "dmn/vocab.hpp"

#include <cctype>
#include <stdexcept>

namespace dmn {

int Vocabulary::lookup(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? unknown_id : it->second;
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = size();
  ids_.emplace(token, id);
  tokens_.push_back(token);
  return id;
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.find(token) != ids_.end();
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts) {
  Vocabulary v;
  for (const std::string& text : texts)
    for (const std::string& tok : split_tokens(text))
      v.add(tok);
  return v;
}

namespace {

bool is_word_char(unsigned char c) {
  // bytes >= 0x80 (multi-byte sequences) stick to the surrounding word
  return std::isalnum(c) || c >= 0x80;
}

} // namespace

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  for (unsigned char c : text) {
    if (is_word_char(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      if (!word.empty()) {
        out.push_back(word);
        word.clear();
      }
      if (!std::isspace(c)) out.emplace_back(1, static_cast<char>(c)); // punctuation token
    }
  }
  if (!word.empty()) out.push_back(word);
  return out;
}

TokenSequence tokenize(const std::string& text, const Vocabulary& vocab, int max_len) {
  if (max_len < 1)
    throw std::invalid_argument("tokenize: max_len must be >= 1");
  const std::vector<std::string> toks = split_tokens(text);
  if (toks.empty())
    throw std::invalid_argument("tokenize: empty token stream");
  TokenSequence seq;
  seq.original_length = static_cast<int>(toks.size());
  const std::size_t keep = std::min<std::size_t>(toks.size(), static_cast<std::size_t>(max_len));
  seq.ids.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) seq.ids.push_back(vocab.lookup(toks[i]));
  return seq;
}

} // namespace dmn
