#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sgim::text {

using TokenSequence = std::vector<std::string>;

// Lowercases and splits on every run of non-alphanumeric characters.
TokenSequence tokenize(std::string_view text);

// Ordered unique tokens. Index 0 is reserved for out-of-vocabulary words.
class Vocabulary {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocabulary();
  // Tokens are appended in order; duplicates are ignored.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  std::size_t add(const std::string& token);
  std::size_t size() const { return tokens_.size(); }
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<std::size_t> encode(const TokenSequence& sequence) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

class SynonymTable {
 public:
  // Throws ContractError if the list is empty or contains the word itself.
  void add(const std::string& word, std::vector<std::string> synonyms);
  const std::vector<std::string>* find(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

  // One `word: syn1, syn2, ...` entry per line; blank lines and `#` comments
  // are skipped. Throws FormatError with the offending line number.
  static SynonymTable parse(std::string_view text);
  static SynonymTable load(const std::filesystem::path& path);
  std::string serialize() const;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

// Picks a token that has synonyms and inserts one of its synonyms at a
// random position. Sequences without such a token are returned unchanged.
TokenSequence augment_synonym(const TokenSequence& tokens, const SynonymTable& table,
                              std::uint64_t seed);

// Seeded uniform shuffle.
TokenSequence augment_permute(const TokenSequence& tokens, std::uint64_t seed);

// Inserts one uniformly drawn vocabulary word (never the OOV marker) at a
// uniform position. Throws ContractError when the vocabulary has no words.
TokenSequence augment_insert(const TokenSequence& tokens, const Vocabulary& vocab,
                             std::uint64_t seed);

// Training-time policy: synonym, permutation and insertion are each applied
// independently with the given probability, in that order.
TokenSequence augment_text(const TokenSequence& tokens, const SynonymTable& table,
                           const Vocabulary& vocab, double probability, std::uint64_t seed);

}  // namespace sgim::text
