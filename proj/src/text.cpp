#include "sgim/text/text.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "sgim/errors.h"
#include "sgim/seed.h"

namespace sgim::text {

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary::Vocabulary() { add(std::string(kUnknownToken)); }

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) : Vocabulary() {
  for (const auto& t : tokens) add(t);
}

std::size_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<std::size_t> Vocabulary::encode(const TokenSequence& sequence) const {
  std::vector<std::size_t> ids;
  ids.reserve(sequence.size());
  for (const auto& t : sequence) ids.push_back(id(t));
  return ids;
}

void SynonymTable::add(const std::string& word, std::vector<std::string> synonyms) {
  if (synonyms.empty()) throw ContractError("synonym list for '" + word + "' is empty");
  if (std::find(synonyms.begin(), synonyms.end(), word) != synonyms.end()) {
    throw ContractError("'" + word + "' is listed as its own synonym");
  }
  entries_[word] = std::move(synonyms);
}

const std::vector<std::string>* SynonymTable::find(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

SynonymTable SynonymTable::parse(std::string_view text) {
  SynonymTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    const std::string where = "synonym table line " + std::to_string(line_no);
    if (colon == std::string::npos) throw FormatError(where + ": missing ':'");
    const auto head = tokenize(line.substr(0, colon));
    if (head.size() != 1) throw FormatError(where + ": expected exactly one headword");
    std::vector<std::string> synonyms;
    std::istringstream list(line.substr(colon + 1));
    std::string item;
    while (std::getline(list, item, ',')) {
      auto words = tokenize(item);
      if (words.size() == 1) {
        synonyms.push_back(words[0]);
      } else if (!words.empty()) {
        throw FormatError(where + ": synonym '" + item + "' is not a single word");
      }
    }
    try {
      table.add(head[0], std::move(synonyms));
    } catch (const ContractError& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synonym table '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string SynonymTable::serialize() const {
  std::string out;
  for (const auto& [word, synonyms] : entries_) {
    out += word + ":";
    for (std::size_t i = 0; i < synonyms.size(); ++i) out += (i ? ", " : " ") + synonyms[i];
    out += "\n";
  }
  return out;
}

TokenSequence augment_synonym(const TokenSequence& tokens, const SynonymTable& table,
                              std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (table.find(tokens[i]) != nullptr) candidates.push_back(i);
  }
  if (candidates.empty()) return tokens;
  std::mt19937_64 rng(seed);
  const auto& choice =
      candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  const auto& synonyms = *table.find(tokens[choice]);
  const auto& synonym =
      synonyms[std::uniform_int_distribution<std::size_t>(0, synonyms.size() - 1)(rng)];
  const auto pos = std::uniform_int_distribution<std::size_t>(0, tokens.size())(rng);
  TokenSequence out = tokens;
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), synonym);
  return out;
}

TokenSequence augment_permute(const TokenSequence& tokens, std::uint64_t seed) {
  TokenSequence out = tokens;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit distribution per position.
  for (std::size_t i = out.size(); i > 1; --i) {
    const auto j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(out[i - 1], out[j]);
  }
  return out;
}

TokenSequence augment_insert(const TokenSequence& tokens, const Vocabulary& vocab,
                             std::uint64_t seed) {
  if (vocab.size() <= 1) throw ContractError("augment_insert: vocabulary has no words");
  std::mt19937_64 rng(seed);
  const auto word = std::uniform_int_distribution<std::size_t>(1, vocab.size() - 1)(rng);
  const auto pos = std::uniform_int_distribution<std::size_t>(0, tokens.size())(rng);
  TokenSequence out = tokens;
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), vocab.token(word));
  return out;
}

TokenSequence augment_text(const TokenSequence& tokens, const SynonymTable& table,
                           const Vocabulary& vocab, double probability, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution apply(probability);
  TokenSequence out = tokens;
  if (apply(rng)) out = augment_synonym(out, table, derive_seed(seed, 1));
  if (apply(rng)) out = augment_permute(out, derive_seed(seed, 2));
  if (apply(rng)) out = augment_insert(out, vocab, derive_seed(seed, 3));
  return out;
}

}  // namespace sgim::text
