#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "saattack/core.hpp"

namespace saattack {

/// Token -> synonyms. Self-synonyms are dropped; a headword left with no
/// synonyms is rejected.
///
/// File format: "headword: syn1, syn2" per line, '#' starts a comment.
/// Repeated headwords merge their lists.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::map<std::string, std::vector<std::string>> entries);

  static Lexicon parse(const std::string& text);
  static Lexicon load(const std::filesystem::path& path);

  /// Empty when the token has no entry.
  const std::vector<std::string>& synonyms(const std::string& token) const;
  bool contains(const std::string& token) const { return entries_.contains(token); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

enum class EdaOp { SynonymReplace, RandomInsert, RandomSwap, RandomDelete };

/// Replaces one token that has synonyms with a uniformly drawn synonym;
/// unchanged when no token is replaceable.
TextSample synonym_replace(const TextSample& t, const Lexicon& lex, RandomStream& rng);

/// Inserts a synonym of a random replaceable token at a random position.
/// Without replaceable tokens a copy of a random token is inserted, so the
/// length always grows by one.
TextSample random_insert(const TextSample& t, const Lexicon& lex, RandomStream& rng);

/// Swaps two distinct positions; identity for single-word texts.
TextSample random_swap(const TextSample& t, RandomStream& rng);

/// Drops one random token unless the text has a single word.
TextSample random_delete(const TextSample& t, RandomStream& rng);

TextSample apply_eda(const TextSample& t, EdaOp op, const Lexicon& lex, RandomStream& rng);

/// n variants, each produced by one EDA operation drawn uniformly.
std::vector<TextSample> eda_augment(const TextSample& t, int n, const Lexicon& lex,
                                    RandomStream& rng);

}  // namespace saattack
