#include "saattack/text_augment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace saattack {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool has_space(const std::string& s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::size_t> replaceable_positions(const TextSample& t, const Lexicon& lex) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!lex.synonyms(t[i]).empty()) pos.push_back(i);
  }
  return pos;
}

}  // namespace

Lexicon::Lexicon(std::map<std::string, std::vector<std::string>> entries) {
  for (auto& [head, syns] : entries) {
    if (head.empty() || has_space(head)) throw ConfigError("invalid lexicon headword '" + head + "'");
    std::vector<std::string> kept;
    for (auto& s : syns) {
      if (s.empty() || has_space(s)) {
        throw ConfigError("invalid synonym '" + s + "' for '" + head + "'");
      }
      if (s != head && std::find(kept.begin(), kept.end(), s) == kept.end()) kept.push_back(s);
    }
    if (kept.empty()) {
      throw ConfigError("lexicon entry '" + head + "' has no synonym other than itself");
    }
    entries_.emplace(head, std::move(kept));
  }
}

Lexicon Lexicon::parse(const std::string& text) {
  std::map<std::string, std::vector<std::string>> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("lexicon line " + std::to_string(lineno) + ": missing ':'");
    }
    const std::string head = trim(line.substr(0, colon));
    if (head.empty()) {
      throw ConfigError("lexicon line " + std::to_string(lineno) + ": empty headword");
    }
    auto& syns = entries[head];
    std::istringstream rest(line.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      item = trim(item);
      if (!item.empty()) syns.push_back(item);
    }
  }
  try {
    return Lexicon(std::move(entries));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("lexicon: ") + e.what());
  }
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read lexicon file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::vector<std::string>& Lexicon::synonyms(const std::string& token) const {
  static const std::vector<std::string> kEmpty;
  auto it = entries_.find(token);
  return it == entries_.end() ? kEmpty : it->second;
}

// ---------------------------------------------------------------------------

TextSample synonym_replace(const TextSample& t, const Lexicon& lex, RandomStream& rng) {
  const auto pos = replaceable_positions(t, lex);
  if (pos.empty()) return t;
  const std::size_t i = pos[rng.uniform_index(pos.size())];
  const auto& syns = lex.synonyms(t[i]);
  return t.with_word(i, syns[rng.uniform_index(syns.size())]);
}

TextSample random_insert(const TextSample& t, const Lexicon& lex, RandomStream& rng) {
  const auto pos = replaceable_positions(t, lex);
  std::string token;
  if (pos.empty()) {
    token = t[rng.uniform_index(t.size())];
  } else {
    const auto& syns = lex.synonyms(t[pos[rng.uniform_index(pos.size())]]);
    token = syns[rng.uniform_index(syns.size())];
  }
  auto words = t.words();
  const std::size_t at = rng.uniform_index(words.size() + 1);
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), std::move(token));
  return TextSample(std::move(words));
}

TextSample random_swap(const TextSample& t, RandomStream& rng) {
  if (t.size() < 2) return t;
  const std::size_t i = rng.uniform_index(t.size());
  std::size_t j = rng.uniform_index(t.size() - 1);
  if (j >= i) ++j;
  auto words = t.words();
  std::swap(words[i], words[j]);
  return TextSample(std::move(words));
}

TextSample random_delete(const TextSample& t, RandomStream& rng) {
  if (t.size() < 2) return t;
  auto words = t.words();
  words.erase(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size())));
  return TextSample(std::move(words));
}

TextSample apply_eda(const TextSample& t, EdaOp op, const Lexicon& lex, RandomStream& rng) {
  switch (op) {
    case EdaOp::SynonymReplace: return synonym_replace(t, lex, rng);
    case EdaOp::RandomInsert: return random_insert(t, lex, rng);
    case EdaOp::RandomSwap: return random_swap(t, rng);
    case EdaOp::RandomDelete: return random_delete(t, rng);
  }
  throw Error("unknown EDA operation");
}

std::vector<TextSample> eda_augment(const TextSample& t, int n, const Lexicon& lex,
                                    RandomStream& rng) {
  if (n < 0) throw ConfigError("eda_augment count must be >= 0");
  std::vector<TextSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto op = static_cast<EdaOp>(rng.uniform_index(4));
    out.push_back(apply_eda(t, op, lex, rng));
  }
  return out;
}

}  // namespace saattack
