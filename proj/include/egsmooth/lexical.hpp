#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "egsmooth/error.hpp"
#include "egsmooth/predicate.hpp"

namespace egsmooth {

enum class LexicalRelation { hypernym, hyponym };

inline std::string_view to_string(LexicalRelation r) { return r == LexicalRelation::hypernym ? "hypernym" : "hyponym"; }

/// Word senses from a lexical taxonomy. Each entry lists, per sense in sense
/// order, the words related to that sense.
struct LexicalEntry {
  std::vector<std::vector<std::string>> hypernyms;
  std::vector<std::vector<std::string>> hyponyms;

  const std::vector<std::vector<std::string>>& senses(LexicalRelation r) const {
    return r == LexicalRelation::hypernym ? hypernyms : hyponyms;
  }
};

class LexicalDB {
 public:
  void add(std::string word, LexicalEntry entry) {
    if (word.empty()) throw DataError("empty word in lexical database");
    if (!entries_.emplace(std::move(word), std::move(entry)).second) throw DataError("duplicate lexical entry");
  }

  const LexicalEntry* find(std::string_view word) const {
    auto it = entries_.find(std::string(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, LexicalEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::string, LexicalEntry> entries_;
};

/// JSON lines: {"word": w, "hypernyms": [[sense1 words], ...], "hyponyms": [[...], ...]}
inline LexicalDB parse_lexdb(std::istream& in) {
  LexicalDB db;
  std::string line;
  std::size_t lineno = 0;
  auto senses = [](const nlohmann::json& j, const char* key) {
    std::vector<std::vector<std::string>> out;
    if (!j.contains(key)) return out;
    for (const auto& sense : j.at(key)) out.push_back(sense.get<std::vector<std::string>>());
    return out;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      db.add(rec.at("word").get<std::string>(), {senses(rec, "hypernyms"), senses(rec, "hyponyms")});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const DataError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return db;
}

inline LexicalDB load_lexdb(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexical database " + path);
  try {
    return parse_lexdb(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_lexdb(const LexicalDB& db, std::ostream& out) {
  for (const auto& [word, entry] : db.entries()) {
    nlohmann::json rec;
    rec["word"] = word;
    rec["hypernyms"] = entry.hypernyms;
    rec["hyponyms"] = entry.hyponyms;
    out << rec.dump() << '\n';
  }
}

/// Substitutes the first-sense relatives of the predicate's head word into the
/// relation, keeping slot indices, particles and types:
/// hyponym("receive") = inherit turns (receive.2,receive.from.2) into
/// (inherit.2,inherit.from.2). Multiword relatives are skipped.
inline std::vector<Predicate> lexical_replacements(const Predicate& p, LexicalRelation relation,
                                                   const LexicalDB& lexdb) {
  std::vector<Predicate> out;
  const auto& head = p.head_word();
  const auto* entry = lexdb.find(head);
  if (entry == nullptr) return out;
  const auto& senses = entry->senses(relation);
  if (senses.empty()) return out;

  auto rewrite = [&](const RelationSlot& slot, const std::string& word) {
    RelationSlot s = slot;
    for (auto& w : s.words)
      if (w == head) w = word;
    return s.str();
  };
  for (const auto& word : senses.front()) {
    if (word.empty() || word == head || word.find_first_of(" _.,()#") != std::string::npos) continue;
    auto candidate = Predicate::parse("(" + rewrite(p.left_slot(), word) + "," + rewrite(p.right_slot(), word) +
                                      ")#" + p.left_type_token() + "#" + p.right_type_token());
    if (std::find(out.begin(), out.end(), candidate) == out.end()) out.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace egsmooth
