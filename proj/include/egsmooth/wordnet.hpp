#pragma once

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "egsmooth/error.hpp"
#include "egsmooth/lexical.hpp"

namespace egsmooth::wordnet {

// Reader for the Princeton WordNet database files (index.<pos>, data.<pos>),
// producing a LexicalDB restricted to one part of speech.

struct Synset {
  std::vector<std::string> words;
  std::vector<std::string> hypernyms;  // target synset offsets, in pointer order
  std::vector<std::string> hyponyms;
};

namespace detail {

inline bool is_license_line(const std::string& line) { return line.empty() || line.front() == ' '; }

inline std::string strip_marker(std::string word) {
  // Adjective syntactic markers such as "(a)" or "(ip)".
  if (auto paren = word.find('('); paren != std::string::npos) word.erase(paren);
  std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
  return word;
}

}  // namespace detail

/// Parses data.<pos>: "offset lex_filenum ss_type w_cnt word lex_id ... p_cnt
/// [ptr_symbol offset pos source/target]... | gloss".
inline std::unordered_map<std::string, Synset> parse_data(std::istream& in) {
  std::unordered_map<std::string, Synset> synsets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_license_line(line)) continue;
    if (auto bar = line.find(" | "); bar != std::string::npos) line.erase(bar);
    std::istringstream ss(line);
    std::string offset, lex_filenum, ss_type, w_cnt_hex;
    if (!(ss >> offset >> lex_filenum >> ss_type >> w_cnt_hex)) throw ParseError("bad synset header", lineno);
    Synset syn;
    std::size_t w_cnt = 0;
    try {
      w_cnt = std::stoul(w_cnt_hex, nullptr, 16);
    } catch (const std::exception&) {
      throw ParseError("bad word count '" + w_cnt_hex + "'", lineno);
    }
    for (std::size_t i = 0; i < w_cnt; ++i) {
      std::string word, lex_id;
      if (!(ss >> word >> lex_id)) throw ParseError("truncated word list", lineno);
      syn.words.push_back(detail::strip_marker(word));
    }
    std::size_t p_cnt = 0;
    if (!(ss >> p_cnt)) throw ParseError("missing pointer count", lineno);
    for (std::size_t i = 0; i < p_cnt; ++i) {
      std::string symbol, target, pos, source_target;
      if (!(ss >> symbol >> target >> pos >> source_target)) throw ParseError("truncated pointer list", lineno);
      if (symbol == "@" || symbol == "@i") syn.hypernyms.push_back(target);
      if (symbol == "~" || symbol == "~i") syn.hyponyms.push_back(target);
    }
    synsets.emplace(offset, std::move(syn));
  }
  return synsets;
}

/// Parses index.<pos>: "lemma pos synset_cnt p_cnt [ptr_symbol]... sense_cnt
/// tagsense_cnt synset_offset...". Returns lemma -> synset offsets in sense order.
inline std::vector<std::pair<std::string, std::vector<std::string>>> parse_index(std::istream& in) {
  std::vector<std::pair<std::string, std::vector<std::string>>> lemmas;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_license_line(line)) continue;
    std::istringstream ss(line);
    std::string lemma, pos;
    std::size_t synset_cnt = 0, p_cnt = 0;
    if (!(ss >> lemma >> pos >> synset_cnt >> p_cnt)) throw ParseError("bad index line", lineno);
    std::string skip;
    for (std::size_t i = 0; i < p_cnt; ++i) ss >> skip;
    std::size_t sense_cnt = 0, tagsense_cnt = 0;
    if (!(ss >> sense_cnt >> tagsense_cnt)) throw ParseError("bad sense counts", lineno);
    std::vector<std::string> offsets;
    for (std::size_t i = 0; i < synset_cnt; ++i) {
      std::string off;
      if (!(ss >> off)) throw ParseError("truncated synset offsets", lineno);
      offsets.push_back(off);
    }
    lemmas.emplace_back(lemma, std::move(offsets));
  }
  return lemmas;
}

/// Joins index and data files into a LexicalDB. For each lemma and each of its
/// senses, the sense's hypernym (hyponym) list is the words of all target
/// synsets, in pointer order, without duplicates.
inline LexicalDB import(std::istream& index, std::istream& data) {
  const auto synsets = parse_data(data);
  LexicalDB db;
  auto related = [&](const std::vector<std::string>& targets) {
    std::vector<std::string> words;
    for (const auto& t : targets) {
      auto it = synsets.find(t);
      if (it == synsets.end()) continue;
      for (const auto& w : it->second.words)
        if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
    }
    return words;
  };
  for (const auto& [lemma, offsets] : parse_index(index)) {
    LexicalEntry entry;
    for (const auto& off : offsets) {
      auto it = synsets.find(off);
      if (it == synsets.end()) throw ParseError("index refers to unknown synset " + off + " for " + lemma);
      entry.hypernyms.push_back(related(it->second.hypernyms));
      entry.hyponyms.push_back(related(it->second.hyponyms));
    }
    db.add(lemma, std::move(entry));
  }
  return db;
}

}  // namespace egsmooth::wordnet
