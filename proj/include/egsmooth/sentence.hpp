#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "egsmooth/predicate.hpp"

namespace egsmooth {

/// A predicate rendered as a short sentence with its types as generic
/// arguments, e.g. "give medicine to person".
struct PredicateSentence {
  std::vector<std::string> tokens;
  /// Indices into `tokens` of the predicate words (type arguments excluded).
  std::vector<std::size_t> predicate_token_spans;

  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out += ' ';
      out += tokens[i];
    }
    return out;
  }
};

/// Renders a predicate as "subject verb object particle object".
///
/// The head word is the first word of the left slot. A slot at position 1
/// becomes the subject, placed before the head. A position-2 slot without
/// particles is the direct object and follows the head. Remaining particle
/// words of each slot follow in left-then-right order, each group followed by
/// its argument when that slot is at position 2. When both slots share one
/// type, the arguments carry _1/_2 suffixes.
inline PredicateSentence render_sentence(const Predicate& p) {
  const RelationSlot* slots[2] = {&p.left_slot(), &p.right_slot()};
  std::string types[2] = {p.left_type_token(), p.right_type_token()};
  if (p.signature().homogeneous() && types[0] == types[1]) {
    types[0] += "_1";
    types[1] += "_2";
  }
  const std::string& head = p.head_word();

  auto particles = [&](const RelationSlot& s) {
    std::vector<std::string> out(s.words.begin(), s.words.end());
    if (!out.empty() && out.front() == head) out.erase(out.begin());
    return out;
  };

  PredicateSentence sent;
  auto push_type = [&](int i) { sent.tokens.push_back(types[i]); };
  auto push_word = [&](const std::string& w) {
    sent.predicate_token_spans.push_back(sent.tokens.size());
    sent.tokens.push_back(w);
  };

  for (int i = 0; i < 2; ++i)
    if (slots[i]->index == 1) push_type(i);
  push_word(head);
  for (int i = 0; i < 2; ++i)
    if (slots[i]->index == 2 && particles(*slots[i]).empty()) push_type(i);
  for (int i = 0; i < 2; ++i) {
    const auto parts = particles(*slots[i]);
    if (parts.empty()) continue;
    for (const auto& w : parts) push_word(w);
    if (slots[i]->index == 2) push_type(i);
  }
  return sent;
}

/// The predicate words alone ("export to"), used in explanations.
inline std::string predicate_phrase(const Predicate& p) {
  const auto sent = render_sentence(p);
  std::string out;
  for (auto idx : sent.predicate_token_spans) {
    if (!out.empty()) out += ' ';
    out += sent.tokens[idx];
  }
  return out;
}

}  // namespace egsmooth
