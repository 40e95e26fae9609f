#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "egsmooth/error.hpp"

namespace egsmooth {

/// Argument type of a predicate slot, e.g. "person". Case-sensitive.
class TypeName {
 public:
  TypeName() = default;
  explicit TypeName(std::string name) : name_(std::move(name)) {
    if (name_.empty()) throw ParseError("empty type name");
    if (std::any_of(name_.begin(), name_.end(), [](unsigned char c) { return std::isspace(c) || c == '#'; }))
      throw ParseError("type name contains whitespace or '#': '" + name_ + "'");
  }

  const std::string& str() const noexcept { return name_; }

  friend auto operator<=>(const TypeName&, const TypeName&) = default;
  friend bool operator==(const TypeName&, const TypeName&) = default;

 private:
  std::string name_;
};

/// Ordered pair of argument types keying a typed subgraph.
struct TypeSignature {
  TypeName left;
  TypeName right;

  bool homogeneous() const noexcept { return left == right; }
  std::string str() const { return left.str() + "#" + right.str(); }

  /// Parses "left#right".
  static TypeSignature parse(std::string_view text) {
    auto hash = text.find('#');
    if (hash == std::string_view::npos || text.find('#', hash + 1) != std::string_view::npos)
      throw ParseError("type pair must have the form left#right: '" + std::string(text) + "'");
    return {TypeName(std::string(text.substr(0, hash))), TypeName(std::string(text.substr(hash + 1)))};
  }

  friend auto operator<=>(const TypeSignature&, const TypeSignature&) = default;
  friend bool operator==(const TypeSignature&, const TypeSignature&) = default;
};

/// One argument half of a relation such as "give.to.2": the words leading to
/// the argument and the argument position (1 = subject, 2 = object).
struct RelationSlot {
  std::vector<std::string> words;
  int index = 1;

  std::string str() const {
    std::string out;
    for (const auto& w : words) {
      out += w;
      out += '.';
    }
    out += std::to_string(index);
    return out;
  }

  friend bool operator==(const RelationSlot&, const RelationSlot&) = default;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline RelationSlot parse_slot(std::string_view half, std::string_view whole) {
  auto parts = split(half, '.');
  if (parts.size() < 2)
    throw ParseError("relation slot '" + std::string(half) + "' needs words and a slot index in '" +
                     std::string(whole) + "'");
  RelationSlot slot;
  const auto idx = parts.back();
  if (idx == "1") {
    slot.index = 1;
  } else if (idx == "2") {
    slot.index = 2;
  } else {
    throw ParseError("slot index must be 1 or 2, got '" + std::string(idx) + "' in '" + std::string(whole) + "'");
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const auto w = parts[i];
    if (w.empty()) throw ParseError("empty word in relation '" + std::string(whole) + "'");
    for (unsigned char c : w) {
      if (std::isspace(c) || c == '(' || c == ')' || c == ',' || c == '#')
        throw ParseError("invalid character in relation word '" + std::string(w) + "'");
    }
    slot.words.emplace_back(w);
  }
  return slot;
}

/// Removes a "_1"/"_2" disambiguation suffix when both tokens share the base.
inline std::pair<std::string, std::string> base_types(const std::string& left, const std::string& right) {
  auto has_suffix = [](const std::string& s) {
    return s.size() > 2 && s[s.size() - 2] == '_' && (s.back() == '1' || s.back() == '2');
  };
  if (has_suffix(left) && has_suffix(right) && left.back() != right.back()) {
    auto l = left.substr(0, left.size() - 2);
    auto r = right.substr(0, right.size() - 2);
    if (l == r) return {l, r};
  }
  return {left, right};
}

}  // namespace detail

/// A typed binary predicate, the vertex symbol of an entailment graph, e.g.
/// "(join.1,join.2)#person#organization". Identity is the full relation string.
class Predicate {
 public:
  Predicate() = default;

  static Predicate parse(std::string_view text) {
    const auto parts = detail::split(text, '#');
    if (parts.size() != 3)
      throw ParseError("predicate must have the form (w.i,w.j)#type#type: '" + std::string(text) + "'");
    const auto rel = parts[0];
    if (rel.size() < 2 || rel.front() != '(' || rel.back() != ')')
      throw ParseError("relation must be parenthesised: '" + std::string(text) + "'");
    const auto inner = rel.substr(1, rel.size() - 2);
    const auto halves = detail::split(inner, ',');
    if (halves.size() != 2) throw ParseError("relation must have exactly two slots: '" + std::string(text) + "'");

    Predicate p;
    p.text_ = std::string(text);
    p.left_ = detail::parse_slot(halves[0], text);
    p.right_ = detail::parse_slot(halves[1], text);
    p.left_token_ = std::string(parts[1]);
    p.right_token_ = std::string(parts[2]);
    auto [l, r] = detail::base_types(p.left_token_, p.right_token_);
    p.signature_ = {TypeName(std::move(l)), TypeName(std::move(r))};
    return p;
  }

  const std::string& str() const noexcept { return text_; }
  const TypeSignature& signature() const noexcept { return signature_; }
  const RelationSlot& left_slot() const noexcept { return left_; }
  const RelationSlot& right_slot() const noexcept { return right_; }

  /// Raw type tokens from the suffix, including any _1/_2 marker.
  const std::string& left_type_token() const noexcept { return left_token_; }
  const std::string& right_type_token() const noexcept { return right_token_; }

  /// First word of the relation ("receive" in "(receive.2,receive.from.2)").
  const std::string& head_word() const noexcept { return left_.words.front(); }

  /// The same relation with argument order reversed: slots and type tokens swap.
  Predicate swapped() const {
    return parse("(" + right_.str() + "," + left_.str() + ")#" + right_token_ + "#" + left_token_);
  }

  friend bool operator==(const Predicate& a, const Predicate& b) noexcept { return a.text_ == b.text_; }
  friend std::strong_ordering operator<=>(const Predicate& a, const Predicate& b) noexcept {
    return a.text_.compare(b.text_) <=> 0;
  }

 private:
  std::string text_;
  RelationSlot left_;
  RelationSlot right_;
  std::string left_token_;
  std::string right_token_;
  TypeSignature signature_;
};

}  // namespace egsmooth

template <>
struct std::hash<egsmooth::Predicate> {
  std::size_t operator()(const egsmooth::Predicate& p) const noexcept { return std::hash<std::string>{}(p.str()); }
};

template <>
struct std::hash<egsmooth::TypeSignature> {
  std::size_t operator()(const egsmooth::TypeSignature& s) const noexcept {
    return std::hash<std::string>{}(s.left.str()) * 31u ^ std::hash<std::string>{}(s.right.str());
  }
};
