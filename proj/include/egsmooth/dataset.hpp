#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "egsmooth/error.hpp"
#include "egsmooth/metrics.hpp"
#include "egsmooth/parallel.hpp"
#include "egsmooth/predicate.hpp"
#include "egsmooth/smoother.hpp"

namespace egsmooth {

/// "Given the premise, is the hypothesis true?"
struct EntailmentExample {
  Predicate premise;
  Predicate hypothesis;
  bool label = false;
};

struct Dataset {
  std::vector<EntailmentExample> examples;

  std::size_t size() const noexcept { return examples.size(); }
  double positive_rate() const {
    if (examples.empty()) return 0.0;
    std::size_t pos = 0;
    for (const auto& e : examples) pos += e.label ? 1 : 0;
    return static_cast<double>(pos) / static_cast<double>(examples.size());
  }
};

/// Four tab-separated columns: premise, hypothesis, type pair (left#right),
/// label (True|False). Blank lines are skipped; duplicates are kept.
inline Dataset parse_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 4) throw ParseError("expected 4 tab-separated columns, got " + std::to_string(cols.size()), lineno);
    try {
      EntailmentExample ex{Predicate::parse(cols[0]), Predicate::parse(cols[1]), false};
      const auto pair = TypeSignature::parse(cols[2]);
      auto [l, r] = detail::base_types(pair.left.str(), pair.right.str());
      const TypeSignature sig{TypeName(l), TypeName(r)};
      if (ex.premise.signature() != sig || ex.hypothesis.signature() != sig)
        throw ParseError("premise/hypothesis types do not match type pair " + std::string(cols[2]));
      if (cols[3] == "True" || cols[3] == "true") {
        ex.label = true;
      } else if (cols[3] == "False" || cols[3] == "false") {
        ex.label = false;
      } else {
        throw ParseError("label must be True or False, got '" + std::string(cols[3]) + "'");
      }
      ds.examples.push_back(std::move(ex));
    } catch (const DataError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (ds.examples.empty()) throw DataError("dataset is empty");
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path);
  try {
    return parse_dataset(in);
  } catch (const DataError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

struct ScoredExample {
  const EntailmentExample* example = nullptr;
  EntailmentVerdict verdict;
};

/// One verdict per example, in input order. Runs across `threads` workers.
inline std::vector<ScoredExample> score_dataset(const Dataset& ds, const SmoothingResources& res,
                                                const SmoothingConfig& config, std::size_t threads = 0) {
  config.validate();
  std::vector<ScoredExample> out(ds.size());
  parallel_for(
      ds.size(),
      [&](std::size_t i) {
        const auto& ex = ds.examples[i];
        out[i] = {&ex, score_query(ex.premise, ex.hypothesis, res, config)};
      },
      threads);
  return out;
}

inline std::vector<ScoredLabel> to_scored_labels(const std::vector<ScoredExample>& scored) {
  std::vector<ScoredLabel> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back({s.verdict.score, s.example->label});
  return out;
}

}  // namespace egsmooth
