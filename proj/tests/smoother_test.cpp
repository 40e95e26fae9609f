#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "egsmooth/smoother.hpp"
#include "test_support.hpp"

namespace egsmooth {
namespace {

using testing::ChainFixture;
using testing::config;

std::vector<Predicate> preds(const std::vector<Candidate>& cs) {
  std::vector<Predicate> out;
  for (const auto& c : cs) out.push_back(c.predicate);
  return out;
}

TEST(SmoothPremiseTest, MissingPremiseGetsNearestNeighbours) {
  ChainFixture fx;
  const auto cs = smooth_premise(testing::kObliterate, fx.resources(), config(SmoothingMode::knn, SmoothingMode::off, 2));
  EXPECT_EQ(preds(cs), (std::vector<Predicate>{testing::kBeat, testing::kDefeat}));
  for (const auto& c : cs) EXPECT_EQ(c.provenance.kind, Provenance::Kind::knn);
  EXPECT_NEAR(cs[0].provenance.distance, std::hypot(0.1, 0.2), 1e-6);
}

TEST(SmoothPremiseTest, PresentPremiseIsKeptAlone) {
  ChainFixture fx;
  const auto cs = smooth_premise(testing::kBeat, fx.resources(), config(SmoothingMode::knn, SmoothingMode::off));
  EXPECT_EQ(preds(cs), std::vector<Predicate>{testing::kBeat});
  EXPECT_EQ(cs[0].provenance.kind, Provenance::Kind::direct);
}

TEST(SmoothPremiseTest, AlwaysTriggerAddsNeighboursOfPresentPremise) {
  ChainFixture fx;
  auto c = config(SmoothingMode::knn, SmoothingMode::off, 2);
  c.trigger = Trigger::always;
  const auto cs = smooth_premise(testing::kBeat, fx.resources(), c);
  // beat itself is its own nearest neighbour and is not duplicated.
  EXPECT_EQ(preds(cs), (std::vector<Predicate>{testing::kBeat, testing::kDefeat}));
}

TEST(SmoothPremiseTest, UnembeddedPremiseHasNoCandidates) {
  ChainFixture fx;
  EXPECT_TRUE(smooth_premise(testing::kMock, fx.resources(), config(SmoothingMode::knn, SmoothingMode::off)).empty());
}

TEST(SmoothPremiseTest, MissingIndexIsAnError) {
  ChainFixture fx;
  IndexSet none;
  auto res = fx.resources();
  res.indexes = &none;
  EXPECT_THROW(smooth_premise(testing::kObliterate, res, config(SmoothingMode::knn, SmoothingMode::off)), DataError);
  // A signature with no subgraph at all simply has nothing to offer.
  const auto other = Predicate::parse("(obliterate.1,obliterate.2)#city#city");
  EXPECT_TRUE(smooth_premise(other, fx.resources(), config(SmoothingMode::knn, SmoothingMode::off)).empty());
}

TEST(SmoothPremiseTest, HypernymSubstitution) {
  ChainFixture fx;
  const auto cs = smooth_premise(testing::kObliterate, fx.resources(),
                                 config(SmoothingMode::lex_hypernym, SmoothingMode::off));
  // destroy is not in the graph; beat is.
  EXPECT_EQ(preds(cs), std::vector<Predicate>{testing::kBeat});
  EXPECT_EQ(cs[0].provenance.kind, Provenance::Kind::lexical);
}

TEST(SmoothHypothesisTest, HyponymSubstitutionFiltersToGraph) {
  ChainFixture fx;
  const auto cs = smooth_hypothesis(testing::kShopFor, fx.resources(),
                                    config(SmoothingMode::off, SmoothingMode::lex_hyponym));
  EXPECT_EQ(preds(cs), std::vector<Predicate>{testing::kPayFor});
}

TEST(ScoreQueryTest, SmoothedPremiseReachesHypothesis) {
  ChainFixture fx;
  const auto v = score_query(testing::kObliterate, testing::kPlay, fx.resources(),
                             config(SmoothingMode::knn, SmoothingMode::off, 2));
  EXPECT_EQ(v.score, 0.9);
  ASSERT_TRUE(v.witness);
  EXPECT_EQ(v.witness->premise.predicate, testing::kBeat);
  EXPECT_EQ(v.witness->hypothesis.predicate, testing::kPlay);
  EXPECT_NE(v.explanation.find("obliterate → beat"), std::string::npos) << v.explanation;
  EXPECT_NE(v.explanation.find("beat ⊨ play 0.9"), std::string::npos) << v.explanation;
}

TEST(ScoreQueryTest, UnsmoothedMissIsZeroWithoutWitness) {
  ChainFixture fx;
  const auto v = score_query(testing::kObliterate, testing::kPlay, fx.resources(),
                             config(SmoothingMode::off, SmoothingMode::off));
  EXPECT_EQ(v.score, 0.0);
  EXPECT_FALSE(v.witness);
  EXPECT_NE(v.explanation.find("no entailment found"), std::string::npos);
}

TEST(ScoreQueryTest, SmoothedHypothesis) {
  ChainFixture fx;
  const auto v = score_query(testing::kBuy, testing::kShopFor, fx.resources(),
                             config(SmoothingMode::off, SmoothingMode::lex_hyponym));
  EXPECT_EQ(v.score, 0.85);
  EXPECT_EQ(v.witness->hypothesis.predicate, testing::kPayFor);
}

TEST(ScoreQueryTest, BothSidesSmoothed) {
  ChainFixture fx;
  const auto v = score_query(testing::kObliterate, testing::kContest, fx.resources(),
                             config(SmoothingMode::knn, SmoothingMode::lex_hyponym));
  EXPECT_EQ(v.score, 0.9);
  EXPECT_EQ(v.witness->premise.predicate, testing::kBeat);
  EXPECT_EQ(v.witness->hypothesis.predicate, testing::kPlay);
}

TEST(ScoreQueryTest, SignatureMismatch) {
  ChainFixture fx;
  EXPECT_THROW(score_query(testing::kBeat, testing::kBuy, fx.resources(), config(SmoothingMode::off, SmoothingMode::off)),
               SignatureMismatch);
}

TEST(ScoreQueryTest, DistanceDecayOnlyTouchesSmoothedCandidates) {
  ChainFixture fx;
  auto c = config(SmoothingMode::knn, SmoothingMode::off, 2);
  c.distance_decay = 1.0;
  EXPECT_EQ(score_query(testing::kBeat, testing::kPlay, fx.resources(), c).score, 0.9);
  EXPECT_NEAR(score_query(testing::kObliterate, testing::kPlay, fx.resources(), c).score,
              0.9 * std::exp(-std::hypot(0.1f, 0.2f)), 1e-6);
}

TEST(SmoothingModeTest, ParseNames) {
  EXPECT_EQ(parse_smoothing_mode("knn"), SmoothingMode::knn);
  EXPECT_EQ(parse_smoothing_mode("hyponym"), SmoothingMode::lex_hyponym);
  EXPECT_EQ(parse_smoothing_mode("lex_hypernym"), SmoothingMode::lex_hypernym);
  EXPECT_THROW(parse_smoothing_mode("nearest"), std::invalid_argument);
  EXPECT_EQ(parse_trigger("on-miss"), Trigger::on_miss);
  EXPECT_THROW(parse_trigger("sometimes"), std::invalid_argument);
}

// Random world: one subgraph, a vocabulary partly in the graph, vectors for
// all of it, random edges.
struct World {
  EntailmentGraph graph;
  EmbeddingStore store{3};
  IndexSet indexes;
  std::vector<Predicate> in_graph, outside;
  std::vector<std::vector<float>> vec_in;

  SmoothingResources resources() const { return {&graph, &indexes, &store, nullptr}; }
};

World random_world(std::mt19937_64& rng) {
  World w;
  std::normal_distribution<float> g(0.f, 1.f);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 5 + rng() % 25;
  GraphBuilder b;
  for (std::size_t i = 0; i < n + 6; ++i) {
    const auto p = Predicate::parse("(r" + std::to_string(i) + ".1,r" + std::to_string(i) + ".2)#a#b");
    const std::vector<float> v = {g(rng), g(rng), g(rng)};
    w.store.add(p, v);
    if (i < n) {
      w.in_graph.push_back(p);
      w.vec_in.push_back(v);
      b.add_vertex(p);
    } else {
      w.outside.push_back(p);
    }
  }
  for (const auto& s : w.in_graph)
    for (const auto& t : w.in_graph)
      if (s != t && u(rng) < 0.2) b.add_edge(s, t, std::round(u(rng) * 100) / 100);
  w.graph = std::move(b).build();
  w.indexes = build_indexes(w.graph, w.store);
  return w;
}

// Oracle: exhaustive neighbours by (distance, string), then max over the grid.
std::vector<Predicate> oracle_neighbours(const World& w, const Predicate& q, std::size_t k) {
  const auto x = *w.store.find(q);
  std::vector<std::pair<double, std::string>> d;
  for (std::size_t i = 0; i < w.in_graph.size(); ++i) {
    double s = 0;
    for (int j = 0; j < 3; ++j) s += std::pow(double(w.vec_in[i][j]) - double(x[j]), 2);
    d.emplace_back(std::sqrt(s), w.in_graph[i].str());
  }
  std::sort(d.begin(), d.end());
  std::vector<Predicate> out;
  for (std::size_t i = 0; i < std::min(k, d.size()); ++i) out.push_back(Predicate::parse(d[i].second));
  return out;
}

double oracle_edge(const World& w, const Predicate& p, const Predicate& h) {
  if (p == h) return 1.0;
  const auto& sub = w.graph.subgraphs().begin()->second;
  for (const auto& e : sub.out_edges(p))
    if (e.target == h) return e.score;
  return 0.0;
}

TEST(SmoothingPropertyTest, MaxOverCandidateGridAndValidWitness) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = random_world(rng);
    std::vector<Predicate> all = w.in_graph;
    all.insert(all.end(), w.outside.begin(), w.outside.end());
    const auto& p = all[rng() % all.size()];
    const auto& h = all[rng() % all.size()];
    const std::size_t kp = 1 + rng() % 5, kh = 1 + rng() % 3;
    const auto c = config(SmoothingMode::knn, SmoothingMode::knn, kp, kh);
    const auto v = score_query(p, h, w.resources(), c);

    const auto pc = w.graph.contains_predicate(p) ? std::vector<Predicate>{p} : oracle_neighbours(w, p, kp);
    const auto hc = w.graph.contains_predicate(h) ? std::vector<Predicate>{h} : oracle_neighbours(w, h, kh);
    EXPECT_EQ(preds(v.query.premise_candidates), pc);
    EXPECT_EQ(preds(v.query.hypothesis_candidates), hc);
    double best = 0.0;
    for (const auto& a : pc)
      for (const auto& b : hc) best = std::max(best, oracle_edge(w, a, b));
    EXPECT_EQ(v.score, best);

    if (v.score > 0) {
      ASSERT_TRUE(v.witness);
      EXPECT_EQ(w.graph.lookup_edge(v.witness->premise.predicate, v.witness->hypothesis.predicate), v.score);
      EXPECT_TRUE(w.graph.contains_predicate(v.witness->premise.predicate));
      EXPECT_TRUE(w.graph.contains_predicate(v.witness->hypothesis.predicate));
    } else {
      EXPECT_FALSE(v.witness);
    }
  }
}

TEST(SmoothingPropertyTest, FallbackAndMonotonicityInK) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = random_world(rng);
    const auto& p = w.in_graph[rng() % w.in_graph.size()];
    const auto& h = w.in_graph[rng() % w.in_graph.size()];
    // Present premise and hypothesis: smoothing never changes the score.
    const auto plain = score_query(p, h, w.resources(), config(SmoothingMode::off, SmoothingMode::off));
    const auto smoothed = score_query(p, h, w.resources(), config(SmoothingMode::knn, SmoothingMode::knn));
    EXPECT_EQ(plain.score, smoothed.score);
    EXPECT_EQ(plain.score, oracle_edge(w, p, h));

    // Missing premise: score is non-decreasing in K.
    const auto& missing = w.outside[rng() % w.outside.size()];
    double prev = 0.0;
    std::vector<Predicate> prev_cands;
    for (std::size_t k = 1; k <= 8; ++k) {
      const auto v = score_query(missing, h, w.resources(), config(SmoothingMode::knn, SmoothingMode::off, k));
      EXPECT_GE(v.score, prev);
      const auto cands = preds(v.query.premise_candidates);
      EXPECT_TRUE(std::equal(prev_cands.begin(), prev_cands.end(), cands.begin()));
      prev = v.score;
      prev_cands = cands;
    }
  }
}

TEST(SmoothingPropertyTest, ChainDirectionIsPremiseToHypothesis) {
  // Premise candidates are used as edge sources and hypothesis candidates as
  // edge targets, never the other way around.
  ChainFixture fx;
  const auto c = config(SmoothingMode::knn, SmoothingMode::knn, 4, 4);
  // beat => play exists, so the reverse query must not score through beat.
  const auto v = score_query(testing::kPlay, testing::kObliterate, fx.resources(), c);
  EXPECT_EQ(preds(v.query.premise_candidates), std::vector<Predicate>{testing::kPlay});
  EXPECT_LT(v.score, 0.9);
  double best = 0.0;
  for (const auto& hc : v.query.hypothesis_candidates)
    best = std::max(best, fx.graph.lookup_edge(testing::kPlay, hc.predicate).value_or(0.0));
  EXPECT_EQ(v.score, best);
}

}  // namespace
}  // namespace egsmooth
