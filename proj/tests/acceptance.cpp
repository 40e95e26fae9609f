// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "knn_oracle.hpp"
#include "metric_oracle.hpp"
#include "test_support.hpp"

using namespace egsmooth;
namespace t = egsmooth::testing;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string knn_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::size_t instances = 0;
  for (std::size_t dim : {2u, 8u, 64u}) {
    for (int trial = 0; trial < 400; ++trial, ++instances) {
      const std::size_t n = 1 + rng() % 500;
      const bool grid = trial % 2 == 0;
      std::uniform_int_distribution<int> cell(-2, 2);
      std::normal_distribution<float> g(0.f, 1.f);
      std::vector<float> data(n * dim);
      for (auto& v : data) v = grid ? static_cast<float>(cell(rng)) : g(rng);
      for (std::size_t d = 0; d < n / 10; ++d)
        std::copy_n(data.begin() + (rng() % n) * dim, dim, data.begin() + (rng() % n) * dim);
      const BallTree<float> tree(data, dim, 1 + rng() % 40);
      for (int q = 0; q < 3; ++q) {
        std::vector<float> x(dim);
        if (q == 0)
          std::copy_n(data.begin() + (rng() % n) * dim, dim, x.begin());
        else
          for (auto& v : x) v = grid ? static_cast<float>(cell(rng)) : g(rng);
        const std::size_t k = 1 + rng() % 8;
        const auto got = tree.query(x, k);
        const auto want = t::scan_knn(data, dim, x, k);
        check(got.size() == want.size(), "result size differs");
        for (std::size_t i = 0; i < got.size(); ++i)
          check(got[i].index == want[i].first && got[i].distance == want[i].second,
                "dim " + std::to_string(dim) + " n " + std::to_string(n) + " rank " + std::to_string(i));
      }
    }
  }
  const double secs = seconds_since(start);
  check(secs < 60.0, "took " + fmt(secs) + " s");
  return std::to_string(instances) + " instances, " + fmt(secs).substr(0, 5) + " s";
}

std::string metric_oracle() {
  check(auc_norm(PRCurve{{{0.0, 1.0, 1}, {1.0, 1.0, 0}}}, 0.5) == 1.0, "perfect classifier");
  check(auc_norm(PRCurve{{{0.0, 0.5, 1}, {1.0, 0.5, 0}}}, 0.5) == 0.0, "baseline classifier");
  check(auc_norm(PRCurve{{{0.0, 1.0, 1}, {0.5, 1.0, 0.9}, {0.5, 0.75, 0.8}, {1.0, 0.75, 0.7}}}, 0.5) == 0.75,
        "two-segment curve");
  const std::vector<ScoredLabel> perfect = {{0.9, true}, {0.8, true}, {0.3, false}, {0.2, false}};
  check(auc_norm(pr_curve(perfect), 0.5) == 1.0, "perfect ranking from scores");

  std::mt19937_64 rng(99);
  const int n_sets = 1200;
  for (int trial = 0; trial < n_sets; ++trial) {
    const auto data = t::random_scored(rng);
    const auto curve = pr_curve(data);
    const auto want = t::oracle_curve(data);
    check(curve.points.size() == want.size(), "curve length");
    for (std::size_t i = 0; i < want.size(); ++i)
      check(std::abs(curve.points[i].recall - want[i].recall) <= 1e-9 &&
                std::abs(curve.points[i].precision - want[i].precision) <= 1e-9 &&
                curve.points[i].threshold == want[i].threshold,
            "curve point " + std::to_string(i));
    const double base = t::baseline(data);
    if (base < 1.0) check(std::abs(auc_norm(curve, base) - t::oracle_auc_norm(data, base)) <= 1e-9, "auc_norm");
    check(std::abs(average_precision(data) - t::oracle_average_precision(data)) <= 1e-9, "average precision");
  }
  return std::to_string(n_sets) + " datasets + 3 hand curves";
}

std::vector<ScoredLabel> chain_scores(const t::ChainFixture& fx, const SmoothingConfig& c) {
  return to_scored_labels(score_dataset(fx.dataset, fx.resources(), c));
}

double precision_at(const std::vector<ScoredLabel>& d, double tau) {
  double tp = 0, pred = 0;
  for (const auto& s : d)
    if (s.score > 0 && s.score >= tau) {
      pred += 1;
      tp += s.label;
    }
  return pred == 0 ? 1.0 : tp / pred;
}

std::string transitive_chain() {
  const auto start = std::chrono::steady_clock::now();
  t::ChainFixture fx;
  check(fx.graph.num_vertices() == 12, "fixture has " + std::to_string(fx.graph.num_vertices()) + " vertices");
  check(!fx.graph.contains_predicate(t::kObliterate) && !fx.graph.contains_predicate(t::kShopFor),
        "obliterate / shop for must be absent");

  const auto off = chain_scores(fx, t::config(SmoothingMode::off, SmoothingMode::off));
  const auto knn = chain_scores(fx, t::config(SmoothingMode::knn, SmoothingMode::off));
  const auto m_off = compute_metrics(off), m_knn = compute_metrics(knn);
  check(m_off.max_recall == 2.0 / 6.0, "unsmoothed max_recall " + fmt(m_off.max_recall));
  check(m_knn.max_recall == 5.0 / 6.0, "smoothed max_recall " + fmt(m_knn.max_recall));
  for (const auto* curve : {&m_off.curve, &m_knn.curve})
    for (const auto& p : curve->points)
      check(precision_at(knn, p.threshold) >= precision_at(off, p.threshold),
            "precision drops at threshold " + fmt(p.threshold));

  // Case 2: missing hypothesis, answered through a hyponym.
  const auto h_off = score_query(t::kBuy, t::kShopFor, fx.resources(), t::config(SmoothingMode::off, SmoothingMode::off));
  const auto h_lex =
      score_query(t::kBuy, t::kShopFor, fx.resources(), t::config(SmoothingMode::off, SmoothingMode::lex_hyponym));
  check(h_off.score == 0.0 && h_lex.score == 0.85, "case 2 score " + fmt(h_lex.score));
  check(h_lex.witness && h_lex.witness->hypothesis.predicate == t::kPayFor, "case 2 witness");

  // Case 3: both sides missing.
  const auto both =
      score_query(t::kObliterate, t::kContest, fx.resources(), t::config(SmoothingMode::knn, SmoothingMode::lex_hyponym));
  check(both.score == 0.9 && both.witness->premise.predicate == t::kBeat && both.witness->hypothesis.predicate == t::kPlay,
        "case 3 score " + fmt(both.score));

  const double secs = seconds_since(start);
  check(secs < 5.0, "took " + fmt(secs) + " s");
  return "max_recall 2/6 -> 5/6, case 2 = 0.85, case 3 = 0.9";
}

std::string monotonicity() {
  t::ChainFixture fx;
  const double baseline = fx.dataset.positive_rate();
  const std::vector<double> expected = {2.0 / 3.0, 5.0 / 6.0, 5.0 / 6.0};
  double prev = -1.0;
  std::string trace;
  for (std::size_t k = 2; k <= 4; ++k) {
    const auto a = auc_norm(pr_curve(chain_scores(fx, t::config(SmoothingMode::knn, SmoothingMode::off, k))), baseline);
    check(a >= prev, "AUC_n decreases at K=" + std::to_string(k));
    check(std::abs(a - expected[k - 2]) < 1e-12, "K=" + std::to_string(k) + " AUC_n " + fmt(a));
    prev = a;
    trace += (trace.empty() ? "" : ", ") + ("K=" + std::to_string(k) + " " + fmt(a).substr(0, 6));
  }
  return trace;
}

std::string qa_bands() {
  t::ChainFixture fx;
  const auto qs = t::make_qa_fixture();
  check(qs.size() == 200, "question count");
  const auto part = band_partition(qs, default_bands());
  check(part.dropped.empty(), "questions outside bands");
  const auto off = band_metrics(part, qs, fx.resources(), t::config(SmoothingMode::off, SmoothingMode::off));
  const auto knn = band_metrics(part, qs, fx.resources(), t::config(SmoothingMode::knn, SmoothingMode::off));
  for (std::size_t b = 0; b < 4; ++b) {
    const double want = static_cast<double>(t::kQABandPlan[b].misses) / static_cast<double>(t::kQABandPlan[b].n);
    check(off.bands[b].n_questions == t::kQABandPlan[b].n, "band size");
    check(off.bands[b].miss_rate == want, "miss rate " + off.bands[b].band.label() + " " + fmt(off.bands[b].miss_rate));
  }
  check(off.bands[0].miss_rate == 0.3 && off.bands[3].miss_rate == 0.0, "headline miss rates");
  const double gain_small = *knn.bands[0].auc_norm - *off.bands[0].auc_norm;
  const double gain_large = *knn.bands[3].auc_norm - *off.bands[3].auc_norm;
  check(gain_small > gain_large, "gain [2,5) " + fmt(gain_small) + " vs 15+ " + fmt(gain_large));
  return "miss 0.3 / 0.1 / 0.0667 / 0; AUC_n gain [2,5) " + fmt(gain_small).substr(0, 6) + " vs 15+ " +
         fmt(gain_large).substr(0, 6);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string round_trip() {
  std::size_t files = 0;
  auto graph_cycle = [&](const EntailmentGraph& g) {
    const auto text = serialize_graph(g);
    std::istringstream in(text);
    check(serialize_graph(parse_graph(in)) == text, "graph text changed");
    ++files;
  };
  auto egem_cycle = [&](const EmbeddingStore& s) {
    std::ostringstream out;
    write_embeddings(s, out);
    std::istringstream in(out.str());
    std::ostringstream again;
    write_embeddings(read_embeddings(in), again);
    check(again.str() == out.str(), "EGEM bytes changed");
    ++files;
    return out.str();
  };

  t::ChainFixture fx;
  graph_cycle(fx.graph);
  check(egem_cycle(fx.embeddings) == slurp(t::fixture("chain_embeddings.egem")), "fixture EGEM not reproduced");

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<float> g(0.f, 3.f);
  for (int trial = 0; trial < 50; ++trial) {
    GraphBuilder b;
    const std::size_t dim = 1 + rng() % 16;
    EmbeddingStore store(dim);
    std::vector<Predicate> verts;
    for (int i = 0; i < 20; ++i) {
      const std::string w = "w" + std::to_string(i);
      verts.push_back(Predicate::parse("(" + w + ".1," + w + ".in.2)#" + (i % 2 ? "person#place" : "org_1#org_2")));
      b.add_vertex(verts.back());
      std::vector<float> v(dim);
      for (auto& x : v) x = g(rng);
      store.add(verts.back(), v);
    }
    for (const auto& s : verts)
      for (const auto& h : verts)
        if (s != h && s.signature() == h.signature() && u(rng) < 0.3) b.add_edge(s, h, u(rng));
    graph_cycle(std::move(b).build());
    egem_cycle(store);
  }
  return std::to_string(files) + " files byte-stable";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"knn-oracle", knn_oracle},           {"metric-oracle", metric_oracle}, {"transitive-chain", transitive_chain},
      {"k-monotonicity", monotonicity},     {"qa-bands", qa_bands},           {"round-trip", round_trip},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    try {
      std::cout << "PASS " << name << ": " << run() << std::endl;
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL " << name << ": " << e.what() << std::endl;
    }
  }
  return failures == 0 ? 0 : 1;
}
