#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace loradex;
using namespace loradex::testing;

namespace {

std::vector<EvalScoreRecord> one_query(const std::string& evaluator, std::vector<double> by_rank,
                                       const std::string& retriever = "r", const std::string& query = "q1") {
  std::vector<EvalScoreRecord> out;
  for (std::size_t i = 0; i < by_rank.size(); ++i) out.push_back({query, retriever, evaluator, i + 1, by_rank[i]});
  return out;
}

RetrievalResult result_with(std::vector<std::pair<std::string, bool>> entries, const std::string& index_id,
                            std::size_t corpus_size) {
  RetrievalResult r;
  for (auto& [id, passed] : entries) r.entries.push_back({id, 0.5, 1.0, 0.5, passed, passed ? "" : "strength"});
  r.provenance.index_id = index_id;
  r.provenance.corpus_size = corpus_size;
  return r;
}

}  // namespace

TEST(Normalize, MinMaxExample) {
  const auto n = normalize_scores(one_query("judge", {2, 4, 6}));
  EXPECT_EQ(n[0].score, 0.0);
  EXPECT_EQ(n[1].score, 0.5);
  EXPECT_EQ(n[2].score, 1.0);
}

TEST(Normalize, AffineInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 10);
  std::vector<double> raw(40);
  for (auto& x : raw) x = u(rng);
  const auto base = normalize_scores(one_query("e", raw));
  std::vector<double> moved = raw;
  for (auto& x : moved) x = 7.5 + 0.25 * x;
  const auto other = normalize_scores(one_query("e", moved));
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(base[i].score, other[i].score, 1e-12);
}

TEST(Normalize, PerEvaluatorAndIdempotent) {
  auto records = one_query("small", {0.1, 0.2, 0.3});
  for (auto& r : one_query("big", {100, 400, 250})) records.push_back(r);
  const auto n = normalize_scores(records);
  EXPECT_EQ(n[0].score, 0.0);
  EXPECT_EQ(n[2].score, 1.0);
  EXPECT_EQ(n[3].score, 0.0);
  EXPECT_EQ(n[4].score, 1.0);
  EXPECT_EQ(n[5].score, 0.5);
  const auto again = normalize_scores(n);
  for (std::size_t i = 0; i < n.size(); ++i) EXPECT_EQ(again[i].score, n[i].score);
}

TEST(Normalize, ConstantScoresError) { EXPECT_THROW(normalize_scores(one_query("flat", {3, 3, 3})), Error); }

TEST(Topk, RunningMeans) {
  const auto t = topk_table(one_query("e", {1.0, 0.5, 0.0}), 3);
  EXPECT_EQ(*t.cell("r", "e", 1).mean, 1.0);
  EXPECT_EQ(*t.cell("r", "e", 2).mean, 0.75);
  EXPECT_EQ(*t.cell("r", "e", 3).mean, 0.5);
}

TEST(Topk, MissingRankReported) {
  auto records = one_query("e", {1.0, 0.5, 0.0});
  for (auto& r : one_query("e", {0.2}, "r", "q2")) records.push_back(r);
  const auto t = topk_table(records, 2);
  EXPECT_EQ(*t.cell("r", "e", 1).mean, 0.6);
  EXPECT_FALSE(t.cell("r", "e", 2).mean);
  EXPECT_NE(t.cell("r", "e", 2).missing.find("q2"), std::string::npos);
}

TEST(Topk, MonotoneScoresGiveNonIncreasingMeans) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EvalScoreRecord> records;
    for (int q = 0; q < 5; ++q) {
      std::vector<double> s(7);
      for (auto& x : s) x = u(rng);
      std::sort(s.rbegin(), s.rend());
      for (auto& r : one_query("e", s, "r", "q" + std::to_string(q))) records.push_back(r);
    }
    const auto t = topk_table(records, 7);
    for (std::size_t k = 2; k <= 7; ++k) EXPECT_LE(*t.cell("r", "e", k).mean, *t.cell("r", "e", k - 1).mean + 1e-15);
  }
}

TEST(Topk, ParsesTsvWithHeader) {
  std::istringstream in("query_id\tretriever_id\tevaluator_id\trank\traw_score\nq\tr\te\t1\t5\nq\tr\te\t2\t3\n");
  const auto records = parse_eval_scores(in);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].rank, 2u);
  EXPECT_EQ(records[1].score, 3.0);
  std::istringstream dup("q\tr\te\t1\t5\nq\tr\te\t1\t3\n");
  EXPECT_THROW(parse_eval_scores(dup), Error);
  std::istringstream bad("q\tr\te\t1\n");
  EXPECT_THROW(parse_eval_scores(bad), Error);
}

TEST(Diversity, UniformAndDegenerate) {
  const auto u = diversity_metrics(CountDistribution::from_counts(std::vector<std::uint64_t>(656, 3)));
  EXPECT_NEAR(u.normalized_entropy, 1.0, 1e-12);
  EXPECT_EQ(u.gini, 0.0);
  EXPECT_NEAR(u.effective_count, 656.0, 1e-9);

  std::vector<std::uint64_t> one(656, 0);
  one[17] = 2100;
  const auto d = diversity_metrics(CountDistribution::from_counts(one));
  EXPECT_EQ(d.normalized_entropy, 0.0);
  EXPECT_EQ(d.effective_count, 1.0);
  EXPECT_EQ(d.gini, 655.0 / 656.0);
}

TEST(Diversity, MatchesDoubleSumGini) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> c(0, 30);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> counts(1 + trial * 7);
    for (auto& x : counts) x = static_cast<std::uint64_t>(c(rng));
    counts[0] += 1;
    const auto m = diversity_metrics(CountDistribution::from_counts(counts));
    long double sum = 0, total = 0;
    for (auto a : counts) {
      total += a;
      for (auto b : counts) sum += std::fabs(static_cast<long double>(a) - static_cast<long double>(b));
    }
    const long double n = counts.size();
    EXPECT_NEAR(m.gini, static_cast<double>(sum / (2 * n * n * (total / n))), 1e-12);
    EXPECT_GE(m.gini, 0.0);
    EXPECT_LT(m.gini, 1.0);
    EXPECT_GE(m.effective_count, 1.0 - 1e-12);
    EXPECT_LE(m.effective_count, n + 1e-9);
    if (counts.size() > 1) EXPECT_NEAR(m.effective_count, std::exp(m.normalized_entropy * std::log((double)n)), 1e-9 * n);
  }
}

TEST(Diversity, GiniScaleAndPermutationInvariant) {
  const std::vector<std::uint64_t> counts{0, 4, 1, 9, 0, 2, 7};
  const auto g = diversity_metrics(CountDistribution::from_counts(counts)).gini;
  std::vector<std::uint64_t> scaled;
  for (auto x : counts) scaled.push_back(5 * x);
  EXPECT_NEAR(diversity_metrics(CountDistribution::from_counts(scaled)).gini, g, 1e-15);
  auto perm = counts;
  std::reverse(perm.begin(), perm.end());
  EXPECT_EQ(diversity_metrics(CountDistribution::from_counts(perm)).gini, g);
}

TEST(Diversity, EmptyErrors) {
  EXPECT_THROW(diversity_metrics(CountDistribution{}), Error);
  EXPECT_THROW(diversity_metrics(CountDistribution::from_counts({0, 0})), Error);
}

TEST(Diversity, RetrievalCounts) {
  const std::vector<RetrievalResult> rs{result_with({{"A", true}, {"B", true}}, "idx-1", 5),
                                        result_with({{"A", true}, {"C", true}}, "idx-1", 5)};
  const auto d = retrieval_counts(rs, 1);
  EXPECT_EQ(d.counts.at("A"), 2u);
  EXPECT_EQ(d.total(), 2u);
  EXPECT_EQ(d.support_size, 5u);
  const auto wide = retrieval_counts(rs, 10);
  EXPECT_EQ(wide.total(), 4u);
  const std::vector<RetrievalResult> skips{result_with({{"X", false}, {"A", true}}, "idx-1", 5)};
  EXPECT_EQ(retrieval_counts(skips, 1).counts.count("X"), 0u);
  const std::vector<RetrievalResult> mixed{rs[0], result_with({{"A", true}}, "idx-2", 5)};
  EXPECT_THROW(retrieval_counts(mixed, 1), Error);
}

TEST(Diversity, CountsAgainstTallyOracle) {
  synthetic::SynthConfig cfg;
  cfg.adapters = 40;
  cfg.dim = 32;
  synthetic::HashTextEncoder enc(cfg.dim);
  CorpusBuilder b(cfg.dim);
  for (const auto& r : synthetic::generate(cfg, enc).records) b.add(r);
  const auto index = build_index(std::move(b).finish(), IndexBuildConfig{}).index;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::vector<RetrievalResult> results;
  std::map<std::string, std::uint64_t> tally;
  for (int q = 0; q < 700; ++q) {
    Vector v(cfg.dim);
    for (auto& x : v) x = g(rng);
    auto r = retrieve(index, query_of(v), FilterConfig{9.8, 0.041, 3, false});
    for (std::size_t i = 0; i < r.entries.size() && i < 3; ++i) ++tally[r.entries[i].adapter_id];
    results.push_back(std::move(r));
  }
  const auto d = retrieval_counts(results, 3, index);
  EXPECT_EQ(d.support_size, index.signatures.size());
  for (const auto& [id, c] : d.counts) EXPECT_EQ(c, tally.count(id) ? tally.at(id) : 0u) << id;
  EXPECT_EQ(d.total(), 2100u);
}

TEST(Screening, CornersGetDistinctQuadrants) {
  const auto index = make_index({make_signature("lo-lo", {1}, 1, 0.1), make_signature("lo-hi", {1}, 2, 0.4),
                                 make_signature("hi-lo", {1}, 3, 0.2), make_signature("hi-hi", {1}, 4, 0.3)});
  const auto r = screening_report(index);
  std::map<std::string, Quadrant> q;
  for (const auto& e : r.entries) q[e.adapter_id] = e.quadrant;
  EXPECT_EQ(q["lo-lo"], Quadrant::weak_inconsistent);
  EXPECT_EQ(q["lo-hi"], Quadrant::weak_consistent);
  EXPECT_EQ(q["hi-lo"], Quadrant::strong_inconsistent);
  EXPECT_EQ(q["hi-hi"], Quadrant::strong_consistent);
  EXPECT_EQ(r.flagged(), std::vector<std::string>{"hi-hi"});
  EXPECT_NE(r.disclaimer.find("not a legal determination"), std::string::npos);
}

TEST(Screening, PercentilesAndTies) {
  EXPECT_EQ(percentile_ranks({5, 1, 3}), (std::vector<double>{1.0, 0.0, 0.5}));
  EXPECT_EQ(percentile_ranks({2, 2, 1, 4}), (std::vector<double>{0.5, 0.5, 0.0, 1.0}));
  EXPECT_EQ(percentile_ranks({7}), (std::vector<double>{0.5}));
}

TEST(Screening, SplitMonotonicity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<LoraSignature> sigs;
  for (int i = 0; i < 120; ++i) sigs.push_back(make_signature("a" + std::to_string(i), {1}, 10 * u(rng), u(rng)));
  const auto index = make_index(sigs);
  const auto wide = screening_report(index, 0.5, 0.5).flagged();
  const auto narrow = screening_report(index, 0.75, 0.75).flagged();
  EXPECT_FALSE(narrow.empty());
  EXPECT_TRUE(std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end()));
  EXPECT_THROW(screening_report(CorpusIndex{}), Error);
  EXPECT_THROW(screening_report(index, 1.5, 0.5), Error);
}

TEST(Screening, MaxOfBothFlagged) {
  const auto index = make_index({make_signature("top", {1}, 9, 0.9), make_signature("b", {1}, 1, 0.1),
                                 make_signature("c", {1}, 2, 0.2)});
  const auto r = screening_report(index, 0.5, 0.5, FilterConfig{});
  EXPECT_EQ(r.flagged(), std::vector<std::string>{"top"});
  EXPECT_TRUE(r.entries[0].passes_filter.value());
}

TEST(ScaleCurve, TwoPointsAscending) {
  const auto lo = make_index({make_signature("a", {1}, 3.1, 0.5)});
  const auto hi = make_index({make_signature("a", {1}, 5.0, 0.5)});
  const auto curve = scale_curve({{1.0, &hi}, {0.5, &lo}}, "a");
  ASSERT_EQ(curve.points.size(), 2u);
  EXPECT_EQ(curve.points[0].scale, 0.5);
  EXPECT_EQ(curve.points[0].strength, 3.1);
  EXPECT_EQ(curve.points[1].strength, 5.0);
}

TEST(ScaleCurve, AbsentScaleSkippedWithNote) {
  const auto a = make_index({make_signature("a", {1}, 3.1, 0.5)});
  const auto b = make_index({make_signature("a", {1}, 5.0, 0.5)});
  const auto other = make_index({make_signature("b", {1}, 5.0, 0.5)});
  const auto curve = scale_curve({{0.5, &a}, {1.0, &b}, {1.5, &other}}, "a");
  EXPECT_EQ(curve.points.size(), 2u);
  ASSERT_EQ(curve.notes.size(), 1u);
  EXPECT_NE(curve.notes[0].find("1.5"), std::string::npos);
  EXPECT_THROW(scale_curve({{0.5, &a}, {1.5, &other}}, "a"), Error);
}

TEST(ScaleCurve, LinearThroughOrigin) {
  std::mt19937_64 rng(6);
  const auto rows = random_rows(rng, 50, 12, 0.5);
  std::map<double, CorpusIndex> built;
  for (double c : {0.25, 0.5, 1.0, 2.0}) {
    auto scaled = rows;
    for (auto& r : scaled) {
      for (auto& x : r) x *= c;
    }
    IndexBuildConfig cfg;
    cfg.strength_scale = c;
    const auto d = diffs_of(scaled, "lora");
    auto [sig, entry] = signature_of(d, cfg);
    built.emplace(c, make_index({*sig}));
  }
  std::map<double, const CorpusIndex*> view;
  for (const auto& [c, idx] : built) view.emplace(c, &idx);
  const auto curve = scale_curve(view, "lora");
  const double slope = curve.points[0].strength / curve.points[0].scale;
  for (const auto& p : curve.points) EXPECT_NEAR(p.strength, slope * p.scale, 1e-12 * p.strength);
}
