#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace loradex;
using namespace loradex::testing;

namespace {

Corpus corpus_of(std::initializer_list<GenerationRecord> records, std::size_t dim) {
  CorpusBuilder b(dim);
  for (const auto& r : records) b.add(r);
  return std::move(b).finish();
}

}  // namespace

TEST(Diffs, ComponentwiseSubtraction) {
  const auto c = corpus_of({{"a", "p", 42, {3, 4}}, {std::nullopt, "p", 42, {1, 1}}}, 2);
  const auto d = compute_diffs(c, "a");
  ASSERT_EQ(d.sample_count(), 1u);
  EXPECT_EQ(d.row(0)[0], 2.0);
  EXPECT_EQ(d.row(0)[1], 3.0);
  EXPECT_EQ(d.key(0).prompt_id, "p");
  EXPECT_EQ(d.key(0).seed, 42u);
}

TEST(Diffs, IdentityGivesZero) {
  const auto c = corpus_of({{"a", "p", 1, {0.5f, -2}}, {std::nullopt, "p", 1, {0.5f, -2}}}, 2);
  const auto d = compute_diffs(c, "a");
  EXPECT_EQ(d.row(0)[0], 0.0);
  EXPECT_EQ(d.row(0)[1], 0.0);
}

TEST(Diffs, MissingBaseNamesKey) {
  const auto c = corpus_of({{"a", "p7", 42, {1, 1}}, {"a", "p1", 42, {1, 1}}, {std::nullopt, "p1", 42, {0, 0}}}, 2);
  try {
    compute_diffs(c, "a");
    FAIL() << "expected missing BASE error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("(p7, 42)"), std::string::npos) << e.what();
  }
}

TEST(Diffs, MinSamplesEnforced) {
  const auto c = corpus_of({{"a", "p", 1, {1, 1}}, {std::nullopt, "p", 1, {0, 0}}}, 2);
  EXPECT_THROW(compute_diffs(c, "a", 2), Error);
}

TEST(Metrics, DirectionIsMean) {
  const auto d = semantic_direction(diffs_of({{2, 0}, {0, 2}}));
  EXPECT_EQ(d, (Vector{1, 1}));
  const auto z = semantic_direction(diffs_of({{1.5, -3}, {-1.5, 3}}));
  EXPECT_EQ(z, (Vector{0, 0}));
}

TEST(Metrics, StrengthIsMeanNorm) {
  EXPECT_DOUBLE_EQ(strength(diffs_of({{3, 4}, {0, 0}})), 2.5);
  EXPECT_EQ(strength(diffs_of({{0, 0}, {0, 0}})), 0.0);
}

TEST(Metrics, EmptyCorpusErrors) {
  DiffCorpus empty("a", 2);
  EXPECT_THROW(semantic_direction(empty), Error);
  EXPECT_THROW(strength(empty), Error);
  EXPECT_THROW(consistency(empty), Error);
}

TEST(Metrics, ConsistencyExamples) {
  EXPECT_NEAR(consistency(diffs_of({{1, 0}, {2, 0}})), 1.0, 1e-15);
  EXPECT_NEAR(consistency(diffs_of({{1, 0}, {0, 1}})), 0.0, 1e-15);
  EXPECT_NEAR(consistency(diffs_of({{1, 0}, {0, 1}, {1, 1}})), 0.47140, 5e-6);
  EXPECT_NEAR(consistency(diffs_of({{1, 0}, {0, 1}, {1, 1}})), std::sqrt(2.0) / 3.0, 1e-15);
}

TEST(Metrics, ConsistencyExcludesZeroDiffs) {
  const auto r = consistency_detailed(diffs_of({{1, 0}, {0, 0}, {2, 0}, {0, 0}}));
  EXPECT_NEAR(r.value, 1.0, 1e-15);
  EXPECT_EQ(r.pairs_used, 1u);
  EXPECT_EQ(r.excluded_pairs, 5u);
  EXPECT_THROW(consistency(diffs_of({{0, 0}, {0, 0}, {1, 0}})), Error);
  EXPECT_THROW(consistency(diffs_of({{1, 0}})), Error);
}

TEST(Metrics, AgreeWithOracles) {
  std::mt19937_64 rng(2024);
  for (std::size_t n : {2u, 3u, 17u, 64u, 333u, 4480u}) {
    const auto rows = random_rows(rng, n, 32, 0.7, 3.0);
    const auto d = diffs_of(rows);
    const auto dir = semantic_direction(d);
    const auto want = oracle_mean(rows);
    for (std::size_t j = 0; j < dir.size(); ++j) {
      EXPECT_LE(std::fabs(dir[j] - static_cast<double>(want[j])), 1e-9 * std::max(1.0, std::fabs((double)want[j])));
    }
    EXPECT_LE(rel_err(strength(d), oracle_strength(rows)), 1e-9);
    EXPECT_LE(std::fabs(consistency(d) - static_cast<double>(oracle_consistency(rows))), 1e-6);
  }
}

TEST(Metrics, PermutationInvariant) {
  std::mt19937_64 rng(99);
  auto rows = random_rows(rng, 200, 16, 1.0);
  const auto a = diffs_of(rows);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto b = diffs_of(rows);
  const auto da = semantic_direction(a), db = semantic_direction(b);
  for (std::size_t j = 0; j < da.size(); ++j) EXPECT_NEAR(da[j], db[j], 1e-12 * std::max(1.0, std::fabs(da[j])));
  EXPECT_NEAR(strength(a), strength(b), 1e-12 * strength(a));
  EXPECT_NEAR(consistency(a), consistency(b), 1e-12);
}

TEST(Metrics, TriangleEqualityForParallelDiffs) {
  const auto d = diffs_of({{1, 2}, {2, 4}, {0.5, 1}, {0, 0}});
  // Zero diffs pull the mean in; equality is over the nonzero ones.
  const auto nz = diffs_of({{1, 2}, {2, 4}, {0.5, 1}});
  EXPECT_NEAR(norm(semantic_direction(nz)), strength(nz), 1e-15);
  EXPECT_LE(norm(semantic_direction(d)), strength(d));
  const auto spread = diffs_of({{1, 0}, {0, 1}});
  EXPECT_LT(norm(semantic_direction(spread)), strength(spread));
}

TEST(Build, TwoAdaptersIndexed) {
  const auto c = corpus_of({{"a", "p", 1, {2, 0}},
                            {"a", "p", 2, {0, 2}},
                            {"b", "p", 1, {1, 1}},
                            {"b", "p", 2, {2, 2}},
                            {std::nullopt, "p", 1, {0, 0}},
                            {std::nullopt, "p", 2, {0, 0}}},
                           2);
  IndexBuildConfig cfg;
  cfg.created_at = "2026-01-01T00:00:00Z";
  const auto out = build_index(c, cfg);
  ASSERT_EQ(out.index.signatures.size(), 2u);
  const auto& a = out.index.at("a");
  EXPECT_EQ(a.direction, (Vector{1, 1}));
  EXPECT_DOUBLE_EQ(a.strength, 2.0);
  EXPECT_NEAR(a.consistency, 0.0, 1e-15);
  EXPECT_EQ(a.sample_count, 2u);
  EXPECT_NEAR(out.index.at("b").consistency, 1.0, 1e-15);
  EXPECT_EQ(out.index.manifest.adapters, 3u);
  EXPECT_EQ(out.report.indexed_count(), 2u);
  EXPECT_THROW(out.index.at("zzz"), Error);
}

TEST(Build, UndersampledAdapterExcludedAndReported) {
  const auto c = corpus_of({{"a", "p", 1, {2, 0}},
                            {"a", "p", 2, {0, 2}},
                            {"solo", "p", 1, {1, 1}},
                            {std::nullopt, "p", 1, {0, 0}},
                            {std::nullopt, "p", 2, {0, 0}}},
                           2);
  const auto out = build_index(c, IndexBuildConfig{});
  EXPECT_EQ(out.index.signatures.size(), 1u);
  ASSERT_EQ(out.report.adapters.size(), 2u);
  EXPECT_EQ(out.report.adapters[1].adapter_id, "solo");
  EXPECT_FALSE(out.report.adapters[1].indexed());
  std::ostringstream report;
  write_build_report(report, out.report);
  EXPECT_NE(report.str().find("solo\t1\t"), std::string::npos);
  EXPECT_NE(report.str().find("excluded: fewer than min_samples"), std::string::npos);
}

TEST(Build, AllZeroAdapterExcluded) {
  const auto c = corpus_of({{"a", "p", 1, {2, 0}},
                            {"a", "p", 2, {0, 2}},
                            {"noop", "p", 1, {0, 0}},
                            {"noop", "p", 2, {0, 0}},
                            {std::nullopt, "p", 1, {0, 0}},
                            {std::nullopt, "p", 2, {0, 0}}},
                           2);
  const auto out = build_index(c, IndexBuildConfig{});
  EXPECT_EQ(out.index.signatures.count("noop"), 0u);
  EXPECT_FALSE(out.report.adapters[1].indexed());
}

TEST(Build, NothingIndexableErrors) {
  const auto c = corpus_of({{"solo", "p", 1, {1, 1}}, {std::nullopt, "p", 1, {0, 0}}}, 2);
  EXPECT_THROW(build_index(c, IndexBuildConfig{}), Error);
  IndexBuildConfig bad;
  bad.min_samples = 1;
  EXPECT_THROW(build_index(c, bad), Error);
}

TEST(Build, DeterministicAcrossParallelism) {
  synthetic::SynthConfig cfg;
  cfg.adapters = 30;
  synthetic::HashTextEncoder enc(cfg.dim);
  CorpusBuilder b(cfg.dim);
  for (const auto& r : synthetic::generate(cfg, enc).records) b.add(r);
  const auto corpus = std::move(b).finish();
  IndexBuildConfig one;
  one.parallelism = 1;
  IndexBuildConfig many;
  many.parallelism = 7;
  const auto x = build_index(corpus, one).index;
  const auto y = build_index(corpus, many).index;
  EXPECT_TRUE(x == y);
  EXPECT_EQ(serialize_index(x), serialize_index(y));
}
