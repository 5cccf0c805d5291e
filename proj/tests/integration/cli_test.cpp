#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "test_support.hpp"

using namespace loradex;
using namespace loradex::testing;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = loradex::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(run_cli({"synth", "--out", dir.path().string(), "--dim", "32", "--adapters", "15", "--query", "pixel art",
                   "--query", "oil painting"})
                  .code,
              0);
    records = dir.file("records.jsonl");
    prompts = dir.file("retrieval_prompts.tsv");
    index = dir.file("index.ldx");
    const auto r = run_cli({"index", "--records", records, "--out", index, "--dim", "32", "--created-at",
                        "2026-01-01T00:00:00Z"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  CliRun query(std::vector<std::string> extra) {
    std::vector<std::string> args{"query", "--index", index, "--prompts", prompts, "--provider", records};
    args.insert(args.end(), extra.begin(), extra.end());
    return run_cli(args);
  }

  TempDir dir;
  std::string records, prompts, index;
};

}  // namespace

TEST_F(CliTest, QueryTableHasTopKRows) {
  const auto r = query({"pixel art", "--top-k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) {
    if (!line.starts_with("#")) rows.push_back(line);
  }
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "rank\tadapter\tscore\tstrength\tconsistency");
  EXPECT_TRUE(rows[1].starts_with("1\tplanted-pixel-art\t"));
  EXPECT_NE(r.out.find("tau_s=9.8 tau_c=0.041"), std::string::npos);
}

TEST_F(CliTest, RecordsFormatEchoesThresholds) {
  const auto r = query({"oil painting", "--tau-s", "9.8", "--tau-c", "0.041", "--format", "records"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["config"]["tau_s"], 9.8);
  EXPECT_EQ(j["config"]["tau_c"], 0.041);
  EXPECT_EQ(j["entries"][0]["adapter_id"], "planted-oil-painting");
}

TEST_F(CliTest, DiversityOneRow) {
  const auto qfile = dir.file("queries.txt");
  write_text(qfile, "pixel art\noil painting\n");
  const auto r = query({"--queries-file", qfile, "--format", "records"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto results = dir.file("results.jsonl");
  write_text(results, r.out);
  const auto d = run_cli({"diversity", "--k", "3", "--results", results, "--index", index});
  ASSERT_EQ(d.code, 0) << d.err;
  std::istringstream lines(d.out);
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "normalized_entropy\tgini\teffective_count");
  EXPECT_EQ(std::count(row.begin(), row.end(), '\t'), 2);
  EXPECT_FALSE(std::getline(lines, extra));
}

TEST_F(CliTest, ScreenAndEval) {
  const auto s = run_cli({"screen", "--index", index, "--with-thresholds"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_NE(s.out.find("not a legal determination"), std::string::npos);
  const auto scores = dir.file("scores.tsv");
  write_text(scores, "query_id\tretriever_id\tevaluator_id\trank\traw_score\nq\tr\te\t1\t9\nq\tr\te\t2\t6\nq\tr\te\t3\t3\n");
  const auto e = run_cli({"eval", "--scores", scores, "--k-max", "3"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("top-2\te\nr\t0.750000"), std::string::npos) << e.out;
}

TEST_F(CliTest, ScaleCurve) {
  const auto r = run_cli({"scale-curve", "--index", "1.0=" + index, "--index", "0.5=" + index, "--adapter",
                      "planted-pixel-art"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.starts_with("scale\tstrength\n0.5\t"));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run_cli({"query", "--bogus"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(query({"pixel art", "--top-k", "0"}).code, 1);
  const auto missing = run_cli({"query", "x", "--index", dir.file("nope"), "--prompts", prompts, "--provider", records});
  EXPECT_EQ(missing.code, 2);
  EXPECT_TRUE(missing.err.starts_with("loradex: error: "));
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);
  EXPECT_EQ(query({"not in the cache"}).code, 3);
  EXPECT_EQ(run_cli({"query", "x", "--index", index, "--prompts", prompts, "--provider", "http://127.0.0.1:9"}).code, 3);
}

TEST_F(CliTest, IngestReportsRejections) {
  const auto bad = dir.file("bad.jsonl");
  write_text(bad, std::string(R"({"kind":"image","adapter_id":"a","prompt_id":"p","seed":1,"vector":[1,2]})") + "\n" +
                      R"({"kind":"image","adapter_id":"a","prompt_id":"p","seed":2,"vector":[1,2,3]})" + "\n");
  EXPECT_EQ(run_cli({"ingest", "--records", bad, "--dim", "2"}).code, 2);
  const auto lenient = run_cli({"ingest", "--records", bad, "--dim", "2", "--lenient"});
  EXPECT_EQ(lenient.code, 0);
  EXPECT_NE(lenient.err.find("(a, p, 2)"), std::string::npos);
  const auto bin = dir.file("records.crls");
  ASSERT_EQ(run_cli({"ingest", "--records", records, "--dim", "32", "--out", bin, "--binary"}).code, 0);
  const auto from_bin = run_cli({"ingest", "--records", bin, "--dim", "32", "--format", "records"});
  const auto from_text = run_cli({"ingest", "--records", records, "--dim", "32", "--format", "records"});
  EXPECT_EQ(from_bin.out, from_text.out);
}

TEST_F(CliTest, IndexAndQueryDeterministic) {
  const auto second = dir.file("index2.ldx");
  ASSERT_EQ(run_cli({"index", "--records", records, "--out", second, "--dim", "32", "--jobs", "3", "--created-at",
                 "2026-01-01T00:00:00Z"})
                .code,
            0);
  EXPECT_EQ(read_text(index), read_text(second));
  const auto a = query({"pixel art", "--verbose"});
  const auto b = query({"pixel art", "--verbose"});
  EXPECT_EQ(a.out, b.out);
}
