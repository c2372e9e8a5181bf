#include <gtest/gtest.h>

#include "recon/error.hpp"
#include "recon/run.hpp"
#include "test_util.hpp"

namespace recon {
namespace {

TEST(TrecRun, RoundTripKeepsScoresExactly) {
  test::TempDir dir;
  RankedRun run{{"q1", {{"a", 0.1 + 0.2}, {"b", -1e-17}, {"c", -3.5}}}, {"q2", {{"z", 1.0}}}};
  write_trec_run(dir / "r.trec", run, "tag");
  EXPECT_EQ(read_trec_run(dir / "r.trec"), run);
  const auto text = test::read_file(dir / "r.trec");
  EXPECT_NE(text.find("q1 Q0 a 1 0.30000000000000004 tag\n"), std::string::npos);
  EXPECT_NE(text.find("q1 Q0 c 3 -3.5 tag\n"), std::string::npos);
}

TEST(TrecRun, ReaderReordersByScoreThenId) {
  test::TempDir dir;
  test::write_file(dir / "r.trec",
                   "q Q0 b 1 1.0 x\n"
                   "q Q0 c 2 2.0 x\n"
                   "\n"
                   "q Q0 a 3 1.0 x\n");
  const auto run = read_trec_run(dir / "r.trec");
  ASSERT_EQ(run.at("q").size(), 3u);
  EXPECT_EQ(run.at("q")[0].doc_id, "c");
  EXPECT_EQ(run.at("q")[1].doc_id, "a");
  EXPECT_EQ(run.at("q")[2].doc_id, "b");
}

TEST(TrecRun, MalformedLines) {
  test::TempDir dir;
  test::write_file(dir / "a.trec", "q Q0 a 1 1.0\n");
  test::write_file(dir / "b.trec", "q Q0 a 1 high x\n");
  test::write_file(dir / "c.trec", "q Q0 a 1 1 x\nq Q0 a 2 0.5 x\n");
  for (const char* f : {"a.trec", "b.trec", "c.trec"}) EXPECT_THROW(read_trec_run(dir / f), ParseError) << f;
  EXPECT_THROW(read_trec_run(dir / "none.trec"), IoError);
}

TEST(Qrels, RoundTripAndSpaceSeparated) {
  test::TempDir dir;
  const Qrels qrels{{"q1", {{"d1", 1}, {"d2", 0}}}, {"q2", {{"d9", 3}}}};
  write_qrels(dir / "q.tsv", qrels);
  EXPECT_EQ(read_qrels(dir / "q.tsv"), qrels);
  test::write_file(dir / "s.txt", "q1 0 d1 2\nq1 0 d3 1\n");
  EXPECT_EQ(read_qrels(dir / "s.txt").at("q1").at("d1"), 2);
}

TEST(Qrels, BadGain) {
  test::TempDir dir;
  test::write_file(dir / "q.tsv", "q1\t0\td1\t-1\n");
  EXPECT_THROW(read_qrels(dir / "q.tsv"), ParseError);
  test::write_file(dir / "r.tsv", "q1\t0\td1\n");
  EXPECT_THROW(read_qrels(dir / "r.tsv"), ParseError);
}

}  // namespace
}  // namespace recon
