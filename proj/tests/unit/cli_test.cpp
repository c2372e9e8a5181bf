#include <algorithm>
#include <cstdlib>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run_cli(const std::string& args, const recon::test::TempDir& dir) {
  const auto log = (dir / "cli.log").string();
  const std::string cmd = std::string(RECON_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = recon::test::read_file(log);
  return r;
}

TEST(Cli, HelpListsSubcommandsAndDefaults) {
  recon::test::TempDir dir;
  auto r = run_cli("--help", dir);
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"gen-synthetic", "pretrain", "continue-pretrain", "fewshot", "index",
                          "search", "evaluate", "compare", "gradcheck"}) {
    EXPECT_NE(r.output.find(sub), std::string::npos) << sub;
  }
  r = run_cli("pretrain --help", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("--tau"), std::string::npos);
  EXPECT_NE(r.output.find("0.5"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  recon::test::TempDir dir;
  EXPECT_EQ(run_cli("", dir).code, 1);
  EXPECT_EQ(run_cli("no-such-command", dir).code, 1);
  EXPECT_EQ(run_cli("pretrain --out x.ckpt", dir).code, 1);
  EXPECT_EQ(run_cli("search --queries q --out r --k notanumber", dir).code, 1);
}

TEST(Cli, RuntimeErrorsExitTwoAndNameTheFile) {
  recon::test::TempDir dir;
  const auto missing = (dir / "missing.jsonl").string();
  const auto r = run_cli("pretrain --corpus " + missing + " --out " + (dir / "o").string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("missing.jsonl"), std::string::npos);
  recon::test::write_file(dir / "bad.cfg", "tau = 0.1\nbogus_key = 3\n");
  const auto c = run_cli("pretrain --corpus " + missing + " --config " + (dir / "bad.cfg").string() +
                             " --out " + (dir / "o").string(),
                         dir);
  EXPECT_EQ(c.code, 2);
  EXPECT_NE(c.output.find("bogus_key"), std::string::npos);
}

TEST(Cli, EndToEndOnTinyCorpus) {
  recon::test::TempDir dir;
  const auto d = dir.path().string();
  ASSERT_EQ(run_cli("gen-synthetic --topics 2 --docs-per-topic 20 --tokens-per-doc 30 --vocab-per-topic 20 "
                    "--queries-per-topic 3 --out " + d,
                    dir)
                .code,
            0);
  for (const char* f : {"corpus.jsonl", "queries.jsonl", "qrels.tsv", "labels.tsv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  ASSERT_EQ(run_cli("pretrain --corpus " + d + "/corpus.jsonl --out " + d + "/m.ckpt --steps 10 --warmup 2 "
                    "--batch 4 --dim 8 --vocab-size 1024 --queue 32 --metrics " + d + "/m.jsonl",
                    dir)
                .code,
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "m.ckpt"));
  const auto metrics = recon::test::read_file(dir / "m.jsonl");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 10);

  ASSERT_EQ(run_cli("search --checkpoint " + d + "/m.ckpt --corpus " + d + "/corpus.jsonl --queries " + d +
                        "/queries.jsonl --out " + d + "/dense.trec --k 10",
                    dir)
                .code,
            0);
  ASSERT_EQ(run_cli("search --bm25 --corpus " + d + "/corpus.jsonl --queries " + d + "/queries.jsonl --out " + d +
                        "/bm25.trec --k 10",
                    dir)
                .code,
            0);
  auto r = run_cli("evaluate --run " + d + "/dense.trec --qrels " + d + "/qrels.tsv --metric ndcg@10", dir);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("ndcg@10"), std::string::npos);
  r = run_cli("compare --run-a " + d + "/dense.trec --run-b " + d + "/bm25.trec --qrels " + d +
                  "/qrels.tsv --metric ndcg@10",
              dir);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("\"p\""), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  recon::test::TempDir dir;
  const auto r = run_cli("gradcheck", dir);
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("relevance_batch"), std::string::npos);
}

}  // namespace
