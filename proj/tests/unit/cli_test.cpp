#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "mock_endpoint.hpp"

namespace reclink::cli {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun Exec(std::vector<std::string> args) {
  args.insert(args.begin(), "reclink");
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("reclink_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun Generate(const fs::path& where, int n = 300) {
    return Exec({"-q", "--data", where.string(), "generate", "--n-persons", std::to_string(n)});
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Exec({"--help"}).code, kExitOk);
  const auto v = Exec({"--version"});
  EXPECT_EQ(v.code, kExitOk);
  EXPECT_NE(v.out.find("reclink 0.1.0"), std::string::npos);
  EXPECT_EQ(Exec({}).code, kExitUsage);
  EXPECT_EQ(Exec({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Exec({"block", "--k", "many"}).code, kExitUsage);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(Exec({"-q", "--data", (dir_ / "nothing").string(), "block"}).code, kExitData);
  ASSERT_EQ(Generate(dir_).code, kExitOk);
  const auto r = Exec({"-q", "--data", dir_.string(), "block", "--mode", "fuzzy"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("fuzzy"), std::string::npos);
  std::ofstream(dir_ / "bad.json") << R"({"blocking": {"kk": 3}})";
  EXPECT_EQ(Exec({"-q", "--config", (dir_ / "bad.json").string(), "--data", dir_.string(), "block"}).code,
            kExitData);
}

TEST_F(CliTest, UnreachableEmbeddingNamesBatch) {
  ASSERT_EQ(Generate(dir_).code, kExitOk);
  const auto r = Exec({"-q", "--data", dir_.string(), "block", "--mode", "knn", "--embed-url",
                       "http://127.0.0.1:1/v1/embeddings"});
  EXPECT_EQ(r.code, kExitExternal);
  EXPECT_NE(r.err.find("batch 0"), std::string::npos) << r.err;
}

TEST_F(CliTest, LlmGarbageIsExternalFailureOnlyWhenNothingQueues) {
  ASSERT_EQ(Generate(dir_).code, kExitOk);
  ASSERT_EQ(Exec({"-q", "--data", dir_.string(), "block", "--mode", "rules"}).code, kExitOk);
  reclink::testing::MockEndpoint mock(
      "/v1/chat/completions",
      [](const nlohmann::json&, httplib::Response& res) { reclink::testing::ReplyChat(res, "Maybe"); });
  // Unparseable replies fail open into the human queue.
  const auto r = Exec({"-q", "--data", dir_.string(), "match", "--target", "llm", "--llm-url", mock.url(),
                       "--llm-retries", "0"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_GT(mock.calls(), 0u);
  EXPECT_FALSE(Slurp(dir_ / "queue.jsonl").empty());
}

TEST_F(CliTest, SweepWritesGrid) {
  ASSERT_EQ(Generate(dir_).code, kExitOk);
  const auto r = Exec({"-q", "--data", dir_.string(), "sweep", "--k", "5,10", "--tau", "0.5,0.75"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto grid = Slurp(dir_ / "grid.csv");
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 5);
  EXPECT_TRUE(fs::exists(dir_ / "grid_plot.csv"));
  const auto summary = nlohmann::json::parse(Slurp(dir_ / "sweep.summary.json"));
  EXPECT_EQ(summary["command"], "sweep");
  const auto echo = nlohmann::json::parse(Slurp(dir_ / "sweep.config.json"));
  EXPECT_EQ(echo["sweep"]["k"], (nlohmann::json{5, 10}));
}

TEST_F(CliTest, PipelineIsDeterministic) {
  for (const char* sub : {"one", "two"}) {
    const auto d = dir_ / sub;
    ASSERT_EQ(Generate(d).code, kExitOk);
    ASSERT_EQ(Exec({"-q", "--data", d.string(), "block"}).code, kExitOk);
    ASSERT_EQ(Exec({"-q", "--data", d.string(), "score"}).code, kExitOk);
    ASSERT_EQ(Exec({"-q", "--data", d.string(), "match"}).code, kExitOk);
    const auto e = Exec({"-q", "--data", d.string(), "eval"});
    ASSERT_EQ(e.code, kExitOk) << e.err;
    const auto report = nlohmann::json::parse(e.out);
    EXPECT_TRUE(report.contains("blocking"));
    EXPECT_TRUE(report.contains("matching"));
  }
  for (const char* f : {"A.csv", "B.csv", "truth.csv", "pairs.csv", "scores.csv", "decisions.csv", "queue.jsonl"}) {
    EXPECT_EQ(Slurp(dir_ / "one" / f), Slurp(dir_ / "two" / f)) << f;
  }
}

}  // namespace
}  // namespace reclink::cli
