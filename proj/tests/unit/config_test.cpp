#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "reclink/config.hpp"
#include "reclink/error.hpp"

namespace reclink {
namespace {

using nlohmann::json;

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig c;
  const json echo = c.ToJson();
  EXPECT_EQ(RunConfig::FromJson(echo).ToJson(), echo);
  EXPECT_EQ(RunConfig::FromJson(json::object()).ToJson(), echo);
}

TEST(RunConfig, OverridesAndEcho) {
  const json in = {{"seed", 7},
                   {"blocking", {{"mode", "knn"}, {"k", 20}, {"tau", 0.6}}},
                   {"matching", {{"escalation_target", "llm"}}},
                   {"llm", {{"url", "http://127.0.0.1:9/v1/chat/completions"}, {"system_prompt", nullptr}}},
                   {"paths", {{"data_dir", "data"}}},
                   {"sweep", {{"k", {5, 10}}, {"tau", {0.5, 0.75}}}}};
  const RunConfig c = RunConfig::FromJson(in);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.corpus.seed, 7u);
  EXPECT_EQ(c.blocking_mode, BlockingMode::Knn);
  EXPECT_EQ(c.knn.k, 20u);
  ASSERT_TRUE(c.llm.has_value());
  EXPECT_FALSE(c.llm->system_prompt.has_value());
  EXPECT_EQ(c.sweep_k.size(), 2u);
  EXPECT_EQ(RunConfig::FromJson(c.ToJson()).ToJson(), c.ToJson());
}

TEST(RunConfig, UnknownKeysRejectedAtEveryLevel) {
  EXPECT_THROW(RunConfig::FromJson({{"sed", 1}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"blocking", {{"kk", 1}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"blocking", {{"band", {{"middle", 0.5}}}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"corpus", {{"persons", 1}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"review", {{"prt", 1}}}}), ConfigError);
}

TEST(RunConfig, ValidationErrors) {
  EXPECT_THROW(RunConfig::FromJson({{"blocking", {{"mode", "fuzzy"}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"blocking", {{"k", 0}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"blocking", {{"tau", 1.5}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"blocking", {{"rules", json::array()}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"blocking", {{"rules", {"exact_shoe"}}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"matching", {{"escalation_target", "llm"}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"embedding", {{"provider", "magic"}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"embedding", {{"dim", 4}}}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson({{"seed", "seven"}}), ConfigError);
  EXPECT_THROW(RunConfig::FromJson(json::array()), ConfigError);
}

}  // namespace
}  // namespace reclink
