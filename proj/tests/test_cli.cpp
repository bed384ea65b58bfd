#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "ecpo/json_io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using ecpo::io::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ecpo::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ecpo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
    const auto prompt = json::parse(testutil::fixture("cabin_band_prompt.json"));
    write("prompts.jsonl", prompt.dump() + "\n");
    const auto p23 = json::parse(testutil::fixture("cabin_band_policy_23c.json"));
    const auto p26 = json::parse(testutil::fixture("cabin_band_policy_26c.json"));
    write("policies.jsonl", json{{"prompt_id", "cabin-band"}, {"candidate_id", "a"}, {"document", p23}}.dump() + "\n" +
                                json{{"prompt_id", "cabin-band"}, {"candidate_id", "b"}, {"document", p26}}.dump() + "\n");
    write("candidates.jsonl",
          json{{"prompt_id", "cabin-band"},
               {"candidates", {{{"candidate_id", "a"}, {"document", p23}, {"log_score", -1.0}},
                               {{"candidate_id", "b"}, {"document", p26}, {"log_score", -2.0}}}}}
                  .dump() +
              "\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& body) {
    std::ofstream f(dir_ / name, std::ios::binary);
    f << body;
    return path(name);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ValidateEmitsOneReportPerPolicy) {
  const auto r = run({"validate", "--prompts", path("prompts.jsonl"), "--policies", path("policies.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string a, b;
  std::getline(lines, a);
  std::getline(lines, b);
  const auto ja = json::parse(a), jb = json::parse(b);
  EXPECT_EQ(ja["candidate_id"], "a");
  EXPECT_DOUBLE_EQ(ja["report"]["ecpo"].get<double>(), 1.0);
  EXPECT_EQ(jb["report"]["severity"], 2);
  EXPECT_NE(r.err.find("Valid% 100.00"), std::string::npos);
}

TEST_F(Cli, ValidateIsByteDeterministic) {
  const std::vector<std::string> args{"validate", "--prompts", path("prompts.jsonl"), "--policies", path("policies.jsonl")};
  EXPECT_EQ(run(args).out, run(args).out);
}

TEST_F(Cli, OutFlagWritesFile) {
  const auto r = run({"--out", path("o.jsonl"), "validate", "--prompts", path("prompts.jsonl"), "--policies",
                      path("policies.jsonl")});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(testutil::read_file(path("o.jsonl")).empty());
}

TEST_F(Cli, PairsChoosesHigherEcpo) {
  write("cfg.json", R"({"beta": 0.5, "lambda_ecpo": 1.0})");
  const auto r = run({"--config", path("cfg.json"), "pairs", "--prompts", path("prompts.jsonl"), "--candidates",
                      path("candidates.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(j["chosen_id"], "a");
  EXPECT_EQ(j["rejected_id"], "b");
  EXPECT_NE(r.err.find("l_ecpo"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({"validate", "--prompts", path("missing.jsonl"), "--policies", path("policies.jsonl")}).code, 1);
  write("bad.jsonl", "{not json\n");
  EXPECT_EQ(run({"validate", "--prompts", path("bad.jsonl"), "--policies", path("policies.jsonl")}).code, 1);
  EXPECT_EQ(run({"--weights", "0.9,0.9,0.9", "validate", "--prompts", path("prompts.jsonl"), "--policies",
                 path("policies.jsonl")}).code, 2);
  write("cfg.json", R"({"nope": true})");
  EXPECT_EQ(run({"--config", path("cfg.json"), "validate", "--prompts", path("prompts.jsonl"), "--policies",
                 path("policies.jsonl")}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
  write("empty.jsonl", "");
  EXPECT_EQ(run({"retrieve", "--store", path("empty.jsonl"), "--prompts", path("prompts.jsonl")}).code, 1);
}

TEST_F(Cli, EvalStrategyEmptyInputIsNA) {
  write("empty.jsonl", "");
  const auto r = run({"eval", "--kind", "strategy", "--records", path("empty.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["report"]["metrics"]["valid_pct"].is_null());
  EXPECT_EQ(j["report"]["na_reasons"]["valid_pct"], "NO_SAMPLES");
}

TEST_F(Cli, EvalTextAndTable) {
  write("text.jsonl", R"({"reference":"a b c d","hypothesis":"a c d e"})" "\n");
  const auto r = run({"eval", "--kind", "text", "--records", path("text.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["report"]["metrics"]["rouge_l"].get<double>(), 75.0, 1e-9);
  const auto t = run({"eval", "--kind", "text", "--records", path("text.jsonl"), "--table"});
  EXPECT_NE(t.out.find("rouge_l"), std::string::npos);
}

TEST_F(Cli, RetrieveHonoursTopK) {
  const auto prompt = json::parse(testutil::fixture("cabin_band_prompt.json"));
  std::string store;
  for (const auto& s : prompt["constraints"]) store += s.dump() + "\n";
  write("store.jsonl", store);
  const auto r = run({"--top-k", "1", "retrieve", "--store", path("store.jsonl"), "--prompts", path("prompts.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["retrieval"]["ranked"].size(), 1u);
  EXPECT_EQ(j["retrieval"]["store_version"], 1);
}

TEST_F(Cli, MixpairAndStratify) {
  write("in.jsonl", R"({"sample_id":"i1","split":"train","ground_truth_labels":{"emotion":["anger"],"behavior":["normal driving"]}})"
                    "\n");
  write("out.jsonl",
        R"({"sample_id":"o1","split":"train","ground_truth_labels":{"traffic_scene":["smooth traffic"],"vehicle_motion":["forward moving"]}})"
        "\n");
  const auto m = run({"--seed", "7", "mixpair", "--in-cabin", path("in.jsonl"), "--out-of-vehicle", path("out.jsonl")});
  ASSERT_EQ(m.code, 0) << m.err;
  const auto pair = json::parse(m.out);
  EXPECT_EQ(pair["out_ids"], json::array({"o1"}));
  write("records.jsonl", pair["record"].dump() + "\n");
  const auto s = run({"stratify", "--records", path("records.jsonl")});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(json::parse(s.out)["group"], "driver_critical");
  write("nohead.jsonl", R"({"prompt_id":"x","ground_truth_labels":{"emotion":["neutral"]}})" "\n");
  EXPECT_EQ(run({"stratify", "--records", path("nohead.jsonl")}).code, 1);
}
