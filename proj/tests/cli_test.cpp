// Copyright 2026 The chaptereval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "chaptereval/cli.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace chaptereval::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kData = CHAPTEREVAL_TEST_DATA;
const fs::path kGolden = kData / "golden";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("chaptereval_cli_") + info->name() + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path Tmp(const std::string& name) const { return dir_ / name; }

  EvaluateOptions Golden(const std::string& out, int jobs) const {
    EvaluateOptions o;
    o.pred = kGolden / "pred";
    o.gt = kGolden / "gt";
    o.out = Tmp(out);
    o.jobs = jobs;
    return o;
  }

  fs::path dir_;
};

std::map<std::string, std::string> Snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[e.path().string()] = ReadFile(e.path());
  }
  return files;
}

int RunBinary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CHAPTEREVAL_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, EvaluateMatchesGoldenReport) {
  std::ostringstream err;
  ASSERT_EQ(RunEvaluate(Golden("out", 1), err), kExitOk) << err.str();
  EXPECT_EQ(ReadFile(Tmp("out/report.json")), ReadFile(kGolden / "report.json"));
  EXPECT_EQ(ReadFile(Tmp("out/report.md")), ReadFile(kGolden / "report.md"));
}

TEST_F(CliTest, EvaluateIsDeterministicAcrossRunsAndJobs) {
  const auto before = Snapshot(kGolden);
  std::ostringstream err;
  ASSERT_EQ(RunEvaluate(Golden("a", 1), err), kExitOk);
  ASSERT_EQ(RunEvaluate(Golden("b", 1), err), kExitOk);
  ASSERT_EQ(RunEvaluate(Golden("c", 4), err), kExitOk);
  const std::string a = ReadFile(Tmp("a/report.json"));
  EXPECT_EQ(a, ReadFile(Tmp("b/report.json")));
  EXPECT_EQ(a, ReadFile(Tmp("c/report.json")));
  EXPECT_EQ(ReadFile(Tmp("a/report.md")), ReadFile(Tmp("c/report.md")));
  EXPECT_EQ(Snapshot(kGolden), before);
}

TEST_F(CliTest, ManifestContents) {
  std::ostringstream err;
  ASSERT_EQ(RunEvaluate(Golden("out", 2), err), kExitOk);
  const auto m = nlohmann::json::parse(ReadFile(Tmp("out/manifest.json")));
  EXPECT_EQ(m["tool"], "chaptereval");
  EXPECT_EQ(m["version"], std::string(kToolVersion));
  EXPECT_EQ(m["config_hash"].get<std::string>().rfind("sha256:", 0), 0u);
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 7u + 64u);
  EXPECT_EQ(m["inputs"].size(), 6u);
  const std::string gt_file = (kGolden / "gt" / "travel_vlog.json").string();
  bool found = false;
  for (const auto& in : m["inputs"]) {
    if (in["path"] == gt_file) {
      found = true;
      EXPECT_EQ(in["sha256"], Sha256Hex(ReadFile(gt_file)));
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(m["jobs"], 2);
  EXPECT_EQ(m["complete"], true);
  EXPECT_TRUE(m["errors"].empty());
  EXPECT_TRUE(m["started_at"].is_string());
  EXPECT_GE(m["wall_clock_s"].get<double>(), 0.0);
}

TEST_F(CliTest, PredictionEqualToGroundTruthScoresMaximum) {
  EvaluateOptions o = Golden("out", 2);
  o.pred = kGolden / "gt";
  std::ostringstream err;
  ASSERT_EQ(RunEvaluate(o, err), kExitOk);
  const auto r = nlohmann::json::parse(ReadFile(Tmp("out/report.json")));
  const auto& all = r["buckets"]["all"];
  EXPECT_EQ(all["count"], 3);
  for (const char* k : {"f1", "tiou", "soda", "grace"}) {
    EXPECT_DOUBLE_EQ(all[k].get<double>(), 100.0) << k;
  }
  EXPECT_NEAR(all["cider"].get<double>(), 10.0, 1e-9);
  EXPECT_DOUBLE_EQ(all["reward_norm"].get<double>(), 1.0);
}

TEST_F(CliTest, MissingAndMalformedPredictionsArePartial) {
  fs::create_directories(Tmp("pred"));
  fs::copy_file(kGolden / "pred" / "travel_vlog.json", Tmp("pred/travel_vlog.json"));
  WriteFile(Tmp("pred/lecture_graphs.json"), "{\"video_id\": ");
  EvaluateOptions o = Golden("out", 2);
  o.pred = Tmp("pred");
  std::ostringstream err;
  EXPECT_EQ(RunEvaluate(o, err), kExitPartial);
  const auto m = nlohmann::json::parse(ReadFile(Tmp("out/manifest.json")));
  ASSERT_EQ(m["errors"].size(), 2u);
  EXPECT_EQ(m["errors"][0]["video_id"], "cooking_basics");
  EXPECT_NE(m["errors"][0]["error"].get<std::string>().find("missing"),
            std::string::npos);
  EXPECT_EQ(m["errors"][1]["video_id"], "lecture_graphs");
  EXPECT_EQ(m["complete"], true);
  const auto r = nlohmann::json::parse(ReadFile(Tmp("out/report.json")));
  EXPECT_EQ(r["videos"][0]["grace"], 0.0);
  EXPECT_EQ(r["videos"][2]["grace"],
            nlohmann::json::parse(ReadFile(kGolden / "report.json"))["videos"][2]
                                 ["grace"]);
}

TEST_F(CliTest, ConfigErrorsAreFatal) {
  std::ostringstream err;
  EvaluateOptions o = Golden("out", 1);
  o.sim = "external";
  EXPECT_EQ(RunEvaluate(o, err), kExitFatal);
  EXPECT_FALSE(fs::exists(Tmp("out/report.json")));

  WriteFile(Tmp("bad.json"), R"({"similarity": "lexical", "colour": 1})");
  o = Golden("out", 1);
  o.config = Tmp("bad.json");
  EXPECT_EQ(RunEvaluate(o, err), kExitFatal);
  EXPECT_NE(err.str().find("colour"), std::string::npos);

  WriteFile(Tmp("thr.json"), R"({"f1_thresholds": [0.9, 0.5]})");
  o.config = Tmp("thr.json");
  EXPECT_EQ(RunEvaluate(o, err), kExitFatal);

  o = Golden("out", 0);
  EXPECT_EQ(RunEvaluate(o, err), kExitFatal);
  o = Golden("out", 1);
  o.buckets_json =
      R"([{"label": "short", "min_s": 0, "max_s": 500},
          {"label": "long", "min_s": 700, "max_s": 3600}])";
  EXPECT_EQ(RunEvaluate(o, err), kExitFatal);
  EXPECT_TRUE(fs::exists(Tmp("out/report.json")));
  EXPECT_EQ(nlohmann::json::parse(ReadFile(Tmp("out/report.json")))["complete"],
            false);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  WriteFile(Tmp("cfg.json"),
            R"({"grace_normalization": "gt_count", "f1_thresholds": [0.5],
                "jobs": 3})");
  EvaluateOptions o = Golden("out", 1);
  o.config = Tmp("cfg.json");
  std::ostringstream err;
  ASSERT_EQ(RunEvaluate(o, err), kExitOk) << err.str();
  const auto r = nlohmann::json::parse(ReadFile(Tmp("out/report.json")));
  EXPECT_EQ(r["config"]["grace_normalization"], "gt_count");
  EXPECT_EQ(r["config"]["f1_thresholds"].size(), 1u);
  EXPECT_EQ(nlohmann::json::parse(ReadFile(Tmp("out/manifest.json")))["jobs"], 1);
}

TEST_F(CliTest, ExternalScorerFailureWritesPartialReport) {
  EvaluateOptions o = Golden("out", 1);
  o.sim = "external";
  o.scorer_cmd = {CHAPTEREVAL_SIDECAR_PATH, "--exit-after-handshake"};
  std::ostringstream err;
  EXPECT_EQ(RunEvaluate(o, err), kExitFatal);
  const auto r = nlohmann::json::parse(ReadFile(Tmp("out/report.json")));
  EXPECT_EQ(r["complete"], false);
  const auto m = nlohmann::json::parse(ReadFile(Tmp("out/manifest.json")));
  EXPECT_EQ(m["complete"], false);
  EXPECT_TRUE(m.contains("fatal_error"));
  EXPECT_NE(ReadFile(Tmp("out/report.md")).find("Incomplete"), std::string::npos);
}

TEST_F(CliTest, ExternalLexicalSidecarMatchesBuiltin) {
  EvaluateOptions o = Golden("out", 2);
  o.sim = "external";
  o.scorer_cmd = {CHAPTEREVAL_SIDECAR_PATH};
  std::ostringstream err;
  ASSERT_EQ(RunEvaluate(o, err), kExitOk) << err.str();
  const auto ext = nlohmann::json::parse(ReadFile(Tmp("out/report.json")));
  const auto lex = nlohmann::json::parse(ReadFile(kGolden / "report.json"));
  EXPECT_EQ(ext["config"]["similarity"], "external");
  for (const char* k : {"grace", "soda", "f1", "cider"}) {
    EXPECT_NEAR(ext["buckets"]["all"][k].get<double>(),
                lex["buckets"]["all"][k].get<double>(), 1e-9)
        << k;
  }
}

TEST_F(CliTest, RewardLines) {
  std::ostringstream out, err;
  ASSERT_EQ(RunReward(kGolden / "pred", kGolden / "gt", out, err), kExitOk);
  std::istringstream lines(out.str());
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(lines, line)) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0]["video_id"], "cooking_basics");
  EXPECT_DOUBLE_EQ(rows[0]["raw"].get<double>(), 2.5);
  EXPECT_DOUBLE_EQ(rows[0]["normalized"].get<double>(), 2.5 / 3.0);

  std::ostringstream single;
  ASSERT_EQ(RunReward(kGolden / "gt" / "travel_vlog.json",
                      kGolden / "gt" / "travel_vlog.json", single, err),
            kExitOk);
  EXPECT_EQ(single.str(),
            "{\"video_id\":\"travel_vlog\",\"raw\":4.0,\"normalized\":1.0}\n");

  fs::create_directories(Tmp("pred"));
  fs::copy_file(kGolden / "pred" / "travel_vlog.json", Tmp("pred/travel_vlog.json"));
  std::ostringstream partial;
  EXPECT_EQ(RunReward(Tmp("pred"), kGolden / "gt", partial, err), kExitPartial);
  const std::string lines_out = partial.str();
  EXPECT_EQ(std::count(lines_out.begin(), lines_out.end(), '\n'), 1);
}

TEST_F(CliTest, PerturbSplitIsSeeded) {
  std::ostringstream err;
  ASSERT_EQ(RunPerturb(kGolden / "gt", "split", 7, Tmp("a"), err), kExitOk)
      << err.str();
  ASSERT_EQ(RunPerturb(kGolden / "gt", "split", 7, Tmp("b"), err), kExitOk);
  EXPECT_EQ(Snapshot(Tmp("a")).size(), 3u);
  const ChapterTimeline a = parse_canonical(ReadFile(Tmp("a/travel_vlog.json")));
  const ChapterTimeline b = parse_canonical(ReadFile(Tmp("b/travel_vlog.json")));
  EXPECT_EQ(a.size(), 8u);
  EXPECT_EQ(serialize_canonical(a), serialize_canonical(b));
  ASSERT_EQ(RunPerturb(kGolden / "gt", "split", 8, Tmp("c"), err), kExitOk);
  EXPECT_NE(ReadFile(Tmp("a/travel_vlog.json")), ReadFile(Tmp("c/travel_vlog.json")));

  ASSERT_EQ(RunPerturb(Tmp("a/travel_vlog.json"), "merge", 0, Tmp("m.json"), err),
            kExitOk);
  EXPECT_EQ(ReadFile(Tmp("m.json")),
            serialize_canonical(
                parse_canonical(ReadFile(kGolden / "gt" / "travel_vlog.json"))));
}

TEST_F(CliTest, PerturbErrors) {
  WriteFile(Tmp("one.json"),
            serialize_canonical(ChapterTimeline(
                "one", {Chapter(0.0, 10.0, "only chapter")}, std::nullopt)));
  std::ostringstream err;
  EXPECT_EQ(RunPerturb(Tmp("one.json"), "merge", 0, Tmp("o.json"), err),
            kExitFatal);
  EXPECT_EQ(RunPerturb(Tmp("one.json"), "shuffle", 0, Tmp("o.json"), err),
            kExitFatal);
  EXPECT_FALSE(fs::exists(Tmp("o.json")));
}

TEST_F(CliTest, TranscriptInterleaves) {
  WriteFile(Tmp("asr.srt"),
            "1\n00:00:01,500 --> 00:00:04,000\nhello there\n\n"
            "2\n00:01:30,000 --> 00:01:32,000\nnext topic\n");
  WriteFile(Tmp("vis.json"),
            R"({"video_id": "v", "segments": [
                 {"start_s": 90, "text": "chart on screen", "source": "visual"}]})");
  std::ostringstream out, err;
  ASSERT_EQ(RunTranscript(Tmp("asr.srt"), Tmp("vis.json"), "", out, err), kExitOk)
      << err.str();
  EXPECT_EQ(out.str(),
            "00:00:01: hello there\n00:01:30: next topic\n"
            "00:01:30: [VIS] chart on screen\n");
  EXPECT_EQ(RunTranscript(Tmp("missing.srt"), std::nullopt, "", out, err),
            kExitFatal);
}

TEST_F(CliTest, ConvertChapterList) {
  WriteFile(Tmp("talk.txt"), "0:00 Intro\n1:30 Main part\n4:00 Wrap up\n");
  std::ostringstream out, err;
  ASSERT_EQ(RunConvert(Tmp("talk.txt"), "list", "json", 300.0, "", out, err),
            kExitOk)
      << err.str();
  const ChapterTimeline t = parse_canonical(out.str());
  EXPECT_EQ(t.video_id(), "talk");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[2].end(), 300.0);
  EXPECT_EQ(t[1].short_title, "Main part");

  WriteFile(Tmp("talk.json"), out.str());
  std::ostringstream again;
  ASSERT_EQ(RunConvert(Tmp("talk.json"), "json", "json", std::nullopt, "", again,
                       err),
            kExitOk);
  EXPECT_EQ(again.str(), out.str());

  std::ostringstream list;
  ASSERT_EQ(RunConvert(Tmp("talk.json"), "json", "list", std::nullopt, "-", list,
                       err),
            kExitOk);
  EXPECT_EQ(list.str(), "00:00:00 Intro\n00:01:30 Main part\n00:04:00 Wrap up\n");
}

TEST_F(CliTest, ConvertRejectsUnknownFormats) {
  WriteFile(Tmp("x.json"), "{}");
  std::ostringstream out, err;
  EXPECT_EQ(RunConvert(Tmp("x.json"), "json", "yaml", std::nullopt, "", out, err),
            kExitFatal);
  EXPECT_NE(err.str().find("usage:"), std::string::npos);
  EXPECT_EQ(RunConvert(Tmp("x.json"), "list", "asr-lines", std::nullopt, "", out,
                       err),
            kExitFatal);
  EXPECT_TRUE(out.str().empty());
}

TEST_F(CliTest, ConvertTranscriptToLines) {
  WriteFile(Tmp("a.vtt"), "WEBVTT\n\n00:00:05.000 --> 00:00:07.000\nhi all\n");
  std::ostringstream out, err;
  ASSERT_EQ(RunConvert(Tmp("a.vtt"), "vtt-transcript", "asr-lines", std::nullopt,
                       "", out, err),
            kExitOk)
      << err.str();
  EXPECT_EQ(out.str(), "00:00:05: hi all\n");
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string golden = "--pred " + (kGolden / "pred").string() + " --gt " +
                             (kGolden / "gt").string();
  EXPECT_EQ(RunBinary("evaluate " + golden + " --out " + Tmp("o1").string() +
                          " --jobs 1",
                      Tmp("log1")),
            0)
      << ReadFile(Tmp("log1"));
  EXPECT_EQ(RunBinary("evaluate " + golden + " --out " + Tmp("o2").string() +
                          " --jobs 3",
                      Tmp("log2")),
            0);
  EXPECT_EQ(ReadFile(Tmp("o1/report.json")), ReadFile(Tmp("o2/report.json")));
  EXPECT_EQ(ReadFile(Tmp("o1/report.json")), ReadFile(kGolden / "report.json"));

  EXPECT_EQ(RunBinary("evaluate " + golden + " --out " + Tmp("o3").string() +
                          " --sim nonsense",
                      Tmp("log3")),
            1);
  EXPECT_EQ(RunBinary("convert --in x --from json --to yaml", Tmp("log4")), 1);
  EXPECT_NE(ReadFile(Tmp("log4")).find("usage:"), std::string::npos);
  EXPECT_EQ(RunBinary("reward --pred " + (kGolden / "pred").string() + " --gt " +
                          (kGolden / "gt").string(),
                      Tmp("log5")),
            0);
  EXPECT_EQ(RunBinary("--version", Tmp("log6")), 0);
  EXPECT_NE(ReadFile(Tmp("log6")).find(kToolVersion), std::string::npos);
}

}  // namespace
}  // namespace chaptereval::cli
