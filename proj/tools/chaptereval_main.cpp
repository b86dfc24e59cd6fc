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


// chaptereval: batch evaluation, reward, perturbation and format conversion
// for video chapter annotations.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chaptereval/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = chaptereval::cli;
  CLI::App app{"Granularity-robust evaluation toolkit for video chaptering"};
  app.set_version_flag("--version", std::string(cli::kToolVersion));
  app.require_subcommand(1);

  cli::EvaluateOptions eval;
  std::string eval_pred, eval_gt, eval_config, eval_out, eval_sim, eval_buckets,
      eval_field;
  int eval_jobs = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--pred", eval_pred, "Prediction file or directory")->required();
  evaluate->add_option("--gt", eval_gt, "Ground-truth file or directory")->required();
  evaluate->add_option("--config", eval_config, "JSON config file");
  evaluate->add_option("--out", eval_out, "Output directory")->required();
  evaluate->add_option("--sim", eval_sim, "Similarity backend")
      ->check(CLI::IsMember({"lexical", "external"}));
  evaluate->add_option("--scorer-cmd", eval.scorer_cmd,
                       "Sidecar argv for --sim external")
      ->expected(1, -1);
  evaluate->add_option("--buckets", eval_buckets, "Duration buckets as JSON");
  evaluate->add_option("--field", eval_field, "Text field to compare")
      ->check(CLI::IsMember({"short_title", "title", "abstract", "introduction"}));
  evaluate->add_option("--jobs", eval_jobs, "Worker threads")
      ->check(CLI::PositiveNumber);

  std::string reward_pred, reward_gt;
  auto* reward = app.add_subcommand("reward", "Print the temporal reward per video");
  reward->add_option("--pred", reward_pred)->required();
  reward->add_option("--gt", reward_gt)->required();

  std::string perturb_gt, perturb_mode, perturb_out;
  std::uint64_t perturb_seed = 0;
  auto* perturb = app.add_subcommand("perturb", "Split or merge ground-truth chapters");
  perturb->add_option("--gt", perturb_gt)->required();
  perturb->add_option("--mode", perturb_mode)->required();
  perturb->add_option("--seed", perturb_seed);
  perturb->add_option("--out", perturb_out)->required();

  std::string tr_asr, tr_visual, tr_out;
  auto* transcript = app.add_subcommand("transcript", "Interleave and render transcripts");
  transcript->add_option("--asr", tr_asr, "ASR transcript (.vtt, .srt or .json)")->required();
  transcript->add_option("--visual", tr_visual, "Visual captions (transcript JSON)");
  transcript->add_option("--out", tr_out, "Output file (default stdout)");

  std::string cv_in, cv_from, cv_to, cv_out;
  std::optional<double> cv_duration;
  auto* convert = app.add_subcommand("convert", "Convert between formats");
  convert->add_option("--in", cv_in)->required();
  convert->add_option("--from", cv_from)->required();
  convert->add_option("--to", cv_to)->required();
  convert->add_option("--duration", cv_duration, "Video duration in seconds");
  convert->add_option("--out", cv_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitFatal;
  }

  if (*evaluate) {
    eval.pred = eval_pred;
    eval.gt = eval_gt;
    eval.out = eval_out;
    if (!eval_config.empty()) eval.config = eval_config;
    if (!eval_sim.empty()) eval.sim = eval_sim;
    if (!eval_buckets.empty()) eval.buckets_json = eval_buckets;
    if (!eval_field.empty()) eval.field = eval_field;
    if (eval_jobs > 0) eval.jobs = eval_jobs;
    return cli::RunEvaluate(eval, std::cerr);
  }
  if (*reward) return cli::RunReward(reward_pred, reward_gt, std::cout, std::cerr);
  if (*perturb) {
    return cli::RunPerturb(perturb_gt, perturb_mode, perturb_seed, perturb_out,
                           std::cerr);
  }
  if (*transcript) {
    std::optional<std::filesystem::path> visual;
    if (!tr_visual.empty()) visual = tr_visual;
    return cli::RunTranscript(tr_asr, visual, tr_out, std::cout, std::cerr);
  }
  return cli::RunConvert(cv_in, cv_from, cv_to, cv_duration, cv_out, std::cout,
                         std::cerr);
}
