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

// Reported chaptering metrics: GRACE, SODA, segmentation F1/tIoU, chapter
// CIDEr, the temporal RL reward, and duration-bucketed aggregation.

#ifndef CHAPTEREVAL_METRICS_HPP_
#define CHAPTEREVAL_METRICS_HPP_

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaptereval/alignment.hpp"
#include "chaptereval/chapter.hpp"
#include "chaptereval/errors.hpp"
#include "chaptereval/textsim.hpp"

namespace chaptereval {

enum class GraceNormalization { kPerGroupMean, kGtCount, kNone };

inline std::string_view GraceNormalizationName(GraceNormalization n) {
  switch (n) {
    case GraceNormalization::kPerGroupMean:
      return "per_group_mean";
    case GraceNormalization::kGtCount:
      return "gt_count";
    case GraceNormalization::kNone:
      return "none";
  }
  return "per_group_mean";
}

inline std::optional<GraceNormalization> ParseGraceNormalization(
    std::string_view name) {
  for (auto n : {GraceNormalization::kPerGroupMean, GraceNormalization::kGtCount,
                 GraceNormalization::kNone}) {
    if (GraceNormalizationName(n) == name) return n;
  }
  return std::nullopt;
}

// 0.50, 0.55, ..., 0.95.
inline std::vector<double> DefaultF1Thresholds() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back((50.0 + 5.0 * k) / 100.0);
  return t;
}

// IoU values within this distance below a threshold still count as meeting
// it, so that rounding in shifted or rescaled timelines cannot flip a match.
inline constexpr double kThresholdSlack = 1e-9;

struct MetricConfig {
  std::shared_ptr<SimilarityScorer> similarity =
      std::make_shared<LexicalScorer>();
  TextField text_field = TextField::kShortTitle;
  GraceNormalization grace_normalization = GraceNormalization::kPerGroupMean;
  std::vector<double> f1_thresholds = DefaultF1Thresholds();
  std::vector<DurationBucket> buckets = DefaultBuckets();

  void Validate() const {
    if (!similarity) throw ConfigError("no similarity scorer configured");
    if (f1_thresholds.empty()) throw ConfigError("f1_thresholds is empty");
    for (std::size_t k = 0; k < f1_thresholds.size(); ++k) {
      const double t = f1_thresholds[k];
      if (!(t > 0.0 && t <= 1.0)) {
        throw ConfigError("f1 thresholds must lie in (0, 1]");
      }
      if (k > 0 && !(f1_thresholds[k - 1] < t)) {
        throw ConfigError("f1 thresholds must be strictly increasing");
      }
    }
    ValidateBuckets(buckets);
  }
};

// ---------------------------------------------------------------------------
// GRACE

struct GraceResult {
  double raw = 0.0;         // sum over groups of phi x similarity
  double normalized = 0.0;  // reported value
  GroupMatching matching;
  std::vector<double> similarities;  // one per group
};

inline GraceResult grace(const ChapterTimeline& preds,
                         const ChapterTimeline& gts, const MetricConfig& cfg) {
  GraceResult r;
  r.matching = match_groups(preds, gts);
  std::vector<ScoreRequest> requests;
  requests.reserve(r.matching.groups.size());
  for (std::size_t k = 0; k < r.matching.groups.size(); ++k) {
    const GroupPair& g = r.matching.groups[k];
    requests.push_back(
        {"g" + std::to_string(k),
         concat_group_text(preds.chapters().subspan(g.pred.begin, g.pred.size()),
                           cfg.text_field, g.pred.begin),
         concat_group_text(gts.chapters().subspan(g.gt.begin, g.gt.size()),
                           cfg.text_field, g.gt.begin)});
  }
  const auto responses = score_batch(*cfg.similarity, requests);
  for (std::size_t k = 0; k < responses.size(); ++k) {
    r.similarities.push_back(responses[k].score);
    r.raw += r.matching.groups[k].phi * responses[k].score;
  }
  switch (cfg.grace_normalization) {
    case GraceNormalization::kPerGroupMean:
      r.normalized =
          100.0 * r.raw / static_cast<double>(r.matching.groups.size());
      break;
    case GraceNormalization::kGtCount:
      r.normalized = 100.0 * r.raw / static_cast<double>(gts.size());
      break;
    case GraceNormalization::kNone:
      r.normalized = r.raw;
      break;
  }
  return r;
}

// ---------------------------------------------------------------------------
// SODA

struct SodaResult {
  double total = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double score = 0.0;  // 100 x harmonic mean
  OneToOneMatching matching;
};

inline double HarmonicMean(double a, double b) {
  return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
}

// One-to-one order-preserving matching with pair score IoU x similarity.
// Similarity is only requested for temporally overlapping pairs; all other
// pair scores are zero.
inline SodaResult soda(const ChapterTimeline& preds, const ChapterTimeline& gts,
                       const MetricConfig& cfg) {
  const std::size_t n = preds.size();
  const std::size_t m = gts.size();
  std::vector<double> overlap(n * m, 0.0);
  std::vector<ScoreRequest> requests;
  std::vector<std::size_t> request_cell;
  std::vector<std::optional<std::string>> pred_text(n);
  std::vector<std::optional<std::string>> gt_text(m);
  const auto text_of = [&](const ChapterTimeline& t, std::size_t k,
                           std::vector<std::optional<std::string>>& cache)
      -> const std::string& {
    if (!cache[k]) {
      cache[k] = concat_group_text(t.chapters().subspan(k, 1), cfg.text_field, k);
    }
    return *cache[k];
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double v = iou(preds[i], gts[j]);
      overlap[i * m + j] = v;
      if (v > 0.0) {
        requests.push_back({std::to_string(i) + ":" + std::to_string(j),
                            text_of(preds, i, pred_text),
                            text_of(gts, j, gt_text)});
        request_cell.push_back(i * m + j);
      }
    }
  }
  std::vector<double> cell(n * m, 0.0);
  const auto responses = score_batch(*cfg.similarity, requests);
  for (std::size_t k = 0; k < responses.size(); ++k) {
    cell[request_cell[k]] = overlap[request_cell[k]] * responses[k].score;
  }
  SodaResult r;
  r.matching = match_one_to_one_grid(
      n, m, [&](std::size_t i, std::size_t j) { return cell[i * m + j]; });
  r.total = r.matching.total;
  r.precision = r.total / static_cast<double>(n);
  r.recall = r.total / static_cast<double>(m);
  r.score = r.total > 0.0 ? 100.0 * HarmonicMean(r.precision, r.recall) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Segmentation

struct SegmentationScores {
  double f1 = 0.0;         // 100 x mean F1 over thresholds
  double tiou = 0.0;       // 100 x symmetric mean best IoU
  double precision = 0.0;  // 100 x precision at IoU 0.5
  double recall = 0.0;     // 100 x recall at IoU 0.5
};

namespace metrics_internal {

// Number of pairs in the largest order-preserving one-to-one matching whose
// IoU reaches `threshold`.
inline std::size_t MatchedAt(const std::vector<double>& ious, std::size_t n,
                             std::size_t m, double threshold) {
  return match_one_to_one_grid(n, m, [&](std::size_t i, std::size_t j) {
           return ious[i * m + j] >= threshold - kThresholdSlack ? 1.0 : 0.0;
         })
      .pairs.size();
}

}  // namespace metrics_internal

inline SegmentationScores segmentation_scores(const ChapterTimeline& preds,
                                              const ChapterTimeline& gts,
                                              const MetricConfig& cfg) {
  const std::size_t n = preds.size();
  const std::size_t m = gts.size();
  std::vector<double> ious(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) ious[i * m + j] = iou(preds[i], gts[j]);
  }
  const auto prf = [&](double t) {
    const auto matched =
        static_cast<double>(metrics_internal::MatchedAt(ious, n, m, t));
    const double p = matched / static_cast<double>(n);
    const double r = matched / static_cast<double>(m);
    return std::array<double, 3>{p, r, HarmonicMean(p, r)};
  };
  SegmentationScores s;
  double f1_sum = 0.0;
  for (double t : cfg.f1_thresholds) f1_sum += prf(t)[2];
  s.f1 = 100.0 * f1_sum / static_cast<double>(cfg.f1_thresholds.size());
  const auto at_half = prf(0.5);
  s.precision = 100.0 * at_half[0];
  s.recall = 100.0 * at_half[1];

  double gt_side = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) best = std::max(best, ious[i * m + j]);
    gt_side += best;
  }
  double pred_side = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < m; ++j) best = std::max(best, ious[i * m + j]);
    pred_side += best;
  }
  s.tiou = 100.0 * 0.5 *
           (gt_side / static_cast<double>(m) + pred_side / static_cast<double>(n));
  return s;
}

// ---------------------------------------------------------------------------
// Chapter-level CIDEr

// (candidate, reference) text pair for every ground-truth chapter; the
// candidate is the highest-IoU predicted chapter, or empty when nothing
// overlaps.
using TextPairs = std::vector<std::pair<std::string, std::string>>;

inline TextPairs chapter_cider_pairs(const ChapterTimeline& preds,
                                     const ChapterTimeline& gts,
                                     TextField field) {
  TextPairs pairs;
  pairs.reserve(gts.size());
  for (std::size_t j = 0; j < gts.size(); ++j) {
    double best = 0.0;
    std::optional<std::size_t> best_i;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const double v = iou(preds[i], gts[j]);
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    std::string candidate;
    if (best_i) {
      candidate = concat_group_text(preds.chapters().subspan(*best_i, 1), field,
                                    *best_i);
    }
    pairs.emplace_back(std::move(candidate),
                       concat_group_text(gts.chapters().subspan(j, 1), field, j));
  }
  return pairs;
}

inline double cider_of_pairs(const TextPairs& pairs) {
  std::vector<std::string> candidates;
  std::vector<std::string> references;
  candidates.reserve(pairs.size());
  references.reserve(pairs.size());
  for (const auto& [c, r] : pairs) {
    candidates.push_back(c);
    references.push_back(r);
  }
  return cider_d(candidates, references);
}

struct VideoPair {
  ChapterTimeline pred;
  ChapterTimeline gt;
};

// Corpus CIDEr-D over every ground-truth chapter of the dataset.
inline double chapter_cider(std::span<const VideoPair> dataset,
                            TextField field) {
  if (dataset.empty()) throw EmptyCorpusError("dataset has no videos");
  TextPairs all;
  for (const VideoPair& v : dataset) {
    auto pairs = chapter_cider_pairs(v.pred, v.gt, field);
    all.insert(all.end(), pairs.begin(), pairs.end());
  }
  return cider_of_pairs(all);
}

// ---------------------------------------------------------------------------
// Temporal reward

struct RewardResult {
  double raw = 0.0;         // sum of phi over the optimal matching
  double normalized = 0.0;  // raw / number of groups
  GroupMatching matching;
};

inline RewardResult grpo_reward(const ChapterTimeline& preds,
                                const ChapterTimeline& gts) {
  RewardResult r;
  r.matching = match_groups(preds, gts);
  r.raw = r.matching.objective;
  r.normalized = r.raw / static_cast<double>(r.matching.groups.size());
  return r;
}

// ---------------------------------------------------------------------------
// Per-video scores and aggregation

struct VideoScores {
  std::string video_id;
  double duration_s = 0.0;
  BucketLabel bucket = BucketLabel::kAll;
  double f1 = 0.0;
  double tiou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double soda = 0.0;
  double cider = 0.0;
  double grace = 0.0;
  double reward_raw = 0.0;
  double reward_norm = 0.0;
  GroupMatching matching;
  TextPairs cider_pairs;  // kept for corpus-level CIDEr per bucket
  std::optional<std::string> error;
};

inline VideoScores evaluate_video(const ChapterTimeline& preds,
                                  const ChapterTimeline& gts,
                                  const MetricConfig& cfg) {
  VideoScores v;
  v.video_id = gts.video_id();
  v.duration_s = gts.effective_duration();
  v.bucket = bucket_of(TimeSec(v.duration_s), cfg.buckets).label;
  const SegmentationScores seg = segmentation_scores(preds, gts, cfg);
  v.f1 = seg.f1;
  v.tiou = seg.tiou;
  v.precision = seg.precision;
  v.recall = seg.recall;
  v.soda = soda(preds, gts, cfg).score;
  v.cider_pairs = chapter_cider_pairs(preds, gts, cfg.text_field);
  v.cider = cider_of_pairs(v.cider_pairs);
  GraceResult g = grace(preds, gts, cfg);
  v.grace = g.normalized;
  v.reward_raw = g.matching.objective;
  v.reward_norm =
      v.reward_raw / static_cast<double>(g.matching.groups.size());
  v.matching = std::move(g.matching);
  return v;
}

// A video that could not be evaluated: every metric is zero and its ground
// truth chapters enter the CIDEr corpus with empty candidates.
inline VideoScores failed_video(const ChapterTimeline& gts,
                                const MetricConfig& cfg, std::string error) {
  VideoScores v;
  v.video_id = gts.video_id();
  v.duration_s = gts.effective_duration();
  v.bucket = bucket_of(TimeSec(v.duration_s), cfg.buckets).label;
  for (std::size_t j = 0; j < gts.size(); ++j) {
    const auto text = gts[j].text(cfg.text_field);
    v.cider_pairs.emplace_back(std::string(),
                               text ? NormalizeText(*text) : std::string());
  }
  v.error = std::move(error);
  return v;
}

struct BucketAggregate {
  BucketLabel label = BucketLabel::kAll;
  std::size_t count = 0;
  // Macro means over member videos; CIDEr is corpus-level over their
  // chapters. All NaN when the bucket is empty.
  double f1 = std::numeric_limits<double>::quiet_NaN();
  double tiou = std::numeric_limits<double>::quiet_NaN();
  double precision = std::numeric_limits<double>::quiet_NaN();
  double recall = std::numeric_limits<double>::quiet_NaN();
  double soda = std::numeric_limits<double>::quiet_NaN();
  double cider = std::numeric_limits<double>::quiet_NaN();
  double grace = std::numeric_limits<double>::quiet_NaN();
  double reward_raw = std::numeric_limits<double>::quiet_NaN();
  double reward_norm = std::numeric_limits<double>::quiet_NaN();
};

struct EvalReport {
  nlohmann::ordered_json config;
  std::vector<VideoScores> per_video;
  std::vector<BucketAggregate> per_bucket;  // configured buckets, then ALL
  bool complete = true;
};

inline nlohmann::ordered_json ConfigToJson(const MetricConfig& cfg) {
  nlohmann::ordered_json j;
  j["similarity"] = cfg.similarity->kind() == ScorerKind::kLexicalF1
                        ? "lexical"
                        : "external";
  j["backend"] = cfg.similarity->backend();
  j["text_field"] = TextFieldName(cfg.text_field);
  j["grace_normalization"] = GraceNormalizationName(cfg.grace_normalization);
  j["f1_thresholds"] = cfg.f1_thresholds;
  nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
  for (const DurationBucket& b : cfg.buckets) {
    nlohmann::ordered_json bj;
    bj["label"] = BucketLabelName(b.label);
    bj["min_s"] = b.min_s;
    bj["max_s"] = b.max_s;
    buckets.push_back(std::move(bj));
  }
  j["buckets"] = std::move(buckets);
  return j;
}

inline BucketAggregate AggregateBucket(BucketLabel label,
                                       std::span<const VideoScores* const> members) {
  BucketAggregate a;
  a.label = label;
  a.count = members.size();
  if (members.empty()) return a;
  a.f1 = a.tiou = a.precision = a.recall = a.soda = a.grace = a.reward_raw =
      a.reward_norm = 0.0;
  TextPairs corpus;
  for (const VideoScores* v : members) {
    a.f1 += v->f1;
    a.tiou += v->tiou;
    a.precision += v->precision;
    a.recall += v->recall;
    a.soda += v->soda;
    a.grace += v->grace;
    a.reward_raw += v->reward_raw;
    a.reward_norm += v->reward_norm;
    corpus.insert(corpus.end(), v->cider_pairs.begin(), v->cider_pairs.end());
  }
  const double n = static_cast<double>(members.size());
  a.f1 /= n;
  a.tiou /= n;
  a.precision /= n;
  a.recall /= n;
  a.soda /= n;
  a.grace /= n;
  a.reward_raw /= n;
  a.reward_norm /= n;
  a.cider = corpus.empty() ? 0.0 : cider_of_pairs(corpus);
  return a;
}

inline EvalReport aggregate(std::vector<VideoScores> videos,
                            const MetricConfig& cfg) {
  EvalReport report;
  report.config = ConfigToJson(cfg);
  report.per_video = std::move(videos);
  std::vector<BucketLabel> labels;
  for (const DurationBucket& b : cfg.buckets) {
    if (b.label != BucketLabel::kAll) labels.push_back(b.label);
  }
  labels.push_back(BucketLabel::kAll);
  for (BucketLabel label : labels) {
    std::vector<const VideoScores*> members;
    for (const VideoScores& v : report.per_video) {
      if (label == BucketLabel::kAll || v.bucket == label) members.push_back(&v);
    }
    report.per_bucket.push_back(AggregateBucket(label, members));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering

namespace metrics_internal {

inline nlohmann::ordered_json Num(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v)
                          : nlohmann::ordered_json(nullptr);
}

}  // namespace metrics_internal

inline nlohmann::ordered_json MatchingToJson(const GroupMatching& m) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (const GroupPair& g : m.groups) {
    nlohmann::ordered_json gj;
    gj["pred"] = {g.pred.begin, g.pred.end};
    gj["gt"] = {g.gt.begin, g.gt.end};
    gj["phi"] = g.phi;
    groups.push_back(std::move(gj));
  }
  j["groups"] = std::move(groups);
  j["objective"] = m.objective;
  return j;
}

inline nlohmann::ordered_json VideoScoresToJson(const VideoScores& v) {
  using metrics_internal::Num;
  nlohmann::ordered_json j;
  j["video_id"] = v.video_id;
  j["duration_s"] = v.duration_s;
  j["bucket"] = BucketLabelName(v.bucket);
  j["f1"] = Num(v.f1);
  j["tiou"] = Num(v.tiou);
  j["precision"] = Num(v.precision);
  j["recall"] = Num(v.recall);
  j["soda"] = Num(v.soda);
  j["cider"] = Num(v.cider);
  j["grace"] = Num(v.grace);
  j["reward_raw"] = Num(v.reward_raw);
  j["reward_norm"] = Num(v.reward_norm);
  j["matching"] = MatchingToJson(v.matching);
  j["error"] = v.error ? nlohmann::ordered_json(*v.error)
                       : nlohmann::ordered_json(nullptr);
  return j;
}

inline nlohmann::ordered_json BucketToJson(const BucketAggregate& a) {
  using metrics_internal::Num;
  nlohmann::ordered_json j;
  j["count"] = a.count;
  j["f1"] = Num(a.f1);
  j["tiou"] = Num(a.tiou);
  j["precision"] = Num(a.precision);
  j["recall"] = Num(a.recall);
  j["soda"] = Num(a.soda);
  j["cider"] = Num(a.cider);
  j["grace"] = Num(a.grace);
  j["reward_raw"] = Num(a.reward_raw);
  j["reward_norm"] = Num(a.reward_norm);
  return j;
}

inline nlohmann::ordered_json ReportToJson(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["config"] = report.config;
  j["complete"] = report.complete;
  nlohmann::ordered_json videos = nlohmann::ordered_json::array();
  for (const VideoScores& v : report.per_video) {
    videos.push_back(VideoScoresToJson(v));
  }
  j["videos"] = std::move(videos);
  nlohmann::ordered_json buckets = nlohmann::ordered_json::object();
  for (const BucketAggregate& a : report.per_bucket) {
    buckets[std::string(BucketLabelName(a.label))] = BucketToJson(a);
  }
  j["buckets"] = std::move(buckets);
  return j;
}

// One row, column groups per bucket: F1, tIoU, S (SODA), C (CIDEr), G (GRACE).
inline std::string RenderMarkdown(const EvalReport& report,
                                  std::string_view row_label = "run") {
  const auto fmt = [](double v) {
    if (!std::isfinite(v)) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return std::string(buf);
  };
  std::string header = "| |";
  std::string rule = "|---|";
  std::string row = "| " + std::string(row_label) + " |";
  std::string counts = "| videos |";
  for (const BucketAggregate& a : report.per_bucket) {
    std::string name(BucketLabelName(a.label));
    name[0] = static_cast<char>(name[0] - 'a' + 'A');
    for (const char* metric : {"F1", "tIoU", "S", "C", "G"}) {
      header += " " + name + " " + metric + " |";
      rule += "---:|";
    }
    row += " " + fmt(a.f1) + " | " + fmt(a.tiou) + " | " + fmt(a.soda) +
           " | " + fmt(a.cider) + " | " + fmt(a.grace) + " |";
    counts += " " + std::to_string(a.count) + " | | | | |";
  }
  std::string out = header + "\n" + rule + "\n" + row + "\n" + counts + "\n";
  if (!report.complete) {
    out += "\n**Incomplete run:** the evaluation aborted before all videos "
           "were scored.\n";
  }
  return out;
}

}  // namespace chaptereval

#endif  // CHAPTEREVAL_METRICS_HPP_
