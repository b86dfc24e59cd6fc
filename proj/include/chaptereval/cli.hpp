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

// Batch commands behind the `chaptereval` binary. Each command returns the
// process exit code: 0 clean, 2 when some videos failed but the run
// completed, 1 on fatal errors.

#ifndef CHAPTEREVAL_CLI_HPP_
#define CHAPTEREVAL_CLI_HPP_

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaptereval/chapter.hpp"
#include "chaptereval/errors.hpp"
#include "chaptereval/formats.hpp"
#include "chaptereval/metrics.hpp"
#include "chaptereval/pipeline.hpp"
#include "chaptereval/textsim.hpp"

namespace chaptereval::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;
inline constexpr double kDefaultScorerTimeoutSeconds = 120.0;

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// I/O helpers

inline std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << data;
  if (!out) throw Error("write failed for " + path.string());
}

inline std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) {
    os << std::hex << std::setw(2) << std::setfill('0')
       << static_cast<int>(digest[k]);
  }
  return os.str();
}

// A single file, or every *.json file of a directory in name order.
inline std::vector<fs::path> ListJsonInputs(const fs::path& path) {
  if (fs::is_regular_file(path)) return {path};
  if (!fs::is_directory(path)) {
    throw ConfigError("no such file or directory: " + path.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Pairing key: the document's video_id, or the file stem when it is empty.
inline std::string VideoKey(const ChapterTimeline& t, const fs::path& file) {
  return t.video_id().empty() ? file.stem().string() : t.video_id();
}

inline ChapterTimeline WithVideoId(const ChapterTimeline& t, std::string id) {
  return ChapterTimeline(std::move(id),
                         std::vector<Chapter>(t.chapters().begin(),
                                              t.chapters().end()),
                         t.duration());
}

// ---------------------------------------------------------------------------
// Configuration

struct ScorerSettings {
  std::string kind = "lexical";
  std::vector<std::string> command;
};

struct EvaluateOptions {
  fs::path pred;
  fs::path gt;
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::string> sim;
  std::vector<std::string> scorer_cmd;
  std::optional<std::string> buckets_json;
  std::optional<std::string> field;
  std::optional<int> jobs;
};

inline std::vector<DurationBucket> ParseBuckets(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("\"buckets\" must be an array");
  std::vector<DurationBucket> buckets;
  for (const auto& b : j) {
    if (!b.is_object() || !b.contains("label") || !b["label"].is_string() ||
        !b.contains("min_s") || !b["min_s"].is_number() ||
        !b.contains("max_s") || !b["max_s"].is_number()) {
      throw ConfigError("bucket entries need label, min_s and max_s");
    }
    const std::string label = b["label"].get<std::string>();
    BucketLabel l;
    if (label == "short") {
      l = BucketLabel::kShort;
    } else if (label == "medium") {
      l = BucketLabel::kMedium;
    } else if (label == "long") {
      l = BucketLabel::kLong;
    } else {
      throw ConfigError("bucket label must be short, medium or long");
    }
    buckets.push_back({l, b["min_s"].get<double>(), b["max_s"].get<double>()});
  }
  return buckets;
}

struct ResolvedConfig {
  MetricConfig metrics;
  ScorerSettings scorer;
  int jobs = 1;
};

inline double ScorerTimeoutSeconds() {
  const char* env = std::getenv("CHAPTEREVAL_SCORER_TIMEOUT_S");
  if (env == nullptr || *env == '\0') return kDefaultScorerTimeoutSeconds;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0)) {
    throw ConfigError("CHAPTEREVAL_SCORER_TIMEOUT_S must be a positive number");
  }
  return v;
}

// Defaults, then the config file, then command-line flags.
inline ResolvedConfig ResolveConfig(const EvaluateOptions& opts) {
  ResolvedConfig rc;
  rc.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (opts.config) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ReadFile(*opts.config));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
      for (const auto& [key, value] : j.items()) {
        if (key == "similarity") {
          rc.scorer.kind = value.get<std::string>();
        } else if (key == "scorer_cmd") {
          rc.scorer.command = value.get<std::vector<std::string>>();
        } else if (key == "text_field") {
          auto f = ParseTextField(value.get<std::string>());
          if (!f) throw ConfigError("unknown text_field");
          rc.metrics.text_field = *f;
        } else if (key == "grace_normalization") {
          auto n = ParseGraceNormalization(value.get<std::string>());
          if (!n) throw ConfigError("unknown grace_normalization");
          rc.metrics.grace_normalization = *n;
        } else if (key == "f1_thresholds") {
          rc.metrics.f1_thresholds = value.get<std::vector<double>>();
        } else if (key == "buckets") {
          rc.metrics.buckets = ParseBuckets(value);
        } else if (key == "jobs") {
          rc.jobs = value.get<int>();
        } else {
          throw ConfigError("unknown config key \"" + key + "\"");
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config has a value of the wrong type: ") +
                        e.what());
    }
  }
  if (opts.sim) rc.scorer.kind = *opts.sim;
  if (!opts.scorer_cmd.empty()) rc.scorer.command = opts.scorer_cmd;
  if (opts.buckets_json) {
    try {
      rc.metrics.buckets = ParseBuckets(nlohmann::json::parse(*opts.buckets_json));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("--buckets is not valid JSON: ") + e.what());
    }
  }
  if (opts.field) {
    auto f = ParseTextField(*opts.field);
    if (!f) throw ConfigError("unknown --field " + *opts.field);
    rc.metrics.text_field = *f;
  }
  if (opts.jobs) rc.jobs = *opts.jobs;
  if (rc.jobs < 1) throw ConfigError("jobs must be at least 1");

  if (rc.scorer.kind == "lexical") {
    rc.metrics.similarity = std::make_shared<LexicalScorer>();
  } else if (rc.scorer.kind == "external") {
    if (rc.scorer.command.empty()) {
      throw ConfigError("--sim external requires --scorer-cmd");
    }
    const auto timeout = std::chrono::milliseconds(
        static_cast<long long>(ScorerTimeoutSeconds() * 1000.0));
    rc.metrics.similarity =
        std::make_shared<ExternalScorer>(rc.scorer.command, timeout);
  } else {
    throw ConfigError("--sim must be lexical or external");
  }
  rc.metrics.Validate();
  return rc;
}

// ---------------------------------------------------------------------------
// evaluate

namespace cli_internal {

struct LoadedSet {
  std::map<std::string, ChapterTimeline> by_key;
  std::map<std::string, std::string> errors;  // key -> message
  std::vector<std::pair<std::string, std::string>> digests;  // path, sha256
};

// With `tolerant`, malformed files are recorded under their file stem instead
// of aborting.
inline LoadedSet LoadTimelines(const fs::path& path, bool tolerant,
                               std::vector<std::string>* warnings) {
  LoadedSet set;
  for (const fs::path& file : ListJsonInputs(path)) {
    const std::string text = ReadFile(file);
    set.digests.emplace_back(file.string(), Sha256Hex(text));
    try {
      Warnings local;
      ChapterTimeline t = parse_canonical(text, &local);
      for (auto& w : local) warnings->push_back(file.string() + ": " + w);
      std::string key = VideoKey(t, file);
      if (set.by_key.count(key) || set.errors.count(key)) {
        throw ConfigError("duplicate video id \"" + key + "\" in " +
                          path.string());
      }
      set.by_key.emplace(key, WithVideoId(t, key));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      if (!tolerant) throw FormatError(file.string() + ": " + e.what());
      set.errors[file.stem().string()] = file.string() + ": " + e.what();
    }
  }
  return set;
}

inline bool IsScorerError(const std::exception_ptr& p) {
  try {
    std::rethrow_exception(p);
  } catch (const ScorerProtocolError&) {
    return true;
  } catch (const ScorerTimeoutError&) {
    return true;
  } catch (const MissingResponseError&) {
    return true;
  } catch (...) {
    return false;
  }
}

inline std::string Message(const std::exception_ptr& p) {
  try {
    std::rethrow_exception(p);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

inline std::string UtcNow() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace cli_internal

inline int RunEvaluate(const EvaluateOptions& opts, std::ostream& err) {
  using namespace cli_internal;
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = UtcNow();
  ResolvedConfig rc;
  std::vector<std::string> warnings;
  LoadedSet gts;
  LoadedSet preds;
  try {
    rc = ResolveConfig(opts);
    gts = LoadTimelines(opts.gt, false, &warnings);
    preds = LoadTimelines(opts.pred, true, &warnings);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  if (gts.by_key.empty()) {
    err << "error: no ground-truth files under " << opts.gt << "\n";
    return kExitFatal;
  }
  for (const auto& [key, t] : preds.by_key) {
    if (!gts.by_key.count(key)) {
      warnings.push_back("prediction \"" + key + "\" has no ground truth");
    }
  }

  std::vector<const ChapterTimeline*> gt_list;
  for (const auto& [key, t] : gts.by_key) gt_list.push_back(&t);
  const std::size_t n = gt_list.size();
  std::vector<std::optional<VideoScores>> results(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex fatal_mu;
  std::exception_ptr fatal;

  const auto worker = [&] {
    while (!abort.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      const ChapterTimeline& gt = *gt_list[k];
      const std::string& key = gt.video_id();
      try {
        auto pit = preds.by_key.find(key);
        if (pit != preds.by_key.end()) {
          try {
            results[k] = evaluate_video(pit->second, gt, rc.metrics);
          } catch (const BucketGapError&) {
            throw;
          } catch (const Error& e) {
            auto eptr = std::current_exception();
            if (IsScorerError(eptr)) throw;
            results[k] = failed_video(gt, rc.metrics, e.what());
          }
        } else if (auto eit = preds.errors.find(key); eit != preds.errors.end()) {
          results[k] = failed_video(gt, rc.metrics, eit->second);
        } else {
          results[k] = failed_video(gt, rc.metrics,
                                    "missing prediction for \"" + key + "\"");
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        abort.store(true);
      }
    }
  };
  const int jobs = std::min<int>(rc.jobs, static_cast<int>(n));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
  }

  std::vector<VideoScores> done;
  nlohmann::ordered_json errors = nlohmann::ordered_json::array();
  for (auto& r : results) {
    if (!r) continue;
    if (r->error) {
      nlohmann::ordered_json e;
      e["video_id"] = r->video_id;
      e["error"] = *r->error;
      errors.push_back(std::move(e));
    }
    done.push_back(std::move(*r));
  }
  const bool complete = !fatal;
  EvalReport report = aggregate(std::move(done), rc.metrics);
  report.complete = complete;

  const std::string config_dump = report.config.dump();
  nlohmann::ordered_json manifest;
  manifest["tool"] = "chaptereval";
  manifest["version"] = kToolVersion;
  manifest["config_hash"] = "sha256:" + Sha256Hex(config_dump);
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const auto* set : {&gts, &preds}) {
    for (const auto& [path, digest] : set->digests) {
      nlohmann::ordered_json in;
      in["path"] = path;
      in["sha256"] = digest;
      inputs.push_back(std::move(in));
    }
  }
  manifest["inputs"] = std::move(inputs);
  manifest["started_at"] = started_at;
  manifest["wall_clock_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  manifest["jobs"] = jobs;
  manifest["complete"] = complete;
  manifest["errors"] = std::move(errors);
  manifest["warnings"] = warnings;
  if (fatal) manifest["fatal_error"] = Message(fatal);

  try {
    WriteFile(opts.out / "report.json", ReportToJson(report).dump(2) + "\n");
    WriteFile(opts.out / "report.md", RenderMarkdown(report));
    WriteFile(opts.out / "manifest.json", manifest.dump(2) + "\n");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  if (fatal) {
    err << "error: " << Message(fatal) << " (partial report written)\n";
    return kExitFatal;
  }
  if (!manifest["errors"].empty()) {
    for (const auto& e : manifest["errors"]) {
      err << "warning: " << e["video_id"].get<std::string>() << ": "
          << e["error"].get<std::string>() << "\n";
    }
    return kExitPartial;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reward

// Prints one JSON line per ground-truth video: {"video_id","raw","normalized"}.
inline int RunReward(const fs::path& pred, const fs::path& gt, std::ostream& out,
                     std::ostream& err) {
  using namespace cli_internal;
  std::vector<std::string> warnings;
  LoadedSet gts;
  LoadedSet preds;
  try {
    gts = LoadTimelines(gt, false, &warnings);
    preds = LoadTimelines(pred, false, &warnings);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  // Single-file mode pairs the two files regardless of their ids.
  if (fs::is_regular_file(pred) && fs::is_regular_file(gt) &&
      preds.by_key.size() == 1 && gts.by_key.size() == 1) {
    const auto& p = preds.by_key.begin()->second;
    const auto& g = gts.by_key.begin()->second;
    const RewardResult r = grpo_reward(p, g);
    nlohmann::ordered_json j;
    j["video_id"] = g.video_id();
    j["raw"] = r.raw;
    j["normalized"] = r.normalized;
    out << j.dump() << "\n";
    return kExitOk;
  }
  int code = kExitOk;
  for (const auto& [key, g] : gts.by_key) {
    auto it = preds.by_key.find(key);
    if (it == preds.by_key.end()) {
      err << "warning: missing prediction for \"" << key << "\"\n";
      code = kExitPartial;
      continue;
    }
    const RewardResult r = grpo_reward(it->second, g);
    nlohmann::ordered_json j;
    j["video_id"] = key;
    j["raw"] = r.raw;
    j["normalized"] = r.normalized;
    out << j.dump() << "\n";
  }
  return code;
}

// ---------------------------------------------------------------------------
// perturb

inline int RunPerturb(const fs::path& gt, std::string_view mode,
                      std::uint64_t seed, const fs::path& out,
                      std::ostream& err) {
  PerturbMode m;
  if (mode == "split") {
    m = PerturbMode::kSplit;
  } else if (mode == "merge") {
    m = PerturbMode::kMerge;
  } else {
    err << "error: --mode must be split or merge\n";
    return kExitFatal;
  }
  try {
    const bool dir = fs::is_directory(gt);
    for (const fs::path& file : ListJsonInputs(gt)) {
      const ChapterTimeline t = parse_canonical(ReadFile(file));
      const ChapterTimeline p = perturb_granularity(t, m, seed);
      WriteFile(dir ? out / file.filename() : out, serialize_canonical(p));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// transcript / convert

inline TranscriptDocument LoadTranscript(const fs::path& path,
                                         std::string_view format,
                                         Warnings* warnings) {
  const std::string text = ReadFile(path);
  if (format == "srt") return parse_srt_transcript(text, warnings);
  if (format == "vtt-transcript") return parse_vtt_transcript(text, warnings);
  if (format == "transcript-json") return parse_transcript_json(text);
  throw ConfigError("unknown transcript format \"" + std::string(format) + "\"");
}

inline std::string TranscriptFormatFromExtension(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".srt") return "srt";
  if (ext == ".vtt") return "vtt-transcript";
  return "transcript-json";
}

inline void WriteOutput(const fs::path& out, std::string_view data,
                        std::ostream& stdout_stream) {
  if (out.empty() || out == "-") {
    stdout_stream << data;
  } else {
    WriteFile(out, data);
  }
}

// Interleaves ASR and (optional) visual captions and renders the
// "hh:mm:ss: <text>" transcript.
inline int RunTranscript(const fs::path& asr,
                         const std::optional<fs::path>& visual,
                         const fs::path& out, std::ostream& stdout_stream,
                         std::ostream& err) {
  try {
    Warnings warnings;
    const TranscriptDocument a =
        LoadTranscript(asr, TranscriptFormatFromExtension(asr), &warnings);
    TranscriptDocument v;
    if (visual) v = parse_transcript_json(ReadFile(*visual));
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    WriteOutput(out, render_transcript(interleave(a, v)), stdout_stream);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitOk;
}

inline constexpr std::string_view kChapterFormats[] = {"json", "list", "vtt"};
inline constexpr std::string_view kTranscriptFormats[] = {
    "srt", "vtt-transcript", "transcript-json", "asr-lines"};

inline bool IsChapterFormat(std::string_view f) {
  return std::find(std::begin(kChapterFormats), std::end(kChapterFormats), f) !=
         std::end(kChapterFormats);
}
inline bool IsTranscriptFormat(std::string_view f) {
  return std::find(std::begin(kTranscriptFormats), std::end(kTranscriptFormats),
                   f) != std::end(kTranscriptFormats);
}

inline std::string ConvertUsage() {
  return "usage: chaptereval convert --in FILE --from FMT --to FMT "
         "[--duration S] [--out FILE]\n"
         "  chapter formats:    json, list, vtt\n"
         "  transcript formats: srt, vtt-transcript, transcript-json (input), "
         "transcript-json, asr-lines (output)\n";
}

inline int RunConvert(const fs::path& in, std::string_view from,
                      std::string_view to, std::optional<double> duration,
                      const fs::path& out, std::ostream& stdout_stream,
                      std::ostream& err) {
  const bool chapters = IsChapterFormat(from) && IsChapterFormat(to);
  const bool transcripts = IsTranscriptFormat(from) && from != "asr-lines" &&
                           (to == "transcript-json" || to == "asr-lines");
  if (!chapters && !transcripts) {
    err << "error: cannot convert from \"" << from << "\" to \"" << to
        << "\"\n"
        << ConvertUsage();
    return kExitFatal;
  }
  try {
    Warnings warnings;
    std::string result;
    if (chapters) {
      const std::string text = ReadFile(in);
      const std::string stem = in.stem().string();
      std::optional<ChapterTimeline> t;
      if (from == "json") {
        t = parse_canonical(text, &warnings);
      } else if (from == "list") {
        std::optional<TimeSec> d;
        if (duration) d = TimeSec(*duration);
        t = parse_chapter_list(text, d, stem).timeline;
      } else {
        t = parse_vtt_chapters(text, stem, &warnings).timeline;
        if (duration) {
          t = ChapterTimeline(t->video_id(),
                              std::vector<Chapter>(t->chapters().begin(),
                                                   t->chapters().end()),
                              TimeSec(*duration));
        }
      }
      if (to == "json") {
        result = serialize_canonical(*t);
      } else if (to == "list") {
        result = serialize_chapter_list(*t);
      } else {
        result = serialize_vtt_chapters(*t);
      }
    } else {
      TranscriptDocument doc = LoadTranscript(in, from, &warnings);
      if (doc.video_id.empty()) doc.video_id = in.stem().string();
      if (to == "transcript-json") {
        result = serialize_transcript_json(doc);
      } else {
        result = render_transcript(interleave(doc, TranscriptDocument{}));
      }
    }
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    WriteOutput(out, result, stdout_stream);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitOk;
}

}  // namespace chaptereval::cli

#endif  // CHAPTEREVAL_CLI_HPP_
