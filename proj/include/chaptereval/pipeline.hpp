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

// Annotation-pipeline steps that do not involve a model: merging ASR and
// visual-caption streams, rendering the timestamped transcript, checking
// generated chapter boundaries against known timestamps, and synthesizing
// coarser or finer annotations for robustness experiments.

#ifndef CHAPTEREVAL_PIPELINE_HPP_
#define CHAPTEREVAL_PIPELINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "chaptereval/chapter.hpp"
#include "chaptereval/errors.hpp"
#include "chaptereval/formats.hpp"
#include "chaptereval/text.hpp"

namespace chaptereval {

// Chronological, ASR before VISUAL at equal start times.
struct MultimodalTranscript {
  std::vector<TranscriptSegment> segments;
};

inline MultimodalTranscript interleave(const TranscriptDocument& asr,
                                       const TranscriptDocument& visual) {
  const auto by_start = [](const TranscriptSegment& a,
                           const TranscriptSegment& b) {
    return a.start() < b.start();
  };
  std::vector<TranscriptSegment> a = asr.segments;
  std::vector<TranscriptSegment> v = visual.segments;
  std::stable_sort(a.begin(), a.end(), by_start);
  std::stable_sort(v.begin(), v.end(), by_start);
  MultimodalTranscript out;
  out.segments.reserve(a.size() + v.size());
  // std::merge takes from the first range on ties.
  std::merge(a.begin(), a.end(), v.begin(), v.end(),
             std::back_inserter(out.segments), by_start);
  return out;
}

inline constexpr std::string_view kVisualPrefix = "[VIS] ";

// "hh:mm:ss: <text>" per segment, start floored to whole seconds; visual
// segments carry the "[VIS] " marker after the timestamp.
inline std::string render_transcript(const MultimodalTranscript& t) {
  std::string out;
  for (const TranscriptSegment& s : t.segments) {
    std::string text = s.text();
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), '\r', ' ');
    out += format_timestamp(s.start());
    out += ": ";
    if (s.source() == SegmentSource::kVisual) out += kVisualPrefix;
    out += text;
    out += '\n';
  }
  return out;
}

// Inverse of render_transcript up to the flooring of start times.
inline MultimodalTranscript parse_rendered_transcript(std::string_view text) {
  MultimodalTranscript out;
  std::size_t line_no = 0;
  for (std::string_view line : formats_internal::SplitLines(text)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t sep = line.find(": ");
    if (sep == std::string_view::npos) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected \"hh:mm:ss: <text>\"");
    }
    const TimeSec start = parse_timestamp(line.substr(0, sep));
    std::string_view body = line.substr(sep + 2);
    SegmentSource source = SegmentSource::kAsr;
    if (body.substr(0, kVisualPrefix.size()) == kVisualPrefix) {
      source = SegmentSource::kVisual;
      body.remove_prefix(kVisualPrefix.size());
    }
    out.segments.emplace_back(start, std::string(body), source);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary verification

enum class BoundaryStatus { kOk, kSnapped, kRejected };

inline std::string_view BoundaryStatusName(BoundaryStatus s) {
  switch (s) {
    case BoundaryStatus::kOk:
      return "ok";
    case BoundaryStatus::kSnapped:
      return "snapped";
    case BoundaryStatus::kRejected:
      return "rejected";
  }
  return "ok";
}

struct BoundaryVerdict {
  std::size_t chapter_index = 0;
  BoundaryStatus status = BoundaryStatus::kOk;
  double delta = 0.0;   // chapter start minus nearest anchor
  double anchor = 0.0;  // the nearest anchor
};

inline constexpr double kDefaultBoundaryTolerance = 1.0;

// Compares every chapter start with its nearest anchor (the earlier one when
// two are equidistant).
inline std::vector<BoundaryVerdict> verify_boundaries(
    const ChapterTimeline& chapters, std::span<const TimeSec> anchors,
    double tolerance = kDefaultBoundaryTolerance) {
  if (anchors.empty()) throw Error("boundary verification needs anchors");
  std::vector<double> sorted;
  sorted.reserve(anchors.size());
  for (TimeSec a : anchors) sorted.push_back(a.seconds());
  std::sort(sorted.begin(), sorted.end());

  std::vector<BoundaryVerdict> verdicts;
  verdicts.reserve(chapters.size());
  for (std::size_t k = 0; k < chapters.size(); ++k) {
    const double start = chapters[k].start();
    auto it = std::lower_bound(sorted.begin(), sorted.end(), start);
    double nearest;
    if (it == sorted.end()) {
      nearest = sorted.back();
    } else if (it == sorted.begin()) {
      nearest = *it;
    } else {
      const double before = *(it - 1);
      nearest = (start - before) <= (*it - start) ? before : *it;
    }
    BoundaryVerdict v;
    v.chapter_index = k;
    v.anchor = nearest;
    v.delta = start - nearest;
    if (v.delta == 0.0) {
      v.status = BoundaryStatus::kOk;
    } else if (std::abs(v.delta) <= tolerance) {
      v.status = BoundaryStatus::kSnapped;
    } else {
      v.status = BoundaryStatus::kRejected;
    }
    verdicts.push_back(v);
  }
  return verdicts;
}

// Moves every SNAPPED chapter start onto its anchor. When the previous
// chapter ended exactly at the old start, its end moves too so the timeline
// stays contiguous. Throws if the result is not a valid timeline.
inline ChapterTimeline apply_snaps(const ChapterTimeline& chapters,
                                   std::span<const BoundaryVerdict> verdicts) {
  std::vector<double> starts;
  std::vector<double> ends;
  for (const Chapter& c : chapters.chapters()) {
    starts.push_back(c.start());
    ends.push_back(c.end());
  }
  for (const BoundaryVerdict& v : verdicts) {
    if (v.status != BoundaryStatus::kSnapped) continue;
    const std::size_t k = v.chapter_index;
    if (k > 0 && ends[k - 1] == starts[k]) ends[k - 1] = v.anchor;
    starts[k] = v.anchor;
  }
  std::vector<Chapter> out;
  for (std::size_t k = 0; k < chapters.size(); ++k) {
    Chapter c(starts[k], ends[k], chapters[k].short_title);
    c.title = chapters[k].title;
    c.abstract = chapters[k].abstract;
    c.introduction = chapters[k].introduction;
    out.push_back(std::move(c));
  }
  return ChapterTimeline(chapters.video_id(), std::move(out),
                         chapters.duration());
}

// Default anchors: ASR sentence starts plus the author-provided chapter
// starts, sorted and de-duplicated.
inline std::vector<TimeSec> boundary_anchors(
    const TranscriptDocument& asr, const ChapterTimeline* author_chapters) {
  std::vector<TimeSec> anchors;
  for (const TranscriptSegment& s : asr.segments) {
    if (s.source() == SegmentSource::kAsr) anchors.emplace_back(s.start());
  }
  if (author_chapters != nullptr) {
    for (const Chapter& c : author_chapters->chapters()) {
      anchors.emplace_back(c.start());
    }
  }
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  return anchors;
}

// ---------------------------------------------------------------------------
// Granularity perturbation

enum class PerturbMode { kSplit, kMerge };

struct PerturbOptions {
  // Split point offset from the midpoint, as a fraction of chapter length,
  // drawn uniformly from [-jitter, jitter).
  double jitter = 0.1;
};

namespace pipeline_internal {

// Uniform in [0, 1) from the top 53 bits; identical on every platform.
inline double Unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::pair<std::optional<std::string>, std::optional<std::string>>
SplitText(const std::optional<std::string>& text) {
  if (!text) return {std::nullopt, std::nullopt};
  const auto words = SplitWhitespace(*text);
  if (words.size() < 2) return {JoinWords(words, 0, words.size()), std::nullopt};
  const std::size_t half = (words.size() + 1) / 2;
  return {JoinWords(words, 0, half), JoinWords(words, half, words.size())};
}

inline std::optional<std::string> JoinText(const std::optional<std::string>& a,
                                           const std::optional<std::string>& b) {
  if (!a) return b;
  if (!b) return a;
  if (IsBlank(*a)) return b;
  if (IsBlank(*b)) return a;
  return *a + " " + *b;
}

}  // namespace pipeline_internal

// SPLIT cuts every chapter near its midpoint (seeded jitter) into two, giving
// the first ceil(n/2) words of each text to the first part. MERGE joins
// chapters pairwise (0+1, 2+3, ...), concatenating texts.
inline ChapterTimeline perturb_granularity(const ChapterTimeline& gt,
                                           PerturbMode mode, std::uint64_t seed,
                                           PerturbOptions options = {}) {
  using namespace pipeline_internal;
  std::vector<Chapter> out;
  if (mode == PerturbMode::kSplit) {
    if (!(options.jitter >= 0.0 && options.jitter < 0.5)) {
      throw PerturbationInfeasibleError("jitter must lie in [0, 0.5)");
    }
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < gt.size(); ++k) {
      const Chapter& c = gt[k];
      const auto words = SplitWhitespace(c.short_title);
      if (c.length() < 2.0 || words.size() < 2) {
        throw PerturbationInfeasibleError(
            "chapter " + std::to_string(k) +
            " is too short to split (needs >= 2 s and >= 2 title words)");
      }
      const double u = 2.0 * Unit(rng) - 1.0;
      double cut = c.start() + c.length() * (0.5 + options.jitter * u);
      cut = std::round(cut * 1000.0) / 1000.0;
      auto [t1, t2] = SplitText(c.short_title);
      Chapter first(c.start(), cut, *t1);
      Chapter second(cut, c.end(), t2.value_or(""));
      std::tie(first.title, second.title) = SplitText(c.title);
      std::tie(first.abstract, second.abstract) = SplitText(c.abstract);
      std::tie(first.introduction, second.introduction) =
          SplitText(c.introduction);
      out.push_back(std::move(first));
      out.push_back(std::move(second));
    }
  } else {
    if (gt.size() < 2) {
      throw PerturbationInfeasibleError("MERGE needs at least two chapters");
    }
    for (std::size_t k = 0; k < gt.size(); k += 2) {
      if (k + 1 == gt.size()) {
        out.push_back(gt[k]);
        break;
      }
      const Chapter& a = gt[k];
      const Chapter& b = gt[k + 1];
      Chapter merged(a.start(), b.end(),
                     *JoinText(a.short_title, b.short_title));
      merged.title = JoinText(a.title, b.title);
      merged.abstract = JoinText(a.abstract, b.abstract);
      merged.introduction = JoinText(a.introduction, b.introduction);
      out.push_back(std::move(merged));
    }
  }
  return ChapterTimeline(gt.video_id(), std::move(out), gt.duration());
}

}  // namespace chaptereval

#endif  // CHAPTEREVAL_PIPELINE_HPP_
