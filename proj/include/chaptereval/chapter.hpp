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

// Domain types shared by every other module: time values, chapters,
// timelines, transcript segments and duration buckets, plus the interval
// arithmetic (IoU and the group temporal score) used by the matchers.

#ifndef CHAPTEREVAL_CHAPTER_HPP_
#define CHAPTEREVAL_CHAPTER_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chaptereval/errors.hpp"

namespace chaptereval {

// Non-negative, finite number of seconds.
class TimeSec {
 public:
  constexpr TimeSec() = default;
  explicit TimeSec(double seconds) : value_(seconds) {
    if (!std::isfinite(seconds) || seconds < 0.0) {
      std::ostringstream os;
      os << "time must be finite and non-negative, got " << seconds;
      throw InvalidTimeError(os.str());
    }
  }
  constexpr double seconds() const { return value_; }

  friend constexpr auto operator<=>(const TimeSec&, const TimeSec&) = default;

 private:
  double value_ = 0.0;
};

enum class TextField { kShortTitle, kTitle, kAbstract, kIntroduction };

inline std::string_view TextFieldName(TextField field) {
  switch (field) {
    case TextField::kShortTitle:
      return "short_title";
    case TextField::kTitle:
      return "title";
    case TextField::kAbstract:
      return "abstract";
    case TextField::kIntroduction:
      return "introduction";
  }
  return "short_title";
}

inline std::optional<TextField> ParseTextField(std::string_view name) {
  for (TextField f : {TextField::kShortTitle, TextField::kTitle,
                      TextField::kAbstract, TextField::kIntroduction}) {
    if (TextFieldName(f) == name) return f;
  }
  return std::nullopt;
}

// A half-open interval [start, end) with its text. Times are validated on
// construction; the text fields are plain data.
class Chapter {
 public:
  Chapter(TimeSec start, TimeSec end, std::string short_title = {})
      : short_title(std::move(short_title)), start_(start), end_(end) {
    if (!(start_ < end_)) {
      std::ostringstream os;
      os << "chapter must have start < end, got [" << start_.seconds() << ", "
         << end_.seconds() << ")";
      throw InvalidChapterError(os.str());
    }
  }
  Chapter(double start, double end, std::string short_title = {})
      : Chapter(TimeSec(start), TimeSec(end), std::move(short_title)) {}

  double start() const { return start_.seconds(); }
  double end() const { return end_.seconds(); }
  double length() const { return end() - start(); }

  // Returns the requested text, or nullopt when an optional field is unset.
  std::optional<std::string_view> text(TextField field) const {
    switch (field) {
      case TextField::kShortTitle:
        return std::string_view(short_title);
      case TextField::kTitle:
        return title ? std::optional<std::string_view>(*title) : std::nullopt;
      case TextField::kAbstract:
        return abstract ? std::optional<std::string_view>(*abstract)
                        : std::nullopt;
      case TextField::kIntroduction:
        return introduction ? std::optional<std::string_view>(*introduction)
                            : std::nullopt;
    }
    return std::nullopt;
  }

  friend bool operator==(const Chapter&, const Chapter&) = default;

  std::string short_title;
  std::optional<std::string> title;
  std::optional<std::string> abstract;
  std::optional<std::string> introduction;

 private:
  TimeSec start_;
  TimeSec end_;
};

// Consecutive chapters may overlap by at most this much; the earlier chapter
// is truncated to the later one's start.
inline constexpr double kOverlapClampSeconds = 0.01;

// Ordered, non-overlapping, non-empty list of chapters for one video.
class ChapterTimeline {
 public:
  ChapterTimeline(std::string video_id, std::vector<Chapter> chapters,
                  std::optional<TimeSec> duration = std::nullopt,
                  Warnings* warnings = nullptr)
      : video_id_(std::move(video_id)),
        duration_(duration),
        chapters_(std::move(chapters)) {
    if (chapters_.empty()) {
      throw EmptyTimelineError("timeline \"" + video_id_ +
                               "\" has no chapters");
    }
    for (std::size_t k = 0; k + 1 < chapters_.size(); ++k) {
      Chapter& cur = chapters_[k];
      const Chapter& next = chapters_[k + 1];
      if (next.start() < cur.start()) {
        throw TimelineError("chapters not sorted by start at index " +
                            std::to_string(k + 1));
      }
      const double overlap = cur.end() - next.start();
      if (overlap <= 0.0) continue;
      if (overlap > kOverlapClampSeconds + 1e-9) {
        std::ostringstream os;
        os << "chapters " << k << " and " << k + 1 << " overlap by "
           << overlap << " s";
        throw TimelineError(os.str());
      }
      // Throws InvalidChapterError if the truncation empties the chapter.
      Chapter clamped(TimeSec(cur.start()), TimeSec(next.start()),
                      cur.short_title);
      clamped.title = cur.title;
      clamped.abstract = cur.abstract;
      clamped.introduction = cur.introduction;
      cur = std::move(clamped);
      std::ostringstream os;
      os << "clamped " << overlap << " s overlap between chapters " << k
         << " and " << k + 1;
      Warn(warnings, os.str());
    }
    if (duration_ && chapters_.back().end() > duration_->seconds() + 1e-9) {
      std::ostringstream os;
      os << "last chapter ends at " << chapters_.back().end()
         << " s, beyond duration " << duration_->seconds() << " s";
      throw TimelineError(os.str());
    }
  }

  const std::string& video_id() const { return video_id_; }
  const std::optional<TimeSec>& duration() const { return duration_; }
  std::span<const Chapter> chapters() const { return chapters_; }
  std::size_t size() const { return chapters_.size(); }
  const Chapter& operator[](std::size_t k) const { return chapters_[k]; }

  // The duration when known, otherwise the end of the last chapter.
  double effective_duration() const {
    return duration_ ? duration_->seconds() : chapters_.back().end();
  }

  friend bool operator==(const ChapterTimeline&,
                         const ChapterTimeline&) = default;

 private:
  std::string video_id_;
  std::optional<TimeSec> duration_;
  std::vector<Chapter> chapters_;
};

enum class SegmentSource { kAsr, kVisual };

inline bool IsBlank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  });
}

class TranscriptSegment {
 public:
  TranscriptSegment(TimeSec start, std::string text, SegmentSource source)
      : start_(start), text_(std::move(text)), source_(source) {
    if (IsBlank(text_)) {
      throw FormatError("transcript segment text is empty");
    }
  }

  double start() const { return start_.seconds(); }
  const std::string& text() const { return text_; }
  SegmentSource source() const { return source_; }

  friend bool operator==(const TranscriptSegment&,
                         const TranscriptSegment&) = default;

 private:
  TimeSec start_;
  std::string text_;
  SegmentSource source_;
};

enum class BucketLabel { kShort, kMedium, kLong, kAll };

inline std::string_view BucketLabelName(BucketLabel label) {
  switch (label) {
    case BucketLabel::kShort:
      return "short";
    case BucketLabel::kMedium:
      return "medium";
    case BucketLabel::kLong:
      return "long";
    case BucketLabel::kAll:
      return "all";
  }
  return "all";
}

// Videos with min_s < duration <= max_s belong to the bucket.
struct DurationBucket {
  BucketLabel label;
  double min_s;
  double max_s;

  bool Contains(double duration) const {
    return duration > min_s && duration <= max_s;
  }
  friend bool operator==(const DurationBucket&,
                         const DurationBucket&) = default;
};

inline constexpr double kMinute = 60.0;

// Short up to 15 min, medium up to 30 min, long up to 60 min.
inline std::vector<DurationBucket> DefaultBuckets() {
  return {{BucketLabel::kShort, 0.0, 15 * kMinute},
          {BucketLabel::kMedium, 15 * kMinute, 30 * kMinute},
          {BucketLabel::kLong, 30 * kMinute, 60 * kMinute}};
}

inline DurationBucket AllBucket() {
  return {BucketLabel::kAll, 0.0, std::numeric_limits<double>::infinity()};
}

// Checks that the non-ALL buckets are well-formed and pairwise disjoint.
inline void ValidateBuckets(std::span<const DurationBucket> buckets) {
  std::vector<DurationBucket> sorted;
  for (const DurationBucket& b : buckets) {
    if (b.label == BucketLabel::kAll) continue;
    if (!(b.min_s >= 0.0) || !(b.min_s < b.max_s)) {
      throw ConfigError("bucket \"" + std::string(BucketLabelName(b.label)) +
                        "\" must satisfy 0 <= min < max");
    }
    sorted.push_back(b);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.min_s < b.min_s; });
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    if (sorted[k].max_s > sorted[k + 1].min_s) {
      throw ConfigError("duration buckets overlap");
    }
    if (sorted[k].label == sorted[k + 1].label) {
      throw ConfigError("duplicate duration bucket label");
    }
  }
}

// Returns the bucket holding `duration`. Durations beyond the largest
// configured bucket belong to ALL only; durations inside the configured range
// but not covered by any bucket are a configuration gap.
inline DurationBucket bucket_of(TimeSec duration,
                                std::span<const DurationBucket> buckets) {
  const double d = duration.seconds();
  double hi = -std::numeric_limits<double>::infinity();
  for (const DurationBucket& b : buckets) {
    if (b.label == BucketLabel::kAll) continue;
    if (b.Contains(d)) return b;
    hi = std::max(hi, b.max_s);
  }
  if (d > hi) return AllBucket();
  std::ostringstream os;
  os << "no duration bucket covers " << d << " s";
  throw BucketGapError(os.str());
}

// Temporal IoU of two half-open intervals.
inline double iou(const Chapter& a, const Chapter& b) {
  const double inter =
      std::max(0.0, std::min(a.end(), b.end()) - std::max(a.start(), b.start()));
  const double uni = a.length() + b.length() - inter;
  return inter / uni;
}

// Mean pairwise IoU between a prediction group and a ground-truth group.
// At least one of the groups must be a single chapter.
inline double phi(std::span<const Chapter> preds,
                  std::span<const Chapter> gts) {
  if (preds.empty() || gts.empty()) {
    throw GroupShapeError("groups must be non-empty");
  }
  if (preds.size() > 1 && gts.size() > 1) {
    throw GroupShapeError("group shape " + std::to_string(preds.size()) + "x" +
                          std::to_string(gts.size()) +
                          " is not one-to-many or many-to-one");
  }
  double sum = 0.0;
  for (const Chapter& p : preds) {
    for (const Chapter& g : gts) sum += iou(p, g);
  }
  return sum / static_cast<double>(preds.size() * gts.size());
}

}  // namespace chaptereval

#endif  // CHAPTEREVAL_CHAPTER_HPP_
