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

// Readers and writers for every external text format. Canonical JSON is the
// interchange hub; the timestamp list and WebVTT chapter formats convert
// through it. Transcripts come from WebVTT, SRT or canonical transcript JSON.

#ifndef CHAPTEREVAL_FORMATS_HPP_
#define CHAPTEREVAL_FORMATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaptereval/chapter.hpp"
#include "chaptereval/errors.hpp"

namespace chaptereval {

enum class ChapterFormat { kCanonicalJson, kTimestampList, kWebVttChapters };

struct ChapterDocument {
  ChapterTimeline timeline;
  ChapterFormat source_format;
};

struct TranscriptDocument {
  std::string video_id;
  std::vector<TranscriptSegment> segments;
  std::optional<std::string> language;
};

// ---------------------------------------------------------------------------
// Timestamps

namespace formats_internal {

inline bool IsDigit(char c) { return c >= '0' && c <= '9'; }

inline std::string_view Trim(std::string_view s) {
  const auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
    text.remove_prefix(3);
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == text.size()) break;
    pos = nl + 1;
  }
  return lines;
}

// Lines grouped into blocks separated by blank lines.
inline std::vector<std::vector<std::string_view>> SplitBlocks(
    std::string_view text) {
  std::vector<std::vector<std::string_view>> blocks;
  std::vector<std::string_view> cur;
  for (std::string_view line : SplitLines(text)) {
    if (Trim(line).empty()) {
      if (!cur.empty()) blocks.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(line);
    }
  }
  if (!cur.empty()) blocks.push_back(std::move(cur));
  return blocks;
}

inline double RoundMillis(double seconds) {
  return std::round(seconds * 1000.0) / 1000.0;
}

}  // namespace formats_internal

// Accepts hh:mm:ss, h:mm:ss, mm:ss and m:ss, each optionally followed by a
// fraction of one to three digits ("hh:mm:ss.mmm"). Minutes and seconds
// fields must be two digits in the three-field form and below 60.
inline TimeSec parse_timestamp(std::string_view s) {
  using formats_internal::IsDigit;
  if (s.empty()) throw TimestampSyntaxError("empty timestamp", 1);
  std::vector<std::pair<std::size_t, std::size_t>> fields;  // [begin, end)
  std::size_t frac_begin = std::string_view::npos;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ':' || s[i] == '.') {
      if (i == begin) {
        throw TimestampSyntaxError("expected digit", i + 1);
      }
      fields.emplace_back(begin, i);
      if (i < s.size() && s[i] == '.') {
        if (frac_begin != std::string_view::npos) {
          throw TimestampSyntaxError("second fraction separator", i + 1);
        }
        frac_begin = i + 1;
      } else if (i < s.size() && frac_begin != std::string_view::npos) {
        throw TimestampSyntaxError("':' after fraction", i + 1);
      }
      begin = i + 1;
    } else if (!IsDigit(s[i])) {
      throw TimestampSyntaxError(
          std::string("unexpected character '") + s[i] + "'", i + 1);
    }
  }
  std::optional<std::pair<std::size_t, std::size_t>> frac;
  if (frac_begin != std::string_view::npos) {
    frac = fields.back();
    fields.pop_back();
    if (frac->second - frac->first > 3) {
      throw TimestampSyntaxError("fraction has more than 3 digits",
                                 frac->first + 4);
    }
  }
  if (fields.size() < 2 || fields.size() > 3) {
    throw TimestampSyntaxError("expected mm:ss or hh:mm:ss", 1);
  }
  const auto value = [&](std::pair<std::size_t, std::size_t> f) {
    if (f.second - f.first > 12) {
      throw TimestampSyntaxError("field too long", f.first + 1);
    }
    std::int64_t v = 0;
    for (std::size_t k = f.first; k < f.second; ++k) v = v * 10 + (s[k] - '0');
    return v;
  };
  const auto check_sexagesimal = [&](std::pair<std::size_t, std::size_t> f,
                                     bool exactly_two) {
    const std::size_t width = f.second - f.first;
    if (width > 2 || (exactly_two && width != 2)) {
      throw TimestampSyntaxError("minutes/seconds field must be two digits",
                                 f.first + 1);
    }
    if (value(f) >= 60) {
      throw TimestampSyntaxError("minutes/seconds field must be below 60",
                                 f.first + 1);
    }
  };

  std::int64_t hours = 0;
  std::int64_t minutes = 0;
  std::int64_t seconds = 0;
  if (fields.size() == 3) {
    hours = value(fields[0]);
    check_sexagesimal(fields[1], true);
    check_sexagesimal(fields[2], true);
    minutes = value(fields[1]);
    seconds = value(fields[2]);
  } else {
    check_sexagesimal(fields[0], false);
    check_sexagesimal(fields[1], true);
    minutes = value(fields[0]);
    seconds = value(fields[1]);
  }
  std::int64_t millis = 0;
  if (frac) {
    millis = value(*frac);
    for (std::size_t w = frac->second - frac->first; w < 3; ++w) millis *= 10;
  }
  const std::int64_t total_ms =
      ((hours * 60 + minutes) * 60 + seconds) * 1000 + millis;
  return TimeSec(static_cast<double>(total_ms) / 1000.0);
}

// "hh:mm:ss", flooring any fraction. Hours widen past two digits as needed.
inline std::string format_timestamp(double seconds) {
  const auto whole = static_cast<std::int64_t>(std::floor(seconds + 1e-9));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld",
                static_cast<long long>(whole / 3600),
                static_cast<long long>((whole / 60) % 60),
                static_cast<long long>(whole % 60));
  return buf;
}

// "hh:mm:ss.mmm" rounded to the nearest millisecond.
inline std::string format_timestamp_millis(double seconds, char sep = '.') {
  const auto ms = static_cast<std::int64_t>(std::llround(seconds * 1000.0));
  const std::int64_t whole = ms / 1000;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld%c%03lld",
                static_cast<long long>(whole / 3600),
                static_cast<long long>((whole / 60) % 60),
                static_cast<long long>(whole % 60), sep,
                static_cast<long long>(ms % 1000));
  return buf;
}

// ---------------------------------------------------------------------------
// Timestamp chapter lists ("00:00 Intro" / "01:30 - Setup")

// Each non-blank line is "<timestamp> <title>" or "<timestamp> - <title>".
// Chapter k ends where chapter k+1 starts. The final chapter ends at a
// trailing title-less timestamp line when present, otherwise at `duration`.
inline ChapterDocument parse_chapter_list(
    std::string_view text, std::optional<TimeSec> duration = std::nullopt,
    std::string video_id = {}) {
  using formats_internal::Trim;
  struct Entry {
    TimeSec start;
    std::string title;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::optional<TimeSec> explicit_end;
  const auto lines = formats_internal::SplitLines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = Trim(lines[n]);
    if (line.empty()) continue;
    if (explicit_end) {
      throw FormatError("line " + std::to_string(n + 1) +
                        ": content after the end-time line");
    }
    std::size_t cut = 0;
    while (cut < line.size() && line[cut] != ' ' && line[cut] != '\t') ++cut;
    std::string_view stamp = line.substr(0, cut);
    std::string_view rest = Trim(line.substr(cut));
    TimeSec t;
    try {
      t = parse_timestamp(stamp);
    } catch (const TimestampSyntaxError& e) {
      throw TimestampSyntaxError(
          "line " + std::to_string(n + 1) + ": " + e.message(), e.column());
    }
    if (!entries.empty() && !(entries.back().start < t)) {
      throw NonMonotonicTimestampError(
          "line " + std::to_string(n + 1) + ": timestamp " +
          format_timestamp_millis(t.seconds()) + " does not follow " +
          format_timestamp_millis(entries.back().start.seconds()));
    }
    if (rest.size() >= 1 && (rest[0] == '-' || rest[0] == ':')) {
      rest = Trim(rest.substr(1));
    } else if (rest.substr(0, 3) == "\xE2\x80\x93") {  // en dash
      rest = Trim(rest.substr(3));
    }
    if (rest.empty()) {
      if (entries.empty()) {
        throw FormatError("line " + std::to_string(n + 1) +
                          ": end-time line without any chapter");
      }
      explicit_end = t;
      continue;
    }
    entries.push_back({t, std::string(rest), n + 1});
  }
  if (entries.empty()) throw EmptyTimelineError("chapter list is empty");

  TimeSec last_end;
  if (explicit_end) {
    last_end = *explicit_end;
  } else if (duration) {
    last_end = *duration;
  } else {
    throw MissingDurationError(
        "the last chapter needs an end-time line or an explicit duration");
  }
  std::vector<Chapter> chapters;
  chapters.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const TimeSec end = k + 1 < entries.size() ? entries[k + 1].start : last_end;
    if (!(entries[k].start < end)) {
      throw TimelineError("line " + std::to_string(entries[k].line) +
                          ": chapter starts at or after the video duration");
    }
    chapters.emplace_back(entries[k].start, end, entries[k].title);
  }
  return {ChapterTimeline(std::move(video_id), std::move(chapters), duration),
          ChapterFormat::kTimestampList};
}

// Writes one line per chapter plus a title-less end line unless the final
// chapter ends exactly at the timeline duration. Gaps between chapters and
// empty, padded or multi-line titles cannot be represented and are rejected.
inline std::string serialize_chapter_list(const ChapterTimeline& timeline) {
  const auto stamp = [](double t) {
    return t == std::floor(t) ? format_timestamp(t)
                              : format_timestamp_millis(t);
  };
  std::string out;
  const auto chapters = timeline.chapters();
  for (std::size_t k = 0; k < chapters.size(); ++k) {
    if (k + 1 < chapters.size() &&
        chapters[k].end() != chapters[k + 1].start()) {
      throw FormatError("chapter list cannot represent the gap after chapter " +
                        std::to_string(k));
    }
    const std::string& title = chapters[k].short_title;
    if (title.empty() || title != formats_internal::Trim(title) ||
        title.find_first_of("\r\n") != std::string::npos) {
      throw FormatError("chapter list cannot represent the title of chapter " +
                        std::to_string(k));
    }
    // A leading separator character would be eaten by the parser.
    const bool guard = title[0] == '-' || title[0] == ':' ||
                       title.rfind("\xE2\x80\x93", 0) == 0;
    out += stamp(chapters[k].start()) + (guard ? " - " : " ") + title + "\n";
  }
  if (!timeline.duration() ||
      timeline.duration()->seconds() != chapters.back().end()) {
    out += stamp(chapters.back().end()) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// WebVTT / SRT

namespace formats_internal {

inline void ReplaceAll(std::string& s, std::string_view from,
                       std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// Joins cue payload lines with single spaces, dropping markup tags and
// decoding the common character references.
inline std::string CueText(const std::vector<std::string_view>& lines) {
  std::string joined;
  for (std::string_view line : lines) {
    std::string_view t = Trim(line);
    if (t.empty()) continue;
    if (!joined.empty()) joined.push_back(' ');
    joined.append(t);
  }
  std::string out;
  bool in_tag = false;
  for (char c : joined) {
    if (c == '<') {
      in_tag = true;
    } else if (c == '>' && in_tag) {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  ReplaceAll(out, "&lt;", "<");
  ReplaceAll(out, "&gt;", ">");
  ReplaceAll(out, "&nbsp;", " ");
  ReplaceAll(out, "&amp;", "&");
  // Collapse whitespace runs introduced by tag removal.
  std::string collapsed;
  bool space = false;
  for (char c : out) {
    if (c == ' ' || c == '\t') {
      space = !collapsed.empty();
      continue;
    }
    if (space) collapsed.push_back(' ');
    space = false;
    collapsed.push_back(c);
  }
  return collapsed;
}

struct Cue {
  TimeSec start;
  TimeSec end;
  std::string text;
};

// Parses "start --> end [settings]". `comma_fraction` accepts SRT's
// "00:00:05,500".
inline std::pair<TimeSec, TimeSec> ParseTiming(std::string_view line,
                                               std::size_t cue_index,
                                               bool comma_fraction) {
  const std::size_t arrow = line.find("-->");
  if (arrow == std::string_view::npos) {
    throw CueSyntaxError("missing '-->' in timing line", cue_index);
  }
  std::string a(Trim(line.substr(0, arrow)));
  std::string_view right = Trim(line.substr(arrow + 3));
  std::size_t cut = 0;
  while (cut < right.size() && right[cut] != ' ' && right[cut] != '\t') ++cut;
  std::string b(right.substr(0, cut));
  if (comma_fraction) {
    std::replace(a.begin(), a.end(), ',', '.');
    std::replace(b.begin(), b.end(), ',', '.');
  }
  try {
    const TimeSec start = parse_timestamp(a);
    const TimeSec end = parse_timestamp(b);
    if (end < start) throw CueSyntaxError("cue ends before it starts", cue_index);
    return {start, end};
  } catch (const TimestampSyntaxError& e) {
    throw CueSyntaxError(e.what(), cue_index);
  }
}

inline std::vector<Cue> ParseVttCues(std::string_view text,
                                     std::optional<std::string>* language,
                                     Warnings* warnings) {
  auto blocks = SplitBlocks(text);
  if (blocks.empty() || Trim(blocks[0][0]).substr(0, 6) != "WEBVTT") {
    throw CueSyntaxError("missing WEBVTT header", 0);
  }
  const std::string_view header = Trim(blocks[0][0]);
  if (header.size() > 6 && header[6] != ' ' && header[6] != '\t') {
    throw CueSyntaxError("malformed WEBVTT header", 0);
  }
  for (std::size_t k = 1; k < blocks[0].size(); ++k) {
    std::string_view meta = Trim(blocks[0][k]);
    if (language != nullptr && meta.substr(0, 9) == "Language:") {
      *language = std::string(Trim(meta.substr(9)));
    }
  }
  std::vector<Cue> cues;
  std::size_t cue_index = 0;
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    std::string_view first = Trim(block[0]);
    if (first.substr(0, 4) == "NOTE" || first == "STYLE" || first == "REGION") {
      continue;
    }
    ++cue_index;
    std::size_t timing = 0;
    if (block[0].find("-->") == std::string_view::npos) timing = 1;
    if (timing >= block.size()) {
      throw CueSyntaxError("cue has no timing line", cue_index);
    }
    auto [start, end] = ParseTiming(block[timing], cue_index, false);
    std::vector<std::string_view> payload(block.begin() + timing + 1,
                                          block.end());
    std::string cue_text = CueText(payload);
    if (IsBlank(cue_text)) {
      Warn(warnings, "cue " + std::to_string(cue_index) +
                         " has empty text; skipped");
      continue;
    }
    cues.push_back({start, end, std::move(cue_text)});
  }
  return cues;
}

inline TranscriptDocument SortedTranscript(TranscriptDocument doc) {
  std::stable_sort(doc.segments.begin(), doc.segments.end(),
                   [](const TranscriptSegment& a, const TranscriptSegment& b) {
                     return a.start() < b.start();
                   });
  return doc;
}

}  // namespace formats_internal

// One ASR segment per cue, starting at the cue start.
inline TranscriptDocument parse_vtt_transcript(std::string_view text,
                                               Warnings* warnings = nullptr) {
  TranscriptDocument doc;
  for (auto& cue :
       formats_internal::ParseVttCues(text, &doc.language, warnings)) {
    doc.segments.emplace_back(cue.start, std::move(cue.text),
                              SegmentSource::kAsr);
  }
  return formats_internal::SortedTranscript(std::move(doc));
}

inline TranscriptDocument parse_srt_transcript(std::string_view text,
                                               Warnings* warnings = nullptr) {
  using formats_internal::Trim;
  TranscriptDocument doc;
  std::size_t cue_index = 0;
  for (const auto& block : formats_internal::SplitBlocks(text)) {
    ++cue_index;
    std::size_t timing = 0;
    std::string_view first = Trim(block[0]);
    if (!first.empty() &&
        std::all_of(first.begin(), first.end(), formats_internal::IsDigit)) {
      timing = 1;
    }
    if (timing >= block.size() ||
        block[timing].find("-->") == std::string_view::npos) {
      throw CueSyntaxError("expected '<index>' then a timing line", cue_index);
    }
    auto [start, end] =
        formats_internal::ParseTiming(block[timing], cue_index, true);
    (void)end;
    std::vector<std::string_view> payload(block.begin() + timing + 1,
                                          block.end());
    std::string cue_text = formats_internal::CueText(payload);
    if (IsBlank(cue_text)) {
      Warn(warnings, "cue " + std::to_string(cue_index) +
                         " has empty text; skipped");
      continue;
    }
    doc.segments.emplace_back(start, std::move(cue_text), SegmentSource::kAsr);
  }
  return formats_internal::SortedTranscript(std::move(doc));
}

// WebVTT chapter track: each cue is one chapter, the cue text its title.
inline ChapterDocument parse_vtt_chapters(std::string_view text,
                                          std::string video_id = {},
                                          Warnings* warnings = nullptr) {
  std::vector<Chapter> chapters;
  for (auto& cue : formats_internal::ParseVttCues(text, nullptr, warnings)) {
    chapters.emplace_back(cue.start, cue.end, std::move(cue.text));
  }
  return {ChapterTimeline(std::move(video_id), std::move(chapters),
                          std::nullopt, warnings),
          ChapterFormat::kWebVttChapters};
}

// Titles are escaped as cue text; empty and multi-line titles are rejected.
inline std::string serialize_vtt_chapters(const ChapterTimeline& timeline) {
  std::string out = "WEBVTT\n";
  std::size_t n = 0;
  for (const Chapter& c : timeline.chapters()) {
    if (IsBlank(c.short_title) ||
        c.short_title.find_first_of("\r\n") != std::string::npos) {
      throw FormatError("WebVTT cannot represent the title of chapter " +
                        std::to_string(n));
    }
    std::string title = c.short_title;
    formats_internal::ReplaceAll(title, "&", "&amp;");
    formats_internal::ReplaceAll(title, "<", "&lt;");
    formats_internal::ReplaceAll(title, ">", "&gt;");
    out += "\n" + std::to_string(++n) + "\n" +
           format_timestamp_millis(c.start()) + " --> " +
           format_timestamp_millis(c.end()) + "\n" + title + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical JSON

namespace formats_internal {

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson OptionalText(const std::optional<std::string>& s) {
  return s ? OrderedJson(*s) : OrderedJson(nullptr);
}

inline const nlohmann::json& Require(const nlohmann::json& obj,
                                     const char* key) {
  if (!obj.is_object()) throw FormatError("expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw FormatError(std::string("missing key \"") + key + "\"");
  }
  return *it;
}

inline std::string RequireString(const nlohmann::json& obj, const char* key) {
  const auto& v = Require(obj, key);
  if (!v.is_string()) {
    throw FormatError(std::string("\"") + key + "\" must be a string");
  }
  return v.get<std::string>();
}

inline double RequireNumber(const nlohmann::json& obj, const char* key) {
  const auto& v = Require(obj, key);
  if (!v.is_number()) {
    throw FormatError(std::string("\"") + key + "\" must be a number");
  }
  return v.get<double>();
}

inline std::optional<std::string> OptionalString(const nlohmann::json& obj,
                                                 const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw FormatError(std::string("\"") + key + "\" must be a string or null");
  }
  return it->get<std::string>();
}

inline nlohmann::json ParseJson(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace formats_internal

inline nlohmann::ordered_json timeline_to_json(const ChapterTimeline& timeline) {
  using formats_internal::OptionalText;
  using formats_internal::OrderedJson;
  using formats_internal::RoundMillis;
  OrderedJson doc;
  doc["video_id"] = timeline.video_id();
  doc["duration_s"] = timeline.duration()
                          ? OrderedJson(RoundMillis(timeline.duration()->seconds()))
                          : OrderedJson(nullptr);
  OrderedJson chapters = OrderedJson::array();
  for (const Chapter& c : timeline.chapters()) {
    OrderedJson j;
    j["start_s"] = RoundMillis(c.start());
    j["end_s"] = RoundMillis(c.end());
    j["short_title"] = c.short_title;
    j["title"] = OptionalText(c.title);
    j["abstract"] = OptionalText(c.abstract);
    j["introduction"] = OptionalText(c.introduction);
    chapters.push_back(std::move(j));
  }
  doc["chapters"] = std::move(chapters);
  return doc;
}

// Keys in schema order, two-space indent, times rounded to milliseconds,
// newline-terminated.
inline std::string serialize_canonical(const ChapterTimeline& timeline) {
  return timeline_to_json(timeline).dump(2) + "\n";
}

inline ChapterTimeline timeline_from_json(const nlohmann::json& doc,
                                          Warnings* warnings = nullptr) {
  using namespace formats_internal;
  try {
    std::string video_id = RequireString(doc, "video_id");
    std::optional<TimeSec> duration;
    const auto& d = Require(doc, "duration_s");
    if (!d.is_null()) {
      if (!d.is_number()) throw FormatError("\"duration_s\" must be a number");
      duration = TimeSec(d.get<double>());
    }
    const auto& list = Require(doc, "chapters");
    if (!list.is_array()) throw FormatError("\"chapters\" must be an array");
    std::vector<Chapter> chapters;
    chapters.reserve(list.size());
    for (const auto& item : list) {
      Chapter c(RequireNumber(item, "start_s"), RequireNumber(item, "end_s"),
                RequireString(item, "short_title"));
      c.title = OptionalString(item, "title");
      c.abstract = OptionalString(item, "abstract");
      c.introduction = OptionalString(item, "introduction");
      chapters.push_back(std::move(c));
    }
    return ChapterTimeline(std::move(video_id), std::move(chapters), duration,
                           warnings);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid chapter document: ") + e.what());
  }
}

inline ChapterTimeline parse_canonical(std::string_view text,
                                       Warnings* warnings = nullptr) {
  return timeline_from_json(formats_internal::ParseJson(text), warnings);
}

inline std::string_view SourceName(SegmentSource source) {
  return source == SegmentSource::kAsr ? "asr" : "visual";
}

inline std::string serialize_transcript_json(const TranscriptDocument& doc) {
  using formats_internal::OrderedJson;
  OrderedJson j;
  j["video_id"] = doc.video_id;
  OrderedJson segments = OrderedJson::array();
  for (const TranscriptSegment& s : doc.segments) {
    OrderedJson item;
    item["start_s"] = formats_internal::RoundMillis(s.start());
    item["text"] = s.text();
    item["source"] = SourceName(s.source());
    segments.push_back(std::move(item));
  }
  j["segments"] = std::move(segments);
  return j.dump(2) + "\n";
}

inline TranscriptDocument parse_transcript_json(std::string_view text) {
  using namespace formats_internal;
  const nlohmann::json j = ParseJson(text);
  try {
    TranscriptDocument doc;
    doc.video_id = RequireString(j, "video_id");
    const auto& list = Require(j, "segments");
    if (!list.is_array()) throw FormatError("\"segments\" must be an array");
    for (const auto& item : list) {
      const std::string source = RequireString(item, "source");
      SegmentSource src;
      if (source == "asr") {
        src = SegmentSource::kAsr;
      } else if (source == "visual") {
        src = SegmentSource::kVisual;
      } else {
        throw FormatError("unknown segment source \"" + source + "\"");
      }
      doc.segments.emplace_back(TimeSec(RequireNumber(item, "start_s")),
                                RequireString(item, "text"), src);
    }
    return SortedTranscript(std::move(doc));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid transcript document: ") + e.what());
  }
}

}  // namespace chaptereval

#endif  // CHAPTEREVAL_FORMATS_HPP_
