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

#ifndef CHAPTEREVAL_ERRORS_HPP_
#define CHAPTEREVAL_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chaptereval {

// Root of every error thrown by the library. Callers that only need to
// distinguish "bad input" from programming errors can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// chapter-core
class InvalidTimeError : public Error {
 public:
  using Error::Error;
};
class InvalidChapterError : public Error {
 public:
  using Error::Error;
};
class TimelineError : public Error {
 public:
  using Error::Error;
};
class EmptyTimelineError : public TimelineError {
 public:
  using TimelineError::TimelineError;
};
class GroupShapeError : public Error {
 public:
  using Error::Error;
};
class BucketGapError : public Error {
 public:
  using Error::Error;
};

// formats
class FormatError : public Error {
 public:
  using Error::Error;
};

class TimestampSyntaxError : public FormatError {
 public:
  TimestampSyntaxError(const std::string& what, std::size_t column)
      : FormatError(what + " (column " + std::to_string(column) + ")"),
        message_(what),
        column_(column) {}
  // 1-based column of the offending character.
  std::size_t column() const { return column_; }
  // The description without the column suffix.
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::size_t column_;
};

class NonMonotonicTimestampError : public FormatError {
 public:
  using FormatError::FormatError;
};
class MissingDurationError : public FormatError {
 public:
  using FormatError::FormatError;
};

class CueSyntaxError : public FormatError {
 public:
  CueSyntaxError(const std::string& what, std::size_t cue_index)
      : FormatError("cue " + std::to_string(cue_index) + ": " + what),
        cue_index_(cue_index) {}
  std::size_t cue_index() const { return cue_index_; }

 private:
  std::size_t cue_index_;
};

// alignment
class InstanceTooLargeError : public Error {
 public:
  using Error::Error;
};

// textsim
class MissingFieldError : public Error {
 public:
  MissingFieldError(const std::string& field, std::size_t chapter_index)
      : Error("chapter " + std::to_string(chapter_index) + " has no " + field),
        chapter_index_(chapter_index) {}
  std::size_t chapter_index() const { return chapter_index_; }

 private:
  std::size_t chapter_index_;
};
class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};
class ScorerProtocolError : public Error {
 public:
  using Error::Error;
};
class ScorerTimeoutError : public Error {
 public:
  using Error::Error;
};
class MissingResponseError : public Error {
 public:
  explicit MissingResponseError(const std::string& id)
      : Error("scorer did not answer request id \"" + id + "\""), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

// metrics / cli
class ConfigError : public Error {
 public:
  using Error::Error;
};

// pipeline
class PerturbationInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics (clamped overlaps, skipped cues) are appended here
// when the caller supplies a sink.
using Warnings = std::vector<std::string>;

inline void Warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace chaptereval

#endif  // CHAPTEREVAL_ERRORS_HPP_
