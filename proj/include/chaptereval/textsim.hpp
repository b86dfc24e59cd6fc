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

// Group-text similarity: group caption concatenation, a deterministic token
// F1 scorer, corpus CIDEr-D, and the client side of the textsim/1 protocol
// for an external (neural) scorer process.

#ifndef CHAPTEREVAL_TEXTSIM_HPP_
#define CHAPTEREVAL_TEXTSIM_HPP_

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaptereval/chapter.hpp"
#include "chaptereval/errors.hpp"
#include "chaptereval/text.hpp"

namespace chaptereval {

// Joins the requested field of every chapter in temporal order and
// normalizes the result. `first_index` offsets the index reported in
// MissingFieldError so callers can name the chapter in its timeline.
inline std::string concat_group_text(std::span<const Chapter> group,
                                     TextField field,
                                     std::size_t first_index = 0) {
  std::string joined;
  for (std::size_t k = 0; k < group.size(); ++k) {
    const auto text = group[k].text(field);
    if (!text) {
      throw MissingFieldError(std::string(TextFieldName(field)),
                              first_index + k);
    }
    if (k > 0) joined.push_back(' ');
    joined.append(*text);
  }
  return NormalizeText(joined);
}

// Harmonic mean of token-multiset precision and recall.
inline double lexical_f1(std::string_view candidate,
                         std::string_view reference) {
  const auto cand = Tokenize(candidate);
  const auto ref = Tokenize(reference);
  if (cand.empty() && ref.empty()) return 1.0;
  if (cand.empty() || ref.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : ref) ++counts[t];
  std::size_t overlap = 0;
  for (const auto& t : cand) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision =
      static_cast<double>(overlap) / static_cast<double>(cand.size());
  const double recall =
      static_cast<double>(overlap) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

// ---------------------------------------------------------------------------
// CIDEr-D

inline constexpr int kCiderMaxOrder = 4;
inline constexpr double kCiderSigma = 6.0;
inline constexpr double kCiderScale = 10.0;

namespace textsim_internal {

using NgramCounts = std::map<std::string, double>;

inline std::vector<NgramCounts> CountNgrams(
    const std::vector<std::string>& tokens) {
  std::vector<NgramCounts> out(kCiderMaxOrder);
  for (int n = 1; n <= kCiderMaxOrder; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key;
      for (int k = 0; k < n; ++k) {
        if (k > 0) key.push_back('\x1f');
        key += tokens[i + k];
      }
      out[n - 1][key] += 1.0;
    }
  }
  return out;
}

}  // namespace textsim_internal

// Per-item CIDEr-D with one reference per item and document frequencies
// taken from the reference list.
//
// Each item score is 10 x the mean, over n-gram orders present in the
// reference (1..min(4, reference length)), of the clipped cosine between
// TF-IDF vectors times the length penalty exp(-(lc - lr)^2 / (2 sigma^2)).
// IDF is log((N + 1) / max(1, df)), which stays positive when an n-gram
// occurs in every reference. An empty reference scores 10 against an empty
// candidate and 0 otherwise.
inline std::vector<double> cider_d_items(std::span<const std::string> candidates,
                                         std::span<const std::string> references) {
  using textsim_internal::NgramCounts;
  if (candidates.empty() || candidates.size() != references.size()) {
    throw EmptyCorpusError(
        "CIDEr-D needs equally many candidates and references (at least one)");
  }
  const std::size_t items = references.size();
  std::vector<std::vector<std::string>> cand_tokens(items);
  std::vector<std::vector<std::string>> ref_tokens(items);
  std::vector<std::vector<NgramCounts>> cand_grams(items);
  std::vector<std::vector<NgramCounts>> ref_grams(items);
  std::vector<std::unordered_map<std::string, double>> df(kCiderMaxOrder);
  for (std::size_t k = 0; k < items; ++k) {
    cand_tokens[k] = Tokenize(NormalizeText(candidates[k]));
    ref_tokens[k] = Tokenize(NormalizeText(references[k]));
    cand_grams[k] = textsim_internal::CountNgrams(cand_tokens[k]);
    ref_grams[k] = textsim_internal::CountNgrams(ref_tokens[k]);
    for (int n = 0; n < kCiderMaxOrder; ++n) {
      for (const auto& [gram, count] : ref_grams[k][n]) df[n][gram] += 1.0;
    }
  }
  const double log_docs = std::log(static_cast<double>(items) + 1.0);
  const auto idf = [&](int n, const std::string& gram) {
    auto it = df[n].find(gram);
    const double f = it == df[n].end() ? 1.0 : std::max(1.0, it->second);
    return log_docs - std::log(f);
  };

  std::vector<double> scores(items, 0.0);
  for (std::size_t k = 0; k < items; ++k) {
    const std::size_t lr = ref_tokens[k].size();
    const std::size_t lc = cand_tokens[k].size();
    if (lr == 0) {
      scores[k] = lc == 0 ? kCiderScale : 0.0;
      continue;
    }
    const int orders = static_cast<int>(
        std::min<std::size_t>(kCiderMaxOrder, lr));
    const double delta = static_cast<double>(lc) - static_cast<double>(lr);
    const double penalty =
        std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
    double sum = 0.0;
    for (int n = 0; n < orders; ++n) {
      double norm_c = 0.0;
      double norm_r = 0.0;
      double dot = 0.0;
      for (const auto& [gram, tf] : cand_grams[k][n]) {
        const double w = tf * idf(n, gram);
        norm_c += w * w;
      }
      for (const auto& [gram, tf] : ref_grams[k][n]) {
        const double w = tf * idf(n, gram);
        norm_r += w * w;
        auto it = cand_grams[k][n].find(gram);
        if (it != cand_grams[k][n].end()) {
          dot += std::min(it->second * idf(n, gram), w) * w;
        }
      }
      if (norm_c > 0.0 && norm_r > 0.0) {
        sum += dot / (std::sqrt(norm_c) * std::sqrt(norm_r)) * penalty;
      }
    }
    scores[k] = kCiderScale * sum / static_cast<double>(orders);
  }
  return scores;
}

// Corpus CIDEr-D: mean of the per-item scores.
inline double cider_d(std::span<const std::string> candidates,
                      std::span<const std::string> references) {
  const auto items = cider_d_items(candidates, references);
  double sum = 0.0;
  for (double s : items) sum += s;
  return sum / static_cast<double>(items.size());
}

// ---------------------------------------------------------------------------
// Scorers

enum class ScorerKind { kLexicalF1, kExternal };

struct ScoreRequest {
  std::string id;
  std::string candidate;
  std::string reference;
};

struct ScoreResponse {
  std::string id;
  double score = 0.0;
  friend bool operator==(const ScoreResponse&, const ScoreResponse&) = default;
};

inline double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual ScorerKind kind() const = 0;
  virtual bool supports_batch() const = 0;
  virtual std::string backend() const = 0;
  // Answers every request; order of the result is unspecified.
  virtual std::vector<ScoreResponse> Score(
      std::span<const ScoreRequest> requests) = 0;
};

class LexicalScorer final : public SimilarityScorer {
 public:
  ScorerKind kind() const override { return ScorerKind::kLexicalF1; }
  bool supports_batch() const override { return true; }
  std::string backend() const override { return "lexical_f1"; }
  std::vector<ScoreResponse> Score(
      std::span<const ScoreRequest> requests) override {
    std::vector<ScoreResponse> out;
    out.reserve(requests.size());
    for (const ScoreRequest& r : requests) {
      out.push_back({r.id, lexical_f1(NormalizeText(r.candidate),
                                      NormalizeText(r.reference))});
    }
    return out;
  }
};

// Runs the batch, checks that every request id is answered exactly once and
// returns the clamped responses in request order.
inline std::vector<ScoreResponse> score_batch(
    SimilarityScorer& scorer, std::span<const ScoreRequest> requests) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < requests.size(); ++k) {
    if (!index.emplace(requests[k].id, k).second) {
      throw ScorerProtocolError("duplicate request id \"" + requests[k].id +
                                "\"");
    }
  }
  if (requests.empty()) return {};
  std::vector<std::optional<double>> scores(requests.size());
  for (const ScoreResponse& r : scorer.Score(requests)) {
    auto it = index.find(r.id);
    if (it == index.end()) {
      throw ScorerProtocolError("response for unknown id \"" + r.id + "\"");
    }
    if (scores[it->second]) {
      throw ScorerProtocolError("id \"" + r.id + "\" answered twice");
    }
    if (!std::isfinite(r.score)) {
      throw ScorerProtocolError("non-finite score for id \"" + r.id + "\"");
    }
    scores[it->second] = Clamp01(r.score);
  }
  std::vector<ScoreResponse> out;
  out.reserve(requests.size());
  for (std::size_t k = 0; k < requests.size(); ++k) {
    if (!scores[k]) throw MissingResponseError(requests[k].id);
    out.push_back({requests[k].id, *scores[k]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// textsim/1 wire protocol

inline constexpr std::string_view kProtocolName = "textsim/1";

inline std::string EncodeRequestLine(const ScoreRequest& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["candidate"] = r.candidate;
  j["reference"] = r.reference;
  return j.dump() + "\n";
}

inline std::string EncodeFlushLine() { return "{\"flush\":true}\n"; }
inline std::string EncodeDoneLine() { return "{\"done\":true}\n"; }

inline std::string EncodeHandshakeLine(std::string_view backend) {
  nlohmann::ordered_json j;
  j["protocol"] = kProtocolName;
  j["backend"] = backend;
  return j.dump() + "\n";
}

inline std::string EncodeResponseLine(const ScoreResponse& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["score"] = r.score;
  return j.dump() + "\n";
}

// Returns the backend name announced by a handshake line.
inline std::string DecodeHandshake(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ScorerProtocolError("handshake is not JSON: " + std::string(line));
  }
  if (!j.is_object() || !j.contains("protocol") || !j["protocol"].is_string() ||
      j["protocol"].get<std::string>() != kProtocolName ||
      !j.contains("backend") || !j["backend"].is_string()) {
    throw ScorerProtocolError("unexpected handshake: " + std::string(line));
  }
  return j["backend"].get<std::string>();
}

// One line of the sidecar's answer stream.
struct ResponseLine {
  bool done = false;
  ScoreResponse response;
};

inline ResponseLine DecodeResponseLine(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ScorerProtocolError("response is not JSON: " + std::string(line));
  }
  if (!j.is_object()) {
    throw ScorerProtocolError("response is not an object: " + std::string(line));
  }
  if (j.contains("error")) {
    throw ScorerProtocolError("scorer reported error: " + j["error"].dump());
  }
  if (j.contains("done")) {
    if (j["done"] != true) throw ScorerProtocolError("malformed done marker");
    return {true, {}};
  }
  if (!j.contains("id") || !j["id"].is_string() || !j.contains("score") ||
      !j["score"].is_number()) {
    throw ScorerProtocolError("malformed response line: " + std::string(line));
  }
  return {false, {j["id"].get<std::string>(), j["score"].get<double>()}};
}

// Client for a sidecar process speaking textsim/1 on stdin/stdout. Batches
// are serialized through an internal lock. Constructing one ignores SIGPIPE
// process-wide so a dying sidecar surfaces as ScorerProtocolError.
class ExternalScorer final : public SimilarityScorer {
 public:
  ExternalScorer(std::vector<std::string> argv,
                 std::chrono::milliseconds timeout)
      : timeout_(timeout) {
    if (argv.empty()) throw ConfigError("external scorer command is empty");
    ::signal(SIGPIPE, SIG_IGN);
    Spawn(argv);
    const auto deadline = Clock::now() + timeout_;
    auto line = ReadLine(deadline);
    if (!line) {
      Kill();
      throw ScorerProtocolError("scorer exited before its handshake");
    }
    try {
      backend_ = DecodeHandshake(*line);
    } catch (...) {
      Kill();
      throw;
    }
  }

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  ~ExternalScorer() override {
    if (pid_ > 0) Close();
  }

  ScorerKind kind() const override { return ScorerKind::kExternal; }
  bool supports_batch() const override { return true; }
  std::string backend() const override { return backend_; }

  std::vector<ScoreResponse> Score(
      std::span<const ScoreRequest> requests) override {
    std::lock_guard<std::mutex> lock(mu_);
    if (broken_ || pid_ <= 0) {
      throw ScorerProtocolError("scorer connection is no longer usable");
    }
    try {
      const auto deadline = Clock::now() + timeout_;
      std::string payload;
      for (const ScoreRequest& r : requests) payload += EncodeRequestLine(r);
      payload += EncodeFlushLine();
      WriteAll(payload, deadline);
      std::vector<ScoreResponse> out;
      while (true) {
        auto line = ReadLine(deadline);
        if (!line) throw ScorerProtocolError("scorer closed its output early");
        ResponseLine decoded = DecodeResponseLine(*line);
        if (decoded.done) break;
        out.push_back(std::move(decoded.response));
      }
      return out;
    } catch (...) {
      broken_ = true;
      Kill();
      throw;
    }
  }

  // Closes the sidecar's stdin and waits for it to exit. Returns the exit
  // status, or -1 when it had to be killed.
  int Close() {
    if (in_fd_ >= 0) {
      ::close(in_fd_);
      in_fd_ = -1;
    }
    int status = -1;
    if (pid_ > 0) {
      const auto deadline = Clock::now() + std::chrono::seconds(5);
      while (true) {
        const pid_t r = ::waitpid(pid_, &status, WNOHANG);
        if (r == pid_) break;
        if (r < 0 || Clock::now() > deadline) {
          ::kill(pid_, SIGKILL);
          ::waitpid(pid_, &status, 0);
          status = -1;
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
      pid_ = -1;
    }
    if (out_fd_ >= 0) {
      ::close(out_fd_);
      out_fd_ = -1;
    }
    if (status >= 0 && WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
  }

 private:
  using Clock = std::chrono::steady_clock;

  void Spawn(const std::vector<std::string>& argv) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw Error("pipe() failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error("pipe() failed");
    }
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    pid_ = ::fork();
    if (pid_ < 0) throw Error("fork() failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execvp(cargv[0], cargv.data());
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    ::fcntl(in_fd_, F_SETFD, FD_CLOEXEC);
    ::fcntl(out_fd_, F_SETFD, FD_CLOEXEC);
    ::fcntl(in_fd_, F_SETFL, ::fcntl(in_fd_, F_GETFL) | O_NONBLOCK);
  }

  int RemainingMs(Clock::time_point deadline) const {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (left.count() <= 0) {
      throw ScorerTimeoutError("scorer did not answer within " +
                               std::to_string(timeout_.count()) + " ms");
    }
    return static_cast<int>(std::min<long long>(left.count(), 1 << 30));
  }

  void WriteAll(std::string_view data, Clock::time_point deadline) {
    while (!data.empty()) {
      pollfd p{in_fd_, POLLOUT, 0};
      const int ready = ::poll(&p, 1, RemainingMs(deadline));
      if (ready < 0 && errno == EINTR) continue;
      if (ready == 0) continue;  // RemainingMs throws once expired
      if (ready < 0 || (p.revents & (POLLERR | POLLHUP))) {
        throw ScorerProtocolError("scorer closed its input");
      }
      const ssize_t n = ::write(in_fd_, data.data(), data.size());
      if (n < 0) {
        if (errno == EAGAIN || errno == EINTR) continue;
        throw ScorerProtocolError(std::string("write to scorer failed: ") +
                                  std::strerror(errno));
      }
      data.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  // Next newline-terminated line, or nullopt on EOF.
  std::optional<std::string> ReadLine(Clock::time_point deadline) {
    while (true) {
      const std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      pollfd p{out_fd_, POLLIN, 0};
      const int ready = ::poll(&p, 1, RemainingMs(deadline));
      if (ready < 0 && errno == EINTR) continue;
      if (ready == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(out_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw ScorerProtocolError("read from scorer failed");
      }
      if (n == 0) return std::nullopt;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void Kill() {
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
    if (in_fd_ >= 0) ::close(in_fd_);
    if (out_fd_ >= 0) ::close(out_fd_);
    in_fd_ = out_fd_ = -1;
  }

  std::chrono::milliseconds timeout_;
  std::string backend_;
  std::string buffer_;
  std::mutex mu_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  bool broken_ = false;
};

}  // namespace chaptereval

#endif  // CHAPTEREVAL_TEXTSIM_HPP_
