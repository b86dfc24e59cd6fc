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

// Order-preserving matchers between a predicted and a ground-truth timeline.
//
// match_groups() partitions both chapter sequences into K aligned pairs of
// contiguous groups (P_1,G_1)..(P_K,G_K) where every pair is one-to-many or
// many-to-one, maximizing the summed group score (mean pairwise IoU by
// default). The recurrence runs over prefix pairs (i, j):
//
//   D[0][0] = 0
//   D[i][j] = max( max_{1<=k<=j} D[i-1][j-k] + score(p_i, g_{j-k+1..j}),
//                  max_{2<=k<=i} D[i-k][j-1] + score(p_{i-k+1..i}, g_j) )
//
// which enforces disjointness and coverage on both sides by construction.
// A warping path in the classic DTW sense can reuse an index across two runs
// and is therefore not used.
//
// Ties (within kTieEpsilon) are broken by fewer groups first; among equal
// group counts the first candidate in enumeration order wins, where
// one-pred-to-many-gt shapes are enumerated before many-pred-to-one-gt
// shapes and group widths in ascending order.

#ifndef CHAPTEREVAL_ALIGNMENT_HPP_
#define CHAPTEREVAL_ALIGNMENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "chaptereval/chapter.hpp"
#include "chaptereval/errors.hpp"

namespace chaptereval {

// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct GroupPair {
  IndexRange pred;
  IndexRange gt;
  double phi = 0.0;
};

struct GroupMatching {
  std::vector<GroupPair> groups;
  // Sum of the matcher's group scores; equals the sum of phi for the default
  // objective.
  double objective = 0.0;
};

struct OneToOneMatching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total = 0.0;
};

inline constexpr double kTieEpsilon = 1e-12;

namespace alignment_internal {

inline bool Exceeds(double a, double b) {
  return a > b + kTieEpsilon * std::max(1.0, std::abs(b));
}

// Row-wise and column-wise prefix sums of the IoU matrix so that the mean IoU
// of any one-to-many or many-to-one group is O(1).
class IouTable {
 public:
  IouTable(std::span<const Chapter> preds, std::span<const Chapter> gts)
      : n_(preds.size()),
        m_(gts.size()),
        row_(n_ * (m_ + 1), 0.0),
        col_(m_ * (n_ + 1), 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        const double v = iou(preds[i], gts[j]);
        row_[i * (m_ + 1) + j + 1] = row_[i * (m_ + 1) + j] + v;
        col_[j * (n_ + 1) + i + 1] = col_[j * (n_ + 1) + i] + v;
      }
    }
  }

  double Phi(IndexRange p, IndexRange g) const {
    if (p.size() == 1) {
      const std::size_t base = p.begin * (m_ + 1);
      return (row_[base + g.end] - row_[base + g.begin]) /
             static_cast<double>(g.size());
    }
    const std::size_t base = g.begin * (n_ + 1);
    return (col_[base + p.end] - col_[base + p.begin]) /
           static_cast<double>(p.size());
  }

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<double> row_;
  std::vector<double> col_;
};

// Shape-level DP over an n x m grid. `score(pred_range, gt_range)` is called
// only for one-to-many / many-to-one ranges.
template <typename RangeScore>
std::vector<std::pair<IndexRange, IndexRange>> SolveGroups(std::size_t n,
                                                           std::size_t m,
                                                           RangeScore&& score) {
  struct Cell {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t groups = 0;
    std::size_t prev_i = 0;
    std::size_t prev_j = 0;
    bool reachable = false;
  };
  std::vector<Cell> d((n + 1) * (m + 1));
  const auto at = [&](std::size_t i, std::size_t j) -> Cell& {
    return d[i * (m + 1) + j];
  };
  at(0, 0).value = 0.0;
  at(0, 0).reachable = true;

  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      Cell best;
      const auto consider = [&](std::size_t pi, std::size_t pj, double s) {
        const Cell& prev = at(pi, pj);
        if (!prev.reachable) return;
        const double v = prev.value + s;
        const std::size_t g = prev.groups + 1;
        const bool better =
            !best.reachable || Exceeds(v, best.value) ||
            (!Exceeds(best.value, v) && g < best.groups);
        if (better) {
          best.value = v;
          best.groups = g;
          best.prev_i = pi;
          best.prev_j = pj;
          best.reachable = true;
        }
      };
      for (std::size_t k = 1; k <= j; ++k) {
        consider(i - 1, j - k, score(IndexRange{i - 1, i}, IndexRange{j - k, j}));
      }
      for (std::size_t k = 2; k <= i; ++k) {
        consider(i - k, j - 1, score(IndexRange{i - k, i}, IndexRange{j - 1, j}));
      }
      at(i, j) = best;
    }
  }

  std::vector<std::pair<IndexRange, IndexRange>> shapes;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const Cell& c = at(i, j);
    shapes.emplace_back(IndexRange{c.prev_i, i}, IndexRange{c.prev_j, j});
    i = c.prev_i;
    j = c.prev_j;
  }
  std::reverse(shapes.begin(), shapes.end());
  return shapes;
}

inline void RequireNonEmpty(const ChapterTimeline& preds,
                            const ChapterTimeline& gts) {
  if (preds.size() == 0 || gts.size() == 0) {
    throw EmptyTimelineError("matching needs non-empty timelines");
  }
}

}  // namespace alignment_internal

// Maximizes the sum of mean pairwise IoU over valid group partitions.
inline GroupMatching match_groups(const ChapterTimeline& preds,
                                  const ChapterTimeline& gts) {
  alignment_internal::RequireNonEmpty(preds, gts);
  const alignment_internal::IouTable table(preds.chapters(), gts.chapters());
  const auto shapes = alignment_internal::SolveGroups(
      preds.size(), gts.size(),
      [&](IndexRange p, IndexRange g) { return table.Phi(p, g); });
  GroupMatching result;
  for (const auto& [p, g] : shapes) {
    const double v = table.Phi(p, g);
    result.groups.push_back({p, g, v});
    result.objective += v;
  }
  return result;
}

// Same partition search with a caller-supplied group objective, called as
// objective(pred_chapters, gt_chapters). phi is still reported per group.
template <typename GroupObjective>
GroupMatching match_groups(const ChapterTimeline& preds,
                           const ChapterTimeline& gts,
                           GroupObjective&& objective) {
  alignment_internal::RequireNonEmpty(preds, gts);
  const auto pc = preds.chapters();
  const auto gc = gts.chapters();
  const auto slice = [](std::span<const Chapter> s, IndexRange r) {
    return s.subspan(r.begin, r.size());
  };
  const auto shapes = alignment_internal::SolveGroups(
      preds.size(), gts.size(), [&](IndexRange p, IndexRange g) {
        return static_cast<double>(objective(slice(pc, p), slice(gc, g)));
      });
  GroupMatching result;
  for (const auto& [p, g] : shapes) {
    result.groups.push_back({p, g, phi(slice(pc, p), slice(gc, g))});
    result.objective +=
        static_cast<double>(objective(slice(pc, p), slice(gc, g)));
  }
  return result;
}

inline constexpr std::size_t kBruteForceLimit = 8;

// Exhaustive enumeration of every valid group partition. Test oracle for
// match_groups(); limited to kBruteForceLimit chapters per side.
inline GroupMatching match_groups_bruteforce(const ChapterTimeline& preds,
                                             const ChapterTimeline& gts) {
  alignment_internal::RequireNonEmpty(preds, gts);
  const std::size_t n = preds.size();
  const std::size_t m = gts.size();
  if (n > kBruteForceLimit || m > kBruteForceLimit) {
    throw InstanceTooLargeError("brute force supports at most " +
                                std::to_string(kBruteForceLimit) +
                                " chapters per side");
  }
  const auto pc = preds.chapters();
  const auto gc = gts.chapters();

  GroupMatching best;
  bool have_best = false;
  std::vector<GroupPair> stack;

  std::function<void(std::size_t, std::size_t, double)> walk =
      [&](std::size_t i, std::size_t j, double total) {
        if (i == n && j == m) {
          const bool better =
              !have_best || alignment_internal::Exceeds(total, best.objective) ||
              (!alignment_internal::Exceeds(best.objective, total) &&
               stack.size() < best.groups.size());
          if (better) {
            best.groups = stack;
            best.objective = total;
            have_best = true;
          }
          return;
        }
        if (i == n || j == m) return;  // one side exhausted: dead end
        for (std::size_t k = 1; j + k <= m; ++k) {
          const double v = phi(pc.subspan(i, 1), gc.subspan(j, k));
          stack.push_back({{i, i + 1}, {j, j + k}, v});
          walk(i + 1, j + k, total + v);
          stack.pop_back();
        }
        for (std::size_t k = 2; i + k <= n; ++k) {
          const double v = phi(pc.subspan(i, k), gc.subspan(j, 1));
          stack.push_back({{i, i + k}, {j, j + 1}, v});
          walk(i + k, j + 1, total + v);
          stack.pop_back();
        }
      };
  walk(0, 0, 0.0);
  return best;
}

// Order-preserving one-to-one assignment on an n x m score grid, by the
// longest-common-subsequence recurrence
//   D[i][j] = max(D[i-1][j], D[i][j-1], D[i-1][j-1] + score(i, j)).
// Pairs that do not strictly improve on skipping are left unmatched, so
// zero-score pairs never appear in the result.
template <typename ScoreAt>
OneToOneMatching match_one_to_one_grid(std::size_t n, std::size_t m,
                                       ScoreAt&& score_at) {
  std::vector<double> s(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double v = static_cast<double>(score_at(i, j));
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error("pair scores must be finite and non-negative");
      }
      s[i * m + j] = v;
    }
  }
  std::vector<double> d((n + 1) * (m + 1), 0.0);
  const auto at = [&](std::size_t i, std::size_t j) -> double& {
    return d[i * (m + 1) + j];
  };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      at(i, j) = std::max({at(i - 1, j), at(i, j - 1),
                           at(i - 1, j - 1) + s[(i - 1) * m + (j - 1)]});
    }
  }
  OneToOneMatching result;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 && j > 0) {
    const double skip = std::max(at(i - 1, j), at(i, j - 1));
    const double pair = s[(i - 1) * m + (j - 1)];
    if (pair > 0.0 && alignment_internal::Exceeds(at(i - 1, j - 1) + pair, skip)) {
      result.pairs.emplace_back(i - 1, j - 1);
      --i;
      --j;
    } else if (at(i - 1, j) >= at(i, j - 1)) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(result.pairs.begin(), result.pairs.end());
  for (const auto& [pi, gj] : result.pairs) result.total += s[pi * m + gj];
  return result;
}

template <typename PairScore>
OneToOneMatching match_one_to_one(const ChapterTimeline& preds,
                                  const ChapterTimeline& gts,
                                  PairScore&& pair_score) {
  const auto pc = preds.chapters();
  const auto gc = gts.chapters();
  return match_one_to_one_grid(
      pc.size(), gc.size(),
      [&](std::size_t i, std::size_t j) { return pair_score(pc[i], gc[j]); });
}

}  // namespace chaptereval

#endif  // CHAPTEREVAL_ALIGNMENT_HPP_
