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


#include "chaptereval/alignment.hpp"

#include <random>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace chaptereval {
namespace {

using ::chaptereval::testing::BruteForceOneToOne;
using ::chaptereval::testing::Contiguous;
using ::chaptereval::testing::Make;
using ::chaptereval::testing::PartitionViolation;
using ::chaptereval::testing::RandomTimeline;
using ::chaptereval::testing::TimelineSpec;
using ::chaptereval::testing::Transform;
using ::chaptereval::testing::Uniform;

bool SameRange(IndexRange r, std::size_t begin, std::size_t end) {
  return r.begin == begin && r.end == end;
}

TEST(MatchGroupsTest, IdentityGivesSingletons) {
  const ChapterTimeline t = Contiguous({10, 20, 5, 7});
  const GroupMatching m = match_groups(t, t);
  ASSERT_EQ(m.groups.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_TRUE(SameRange(m.groups[k].pred, k, k + 1));
    EXPECT_TRUE(SameRange(m.groups[k].gt, k, k + 1));
    EXPECT_DOUBLE_EQ(m.groups[k].phi, 1.0);
  }
  EXPECT_DOUBLE_EQ(m.objective, 4.0);
}

TEST(MatchGroupsTest, TwoVersusThree) {
  const ChapterTimeline p = Make({{0, 10}, {10, 20}});
  const ChapterTimeline g = Make({{0, 5}, {5, 10}, {10, 20}});
  const GroupMatching m = match_groups(p, g);
  ASSERT_EQ(m.groups.size(), 2u);
  EXPECT_TRUE(SameRange(m.groups[0].pred, 0, 1));
  EXPECT_TRUE(SameRange(m.groups[0].gt, 0, 2));
  EXPECT_DOUBLE_EQ(m.groups[0].phi, 0.5);
  EXPECT_TRUE(SameRange(m.groups[1].pred, 1, 2));
  EXPECT_TRUE(SameRange(m.groups[1].gt, 2, 3));
  EXPECT_DOUBLE_EQ(m.groups[1].phi, 1.0);
  EXPECT_DOUBLE_EQ(m.objective, 1.5);
  EXPECT_DOUBLE_EQ(match_groups_bruteforce(p, g).objective, 1.5);
}

TEST(MatchGroupsTest, SinglePredictionTakesEverything) {
  const ChapterTimeline p = Make({{0, 30}});
  const ChapterTimeline g = Make({{0, 5}, {5, 12}, {12, 30}});
  const GroupMatching m = match_groups(p, g);
  ASSERT_EQ(m.groups.size(), 1u);
  EXPECT_TRUE(SameRange(m.groups[0].gt, 0, 3));
  EXPECT_DOUBLE_EQ(m.objective, phi(p.chapters(), g.chapters()));
}

TEST(MatchGroupsTest, ManyToOneOnPredictionSide) {
  const ChapterTimeline p = Make({{0, 5}, {5, 10}});
  const ChapterTimeline g = Make({{0, 10}});
  const GroupMatching m = match_groups(p, g);
  ASSERT_EQ(m.groups.size(), 1u);
  EXPECT_TRUE(SameRange(m.groups[0].pred, 0, 2));
  EXPECT_DOUBLE_EQ(m.objective, 0.5);
  const GroupMatching b = match_groups_bruteforce(p, g);
  ASSERT_EQ(b.groups.size(), 1u);
  EXPECT_DOUBLE_EQ(b.objective, 0.5);
}

// Coarse/fine crossing: p1 covers g1+g2 while p2+p3 cover g3.
TEST(MatchGroupsTest, CrossingGranularityShapes) {
  const ChapterTimeline g = Make({{0, 1.5}, {1.5, 4}, {4, 8}});
  const ChapterTimeline p = Make({{0, 4}, {4, 6}, {6, 8}});
  const GroupMatching m = match_groups(p, g);
  ASSERT_EQ(m.groups.size(), 2u);
  EXPECT_TRUE(SameRange(m.groups[0].pred, 0, 1));
  EXPECT_TRUE(SameRange(m.groups[0].gt, 0, 2));
  EXPECT_TRUE(SameRange(m.groups[1].pred, 1, 3));
  EXPECT_TRUE(SameRange(m.groups[1].gt, 2, 3));
  EXPECT_NEAR(m.objective, 1.0, 1e-12);
  EXPECT_NEAR(match_groups_bruteforce(p, g).objective, 1.0, 1e-12);
}

TEST(MatchGroupsTest, TieBreakPrefersFewerGroups) {
  // Nothing overlaps, so every partition scores zero; the single 2x1 group
  // wins over any two-group alternative.
  const ChapterTimeline p = Make({{0, 1}, {1, 2}});
  const ChapterTimeline g = Make({{10, 11}, {11, 12}, {12, 13}});
  const GroupMatching m = match_groups(p, g);
  EXPECT_EQ(m.objective, 0.0);
  EXPECT_EQ(m.groups.size(), 2u);
  EXPECT_EQ(m.groups.size(), match_groups_bruteforce(p, g).groups.size());
  const ChapterTimeline one = Make({{20, 21}});
  EXPECT_EQ(match_groups(p, one).groups.size(), 1u);
}

TEST(MatchGroupsTest, DeterministicAcrossCalls) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const ChapterTimeline p = RandomTimeline(rng);
    const ChapterTimeline g = RandomTimeline(rng);
    const GroupMatching a = match_groups(p, g);
    const GroupMatching b = match_groups(p, g);
    ASSERT_EQ(a.groups.size(), b.groups.size());
    for (std::size_t k = 0; k < a.groups.size(); ++k) {
      EXPECT_EQ(a.groups[k].pred, b.groups[k].pred);
      EXPECT_EQ(a.groups[k].gt, b.groups[k].gt);
    }
  }
}

TEST(MatchGroupsTest, AgreesWithBruteForce) {
  std::mt19937_64 rng(17);
  TimelineSpec spec;
  spec.max_chapters = 5;
  for (int trial = 0; trial < 1000; ++trial) {
    const ChapterTimeline p = RandomTimeline(rng, spec);
    const ChapterTimeline g = RandomTimeline(rng, spec);
    const GroupMatching dp = match_groups(p, g);
    const GroupMatching bf = match_groups_bruteforce(p, g);
    ASSERT_NEAR(dp.objective, bf.objective, 1e-9) << "trial " << trial;
    EXPECT_EQ(PartitionViolation(bf, p.size(), g.size()), "");
  }
}

TEST(MatchGroupsTest, ProducesValidPartitions) {
  std::mt19937_64 rng(23);
  TimelineSpec spec;
  spec.max_chapters = 15;
  for (int trial = 0; trial < 2000; ++trial) {
    const ChapterTimeline p = RandomTimeline(rng, spec);
    const ChapterTimeline g = RandomTimeline(rng, spec);
    const GroupMatching m = match_groups(p, g);
    ASSERT_EQ(PartitionViolation(m, p.size(), g.size()), "") << trial;
    for (const GroupPair& gp : m.groups) {
      EXPECT_NEAR(gp.phi,
                  phi(p.chapters().subspan(gp.pred.begin, gp.pred.size()),
                      g.chapters().subspan(gp.gt.begin, gp.gt.size())),
                  1e-12);
    }
  }
}

TEST(MatchGroupsTest, BeatsRandomValidPartitions) {
  std::mt19937_64 rng(29);
  TimelineSpec spec;
  spec.max_chapters = 10;
  for (int trial = 0; trial < 300; ++trial) {
    const ChapterTimeline p = RandomTimeline(rng, spec);
    const ChapterTimeline g = RandomTimeline(rng, spec);
    const double best = match_groups(p, g).objective;
    // Random walk through the grid using only valid group shapes.
    std::size_t i = 0, j = 0;
    double total = 0.0;
    while (i < p.size() && j < g.size()) {
      const std::size_t rest_p = p.size() - i;
      const std::size_t rest_g = g.size() - j;
      std::size_t dp = 1, dg = 1;
      if (rest_p == 1) {
        dg = rest_g;
      } else if (rest_g == 1) {
        dp = rest_p;
      } else if (Uniform(rng) < 0.5) {
        dg = 1 + rng() % (rest_g - 1);
      } else {
        dp = 1 + rng() % (rest_p - 1);
      }
      total += phi(p.chapters().subspan(i, dp), g.chapters().subspan(j, dg));
      i += dp;
      j += dg;
    }
    EXPECT_GE(best + 1e-12, total);
  }
}

TEST(MatchGroupsTest, ShiftAndScaleInvariant) {
  std::mt19937_64 rng(31);
  TimelineSpec spec;
  spec.max_chapters = 8;
  for (int trial = 0; trial < 200; ++trial) {
    const ChapterTimeline p = RandomTimeline(rng, spec);
    const ChapterTimeline g = RandomTimeline(rng, spec);
    const double a = 0.25 + Uniform(rng) * 4.0;
    const double b = Uniform(rng) * 5000.0;
    EXPECT_NEAR(match_groups(p, g).objective,
                match_groups(Transform(p, a, b), Transform(g, a, b)).objective,
                1e-9);
  }
}

TEST(MatchGroupsTest, CustomObjective) {
  const ChapterTimeline p = Make({{0, 10}, {10, 20}});
  const ChapterTimeline g = Make({{0, 5}, {5, 10}, {10, 20}});
  // Counting groups rewards the finest partition the shapes allow.
  const GroupMatching m = match_groups(
      p, g, [](std::span<const Chapter>, std::span<const Chapter>) { return 1.0; });
  EXPECT_EQ(m.groups.size(), 2u);
  EXPECT_DOUBLE_EQ(m.objective, 2.0);
}

TEST(MatchGroupsBruteForceTest, Limits) {
  const ChapterTimeline big = Contiguous(std::vector<double>(9, 1.0));
  const ChapterTimeline one = Contiguous({9});
  EXPECT_THROW(match_groups_bruteforce(big, one), InstanceTooLargeError);
  const GroupMatching m = match_groups_bruteforce(one, one);
  ASSERT_EQ(m.groups.size(), 1u);
  EXPECT_DOUBLE_EQ(m.objective, 1.0);
}

TEST(MatchOneToOneTest, IdentityTakesDiagonal) {
  const ChapterTimeline t = Contiguous({3, 4, 5});
  const OneToOneMatching m =
      match_one_to_one(t, t, [](const Chapter& a, const Chapter& b) { return iou(a, b); });
  ASSERT_EQ(m.pairs.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(m.pairs[k], std::make_pair(k, k));
  }
  EXPECT_DOUBLE_EQ(m.total, 3.0);
}

TEST(MatchOneToOneTest, ZeroScoresGiveEmptyMatching) {
  const ChapterTimeline p = Make({{0, 10}, {10, 20}});
  const ChapterTimeline g = Make({{30, 40}});
  const OneToOneMatching m =
      match_one_to_one(p, g, [](const Chapter& a, const Chapter& b) { return iou(a, b); });
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.total, 0.0);
}

TEST(MatchOneToOneTest, LeavesEventsUnmatchedWhereGroupsWouldNot) {
  const ChapterTimeline g = Make({{0, 1.5}, {1.5, 4}, {4, 8}});
  const ChapterTimeline p = Make({{0, 4}, {4, 6}, {6, 8}});
  const OneToOneMatching m =
      match_one_to_one(p, g, [](const Chapter& a, const Chapter& b) { return iou(a, b); });
  EXPECT_LT(m.pairs.size(), std::min(p.size(), g.size()));
}

TEST(MatchOneToOneTest, RejectsNegativeScores) {
  EXPECT_THROW(match_one_to_one_grid(2, 2, [](std::size_t, std::size_t) { return -1.0; }),
               Error);
}

TEST(MatchOneToOneTest, AgreesWithEnumeration) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 5;
    const std::size_t m = 1 + rng() % 5;
    std::vector<double> s(n * m);
    for (double& v : s) v = Uniform(rng) < 0.3 ? 0.0 : Uniform(rng);
    const auto at = [&](std::size_t i, std::size_t j) { return s[i * m + j]; };
    const OneToOneMatching r = match_one_to_one_grid(n, m, at);
    EXPECT_NEAR(r.total, BruteForceOneToOne(n, m, at), 1e-12);
    for (std::size_t k = 0; k < r.pairs.size(); ++k) {
      EXPECT_GT(at(r.pairs[k].first, r.pairs[k].second), 0.0);
      if (k > 0) {
        EXPECT_LT(r.pairs[k - 1].first, r.pairs[k].first);
        EXPECT_LT(r.pairs[k - 1].second, r.pairs[k].second);
      }
    }
  }
}

}  // namespace
}  // namespace chaptereval
