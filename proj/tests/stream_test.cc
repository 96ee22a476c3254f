//
// Copyright 2026 The dpstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpstream/stream.h"

#include <random>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "testing/fixtures.h"
#include "testing/status_matchers.h"

namespace dpstream {
namespace {

using ::dpstream::testing::IsOk;
using ::dpstream::testing::StatusIs;
using ::testing::ElementsAre;
using ::testing::IsEmpty;
using ::testing::Pair;

const Point kA = {0.1, 0.2};
const Point kB = {0.7, 0.3};

DiffStream MakeStream(std::vector<Batch> batches) {
  absl::StatusOr<DiffStream> s = DiffStream::Create(std::move(batches));
  EXPECT_THAT(s, IsOk());
  return *std::move(s);
}

TEST(DomainTest, UnitCubeDefaults) {
  Domain d = Domain::UnitCube(2);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_DOUBLE_EQ(d.Volume(), 1.0);
  EXPECT_TRUE(d.Contains(std::vector<double>{1.0, 0.0}));
  EXPECT_FALSE(d.Contains(std::vector<double>{1.5, 0.5}));
}

TEST(DomainTest, RejectsEmptyOrInvertedBounds) {
  EXPECT_THAT(Domain::Create({}), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(Domain::Create({{1.0, 1.0}}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(Domain::Create({{0.0, 2.0}, {-1.0, 1.0}}), IsOk());
}

TEST(DiffStreamTest, RejectsBadTimesAndWeights) {
  EXPECT_THAT(DiffStream::Create({Batch{.time = 0, .events = {}}}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(DiffStream::Create({Batch{.time = 2, .events = {}},
                                  Batch{.time = 2, .events = {}}}),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(DiffStream::Create({Batch{.time = 1, .events = {{kA, 2}}}}),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(DiffStreamTest, MissingTimesAreEmpty) {
  DiffStream s = MakeStream({Batch{.time = 1, .events = {{kA, 1}}},
                             Batch{.time = 4, .events = {{kB, 1}}}});
  EXPECT_EQ(s.horizon(), 4);
  EXPECT_THAT(s.BatchAt(2).events, IsEmpty());
  EXPECT_EQ(s.BatchAt(2).time, 2);
  EXPECT_EQ(s.BatchAt(4).events.size(), 1u);
}

TEST(NablaNormTest, EmptyStreamIsZero) {
  EXPECT_EQ(NablaNorm(DiffStream()), 0.0);
}

TEST(NablaNormTest, ThreeAdditions) {
  DiffStream s = MakeStream(
      {Batch{.time = 1, .events = {{kA, 1}, {kB, 1}, {kA, 1}}}});
  EXPECT_EQ(NablaNorm(s), 3.0);
}

TEST(NablaNormTest, AddThenDeleteCountsTwice) {
  DiffStream s = MakeStream({Batch{.time = 1, .events = {{kA, 1}}},
                             Batch{.time = 2, .events = {{kA, -1}}}});
  EXPECT_EQ(NablaNorm(s), 2.0);
}

TEST(NablaNormTest, AdditiveUnderConcatenation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    DiffStream s = testing::RandomStream(rng, {.horizon = 10,
                                               .max_events_per_step = 50});
    std::vector<Batch> head, tail;
    for (const Batch& b : s.batches()) {
      (b.time <= 5 ? head : tail).push_back(b);
    }
    EXPECT_EQ(NablaNorm(s), NablaNorm(MakeStream(head)) +
                                NablaNorm(MakeStream(tail)));
  }
}

TEST(CumulativeSnapshotTest, AdditiveBookkeeping) {
  DiffStream s = MakeStream({Batch{.time = 1, .events = {{kA, 1}, {kB, 1}}},
                             Batch{.time = 2, .events = {{kA, -1}}}});
  EXPECT_THAT(CumulativeSnapshot(s, 2),
              testing::IsOkAndHolds(ElementsAre(Pair(kB, 1))));
}

TEST(CumulativeSnapshotTest, BeforeFirstBatchIsEmpty) {
  DiffStream s = MakeStream({Batch{.time = 3, .events = {{kA, 1}}}});
  EXPECT_THAT(CumulativeSnapshot(s, 2), testing::IsOkAndHolds(IsEmpty()));
}

TEST(CumulativeSnapshotTest, OverDeletionFails) {
  absl::StatusOr<DiffStream> s =
      DiffStream::Create({Batch{.time = 1, .events = {{kA, 1}}},
                          Batch{.time = 2, .events = {{kA, -1}, {kA, -1}}}});
  ASSERT_THAT(s, IsOk());
  EXPECT_THAT(CumulativeSnapshot(*s, 2),
              StatusIs(absl::StatusCode::kFailedPrecondition));
  EXPECT_THAT(CumulativeSnapshot(*s, 1), IsOk());
  EXPECT_THAT(ValidatePrefixPositivity(*s),
              StatusIs(absl::StatusCode::kFailedPrecondition));
}

TEST(CumulativeSnapshotTest, SizeMonotoneForAdditionOnlyStreams) {
  std::mt19937_64 rng(5);
  DiffStream s = testing::RandomStream(
      rng, {.horizon = 15, .max_events_per_step = 40, .deletion_rate = 0.0});
  int64_t previous = 0;
  for (int64_t t = 1; t <= s.horizon(); ++t) {
    absl::StatusOr<Multiset> snap = CumulativeSnapshot(s, t);
    ASSERT_THAT(snap, IsOk());
    int64_t size = 0;
    for (const auto& [p, c] : *snap) size += c;
    EXPECT_GE(size, previous);
    previous = size;
  }
}

TEST(ApplyInitializationTest, IdentityAtOne) {
  std::mt19937_64 rng(3);
  DiffStream s = testing::RandomStream(rng, {.horizon = 6,
                                             .max_events_per_step = 20});
  absl::StatusOr<DiffStream> init = ApplyInitialization(s, 1);
  ASSERT_THAT(init, IsOk());
  ASSERT_EQ(init->batches().size(), s.batches().size());
  for (size_t i = 0; i < s.batches().size(); ++i) {
    EXPECT_EQ(init->batches()[i].time, s.batches()[i].time);
    EXPECT_EQ(init->batches()[i].events.size(),
              s.batches()[i].events.size());
  }
}

TEST(ApplyInitializationTest, MergesPrefixAndShifts) {
  DiffStream s = MakeStream({Batch{.time = 1, .events = {{kA, 1}}},
                             Batch{.time = 2, .events = {{kB, 1}}},
                             Batch{.time = 3, .events = {{kA, 1}}},
                             Batch{.time = 4, .events = {{kB, -1}}}});
  absl::StatusOr<DiffStream> init = ApplyInitialization(s, 3);
  ASSERT_THAT(init, IsOk());
  ASSERT_EQ(init->horizon(), 2);
  EXPECT_EQ(init->BatchAt(1).events.size(), 3u);
  ASSERT_EQ(init->BatchAt(2).events.size(), 1u);
  EXPECT_EQ(init->BatchAt(2).events[0].weight, -1);
}

TEST(ApplyInitializationTest, PastLastBatchGivesSingleBatch) {
  DiffStream s = MakeStream({Batch{.time = 1, .events = {{kA, 1}}},
                             Batch{.time = 2, .events = {{kB, 1}}}});
  absl::StatusOr<DiffStream> init = ApplyInitialization(s, 10);
  ASSERT_THAT(init, IsOk());
  EXPECT_EQ(init->horizon(), 1);
  EXPECT_EQ(init->BatchAt(1).events.size(), 2u);
}

TEST(ApplyInitializationTest, PreservesNablaNorm) {
  std::mt19937_64 rng(9);
  for (int64_t t0 = 1; t0 <= 12; ++t0) {
    DiffStream s = testing::RandomStream(rng, {.horizon = 10,
                                               .max_events_per_step = 30});
    absl::StatusOr<DiffStream> init = ApplyInitialization(s, t0);
    ASSERT_THAT(init, IsOk());
    EXPECT_EQ(NablaNorm(*init), NablaNorm(s));
  }
}

TEST(ApplyInitializationTest, RejectsZero) {
  EXPECT_THAT(ApplyInitialization(DiffStream(), 0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(PointSetTest, FromMultisetCarriesMultiplicity) {
  Multiset m = {{kA, 2}, {kB, 1}};
  PointSet ps = ToPointSet(m, 2);
  EXPECT_EQ(ps.size(), 2u);
  EXPECT_DOUBLE_EQ(ps.TotalWeight(), 3.0);
}

}  // namespace
}  // namespace dpstream
