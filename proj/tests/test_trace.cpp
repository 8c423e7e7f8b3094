#include <gtest/gtest.h>

#include "stlplan/trace.hpp"

using namespace stlplan;

TEST(TimeGrid, CountsSamplesAndRejectsMisalignedHorizon) {
  const TimeGrid g(0.05, 60.0);
  EXPECT_EQ(g.steps(), 1200);
  EXPECT_EQ(g.count(), 1201);
  EXPECT_DOUBLE_EQ(g.horizon(), 60.0);
  EXPECT_THROW(TimeGrid(0.05, 60.01), Misalignment);
  EXPECT_THROW(TimeGrid(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(TimeGrid(-0.1, 1.0), InvalidArgument);
}

TEST(IntervalToIndices, MapsIntervalsOntoTheGrid) {
  const TimeGrid g(0.05, 60.0);
  EXPECT_EQ(interval_to_indices({0.0, 60.0}, g), (IndexRange{0, 1200}));
  EXPECT_EQ(interval_to_indices({40.0, 60.0}, g), (IndexRange{800, 1200}));
  EXPECT_EQ(interval_to_indices({0.0, 0.0}, g), (IndexRange{0, 0}));
}

TEST(IntervalToIndices, RejectsOutOfRangeAndMisaligned) {
  const TimeGrid g(0.05, 60.0);
  EXPECT_THROW(interval_to_indices({0.0, 60.05}, g), OutOfRange);
  EXPECT_THROW(interval_to_indices({-0.05, 1.0}, g), OutOfRange);
  EXPECT_THROW(interval_to_indices({2.0, 1.0}, g), OutOfRange);
  EXPECT_THROW(interval_to_indices({0.0, 1.01}, g), Misalignment);
  // within 1e-9·Ts of a grid point is accepted
  EXPECT_EQ(interval_to_indices({0.0, 1.0 + 1e-12}, g), (IndexRange{0, 20}));
}

TEST(Trace, StoresChannelsPerDrone) {
  Trace t(TimeGrid(1.0, 2.0), 2);
  t.position(1, 1) = Vec3(1, 2, 3);
  t.velocity(2, 0) = Vec3(4, 5, 6);
  EXPECT_EQ(t.channel(Channel::Position, 1, 1), Vec3(1, 2, 3));
  EXPECT_EQ(t.channel(Channel::Velocity, 2, 0), Vec3(4, 5, 6));
  EXPECT_EQ(t.position(1, 0), Vec3::Zero());
  EXPECT_TRUE(t.all_finite());
  t.position(0, 0)[0] = std::nan("");
  EXPECT_FALSE(t.all_finite());
}
