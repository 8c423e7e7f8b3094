#include <gtest/gtest.h>

#include "stlplan/geometry.hpp"

using namespace stlplan;

namespace {

std::vector<Face> cube_faces(double h) {
  std::vector<Face> f;
  for (int j = 0; j < 3; ++j) {
    f.push_back({Vec3::Unit(j) * 2.0, 2.0 * h});  // unnormalized on purpose
    f.push_back({-Vec3::Unit(j), h});
  }
  return f;
}

}  // namespace

TEST(Region, BoxMarginIsDistanceToNearestFace) {
  const Region r("b", Box{Vec3(0, 0, 0), Vec3(2, 4, 6)});
  EXPECT_DOUBLE_EQ(r.inside_margin(Vec3(1, 1, 1)), 1.0);
  EXPECT_DOUBLE_EQ(r.inside_margin(Vec3(1, 2, 3)), 1.0);
  EXPECT_DOUBLE_EQ(r.inside_margin(Vec3(-0.5, 2, 3)), -0.5);
  EXPECT_TRUE(r.contains(Vec3(2, 4, 6)));
  EXPECT_FALSE(r.contains(Vec3(2.1, 4, 6)));
  EXPECT_TRUE(r.center().isApprox(Vec3(1, 2, 3)));
}

TEST(Region, BoxNeedsPositiveExtent) {
  EXPECT_THROW(Region("flat", Box{Vec3(0, 0, 0), Vec3(1, 0, 1)}), ValidationError);
}

TEST(Region, PolyhedronNormalizesFaces) {
  const Region r("cube", cube_faces(1.0));
  EXPECT_NEAR(r.inside_margin(Vec3(0.5, 0, 0)), 0.5, 1e-15);
  EXPECT_EQ(r.vertices().size(), 8u);
  EXPECT_TRUE(r.center().isZero(1e-12));
}

TEST(Region, PolyhedronRejectsEmptyAndUnbounded) {
  auto faces = cube_faces(1.0);
  faces.push_back({Vec3::UnitX(), -2.0});  // x <= -2 contradicts x >= -1
  EXPECT_THROW(Region("empty", faces), ValidationError);
  std::vector<Face> open{{Vec3::UnitX(), 1.0}, {Vec3::UnitY(), 1.0}, {Vec3::UnitZ(), 1.0}, {-Vec3::UnitZ(), 1.0}};
  EXPECT_THROW(Region("open", open), ValidationError);
  EXPECT_THROW(Region("few", std::vector<Face>{{Vec3::UnitX(), 1.0}}), ValidationError);
}

TEST(Region, WithinAndOverlap) {
  const Region outer("o", Box{Vec3(-5, -5, -5), Vec3(5, 5, 5)});
  const Region inner("i", Box{Vec3(-1, -1, -1), Vec3(1, 1, 1)});
  const Region far("f", Box{Vec3(6, 6, 6), Vec3(7, 7, 7)});
  const Region touching("t", Box{Vec3(1, -1, -1), Vec3(2, 1, 1)});
  EXPECT_TRUE(region_within(inner, outer));
  EXPECT_FALSE(region_within(far, outer));
  EXPECT_TRUE(regions_overlap(inner, outer));
  EXPECT_FALSE(regions_overlap(inner, far));
  EXPECT_FALSE(regions_overlap(inner, touching));
}
