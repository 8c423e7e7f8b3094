#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

using namespace stlplan;

namespace {

AxisState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> p(-10.0, 10.0);
  std::uniform_real_distribution<double> va(-3.0, 3.0);
  return {p(rng), va(rng), va(rng)};
}

}  // namespace

TEST(SolveBoundary, ZeroMotion) {
  const auto s = solve_boundary({}, {}, 1.0);
  EXPECT_EQ(s.alpha, 0.0);
  EXPECT_EQ(s.beta, 0.0);
  EXPECT_EQ(s.gamma, 0.0);
  for (double tau : {0.0, 0.3, 1.0}) EXPECT_EQ(eval(s, tau), AxisState{});
}

TEST(SolveBoundary, RestToRestUnitSegment) {
  const auto s = solve_boundary({0, 0, 0}, {1, 0, 0}, 1.0);
  EXPECT_DOUBLE_EQ(s.alpha, 720.0);
  EXPECT_DOUBLE_EQ(s.beta, -360.0);
  EXPECT_DOUBLE_EQ(s.gamma, 60.0);
  const AxisState mid = eval(s, 0.5);
  EXPECT_NEAR(mid.p, 0.5, 1e-15);
  EXPECT_NEAR(mid.v, 1.875, 1e-15);
  EXPECT_NEAR(mid.a, 0.0, 1e-15);
}

TEST(SolveBoundary, RestToRestLongerSegment) {
  const auto s = solve_boundary({0, 0, 0}, {1, 0, 0}, 2.0);
  EXPECT_DOUBLE_EQ(s.alpha, 22.5);
  EXPECT_DOUBLE_EQ(s.beta, -22.5);
  EXPECT_DOUBLE_EQ(s.gamma, 7.5);
  const AxisState end = eval(s, 2.0);
  EXPECT_NEAR(end.p, 1.0, 1e-12);
  EXPECT_NEAR(end.v, 0.0, 1e-12);
  EXPECT_NEAR(end.a, 0.0, 1e-12);
}

TEST(SolveBoundary, RejectsNonPositiveDuration) {
  EXPECT_THROW(solve_boundary({}, {}, 0.0), InvalidArgument);
  EXPECT_THROW(solve_boundary({}, {}, -1.0), InvalidArgument);
}

TEST(SolveBoundary, ReproducesRandomEndpointsAndMatchesLinearSolve) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dur(0.2, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const AxisState a = random_state(rng);
    const AxisState b = random_state(rng);
    const double T = dur(rng);
    const auto s = solve_boundary(a, b, T);
    EXPECT_EQ(eval(s, 0.0), a);
    const AxisState e = eval(s, T);
    EXPECT_NEAR(e.p, b.p, 1e-9);
    EXPECT_NEAR(e.v, b.v, 1e-9);
    EXPECT_NEAR(e.a, b.a, 1e-9);
    const auto c = oracle::quintic_coefficients(a, b, T);
    const double tau = T * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto ref = oracle::eval_poly(c, tau);
    const AxisState x = eval(s, tau);
    EXPECT_NEAR(x.p, ref.p, 1e-8 * std::max(1.0, std::abs(ref.p)));
    EXPECT_NEAR(x.v, ref.v, 1e-8 * std::max(1.0, std::abs(ref.v)));
    EXPECT_NEAR(x.a, ref.a, 1e-8 * std::max(1.0, std::abs(ref.a)));
  }
}

TEST(Eval, DerivativesAreConsistent) {
  std::mt19937_64 rng(2);
  constexpr double h = 1e-5;
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = solve_boundary(random_state(rng), random_state(rng), 2.0);
    const double tau = std::uniform_real_distribution<double>(0.01, 1.99)(rng);
    const AxisState lo = eval(s, tau - h);
    const AxisState hi = eval(s, tau + h);
    const AxisState x = eval(s, tau);
    EXPECT_NEAR((hi.p - lo.p) / (2 * h), x.v, 1e-6 * std::max(1.0, std::abs(x.v)));
    EXPECT_NEAR((hi.v - lo.v) / (2 * h), x.a, 1e-6 * std::max(1.0, std::abs(x.a)));
  }
}

TEST(Eval, RejectsTimeOutsideSegment) {
  const auto s = solve_boundary({}, {1, 0, 0}, 1.0);
  EXPECT_THROW(eval(s, -0.01), OutOfRange);
  EXPECT_THROW(eval(s, 1.01), OutOfRange);
}

TEST(SegmentFeasible, RestToRestPeaks) {
  const auto s = solve_boundary({0, 0, 0}, {1, 0, 0}, 1.0);
  const auto f = segment_feasible(s, 3.0, 3.0);
  EXPECT_NEAR(f.peak_v, 1.875, 1e-12);
  EXPECT_FALSE(f.feasible);  // peak |a| = 10/sqrt(3) exceeds 3
  EXPECT_NEAR(f.peak_a, 10.0 / std::sqrt(3.0), 1e-9);
  EXPECT_TRUE(segment_feasible(s, 3.0, 6.0).feasible);
  EXPECT_FALSE(segment_feasible(s, 1.5, 6.0).feasible);
  const auto z = segment_feasible(solve_boundary({}, {}, 1.0), 3.0, 3.0);
  EXPECT_TRUE(z.feasible);
  EXPECT_EQ(z.peak_v, 0.0);
  EXPECT_EQ(z.peak_a, 0.0);
  EXPECT_THROW(segment_feasible(s, 0.0, 1.0), InvalidArgument);
}

TEST(SegmentFeasible, PeakVelocityScalesWithDuration) {
  for (double dp : {0.5, 1.0, 7.0})
    for (double T : {0.5, 1.0, 3.0, 10.0})
      EXPECT_NEAR(segment_feasible(solve_boundary({0, 0, 0}, {dp, 0, 0}, T), 100, 100).peak_v, 1.875 * dp / T, 1e-9);
}

TEST(SegmentFeasible, ClosedFormPeaksMatchDenseSampling) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const double T = std::uniform_real_distribution<double>(0.3, 3.0)(rng);
    const auto s = solve_boundary(random_state(rng), random_state(rng), T);
    const auto f = segment_feasible(s, 1e9, 1e9);
    double pv = 0.0;
    double pa = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i <= n; ++i) {
      const AxisState x = eval(s, T * i / n);
      pv = std::max(pv, std::abs(x.v));
      pa = std::max(pa, std::abs(x.a));
    }
    EXPECT_NEAR(f.peak_v, pv, 1e-6);
    EXPECT_NEAR(f.peak_a, pa, 1e-6);
  }
}

TEST(Propagate, ChainsKnots) {
  std::mt19937_64 rng(4);
  std::vector<AxisState> knots;
  for (int i = 0; i < 12; ++i) knots.push_back(random_state(rng));
  const auto tr = propagate(knots, 0.7);
  ASSERT_EQ(tr.segments.size(), 11u);
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const AxisState e = eval(tr.segments[k], 0.7);
    EXPECT_NEAR(e.p, knots[k + 1].p, 1e-9);
    EXPECT_NEAR(e.v, knots[k + 1].v, 1e-9);
    EXPECT_NEAR(e.a, knots[k + 1].a, 1e-9);
  }
  EXPECT_THROW(propagate({knots[0]}, 1.0), InvalidArgument);
}

TEST(Propagate, IdenticalKnotsAndStraightLine) {
  const auto still = propagate({{1, 0, 0}, {1, 0, 0}}, 1.0);
  ASSERT_EQ(still.segments.size(), 1u);
  EXPECT_EQ(still.segments[0].alpha, 0.0);
  const auto line = propagate({{0, 2, 0}, {2, 2, 0}, {4, 2, 0}}, 1.0);
  for (const auto& s : line.segments) {
    EXPECT_NEAR(s.alpha, 0.0, 1e-12);
    EXPECT_NEAR(s.beta, 0.0, 1e-12);
    EXPECT_NEAR(s.gamma, 0.0, 1e-12);
    const AxisState mid = eval(s, 0.5);
    EXPECT_NEAR(mid.v, 2.0, 1e-12);
    EXPECT_NEAR(mid.a, 0.0, 1e-12);
  }
  EXPECT_NEAR(line.at(1.5).p, 3.0, 1e-12);
}

TEST(Sample, KnotsAreReproducedExactly) {
  std::mt19937_64 rng(5);
  std::vector<AxisState> knots;
  for (int i = 0; i < 4; ++i) knots.push_back(random_state(rng));
  const auto tr = propagate(knots, 1.0);
  const auto s = sample(tr, TimeGrid(0.25, 3.0));
  ASSERT_EQ(s.size(), 13u);
  for (std::size_t k = 0; k < knots.size(); ++k) EXPECT_EQ(s[4 * k], knots[k]);
  const auto same = sample(tr, TimeGrid(1.0, 3.0));
  for (std::size_t k = 0; k < knots.size(); ++k) EXPECT_EQ(same[k], knots[k]);
  const auto mid = sample(propagate({{0, 0, 0}, {1, 0, 0}}, 1.0), TimeGrid(0.5, 1.0))[1];
  EXPECT_NEAR(mid.p, 0.5, 1e-15);
  EXPECT_NEAR(mid.v, 1.875, 1e-15);
  for (const auto& x : sample(propagate({{}, {}, {}}, 1.0), TimeGrid(0.1, 2.0))) EXPECT_EQ(x, AxisState{});
}

TEST(Sample, RejectsMismatchedGrids) {
  const auto tr = propagate({{}, {}, {}}, 1.0);
  EXPECT_THROW(sample(tr, TimeGrid(0.3, 1.8)), Misalignment);
  EXPECT_THROW(sample(tr, TimeGrid(0.5, 3.0)), Misalignment);
}

TEST(BoundaryBasis, IsTheLinearMapOfSolveAndEval) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const AxisState a = random_state(rng);
    const AxisState b = random_state(rng);
    const double tau = std::uniform_real_distribution<double>(0.0, 1.5)(rng);
    const auto B = boundary_basis(1.5, tau);
    const double z[6] = {a.p, a.v, a.a, b.p, b.v, b.a};
    const AxisState x = eval(solve_boundary(a, b, 1.5), tau);
    double r[3] = {0, 0, 0};
    for (int row = 0; row < 3; ++row)
      for (int i = 0; i < 6; ++i) r[row] += B[static_cast<std::size_t>(row)][static_cast<std::size_t>(i)] * z[i];
    EXPECT_NEAR(r[0], x.p, 1e-10);
    EXPECT_NEAR(r[1], x.v, 1e-10);
    EXPECT_NEAR(r[2], x.a, 1e-10);
  }
}

TEST(Polynomial, CubicAndQuadraticRoots) {
  auto r = poly::cubic_roots(1, -6, 11, -6);
  std::sort(r.begin(), r.end());
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], 1.0, 1e-12);
  EXPECT_NEAR(r[1], 2.0, 1e-12);
  EXPECT_NEAR(r[2], 3.0, 1e-12);
  EXPECT_EQ(poly::cubic_roots(1, 0, 1, 0).size(), 1u);
  EXPECT_EQ(poly::quadratic_roots(1, 0, 1).size(), 0u);
  auto q = poly::quadratic_roots(0, 2, -4);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_DOUBLE_EQ(q[0], 2.0);
}
