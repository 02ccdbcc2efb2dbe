#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "conjcalc/convex_fn.hpp"
#include "conjcalc/errors.hpp"
#include "conjcalc/small_lp.hpp"
#include "test_support.hpp"

using namespace conjcalc;
using namespace testing_support;

// ---------------------------------------------------------------- ExtReal

TEST(ExtReal, RejectsNanAndNegativeInfinity) {
  EXPECT_THROW(ExtReal(std::nan("")), InvalidArgument);
  EXPECT_THROW(ExtReal(-kInf), InvalidArgument);
  EXPECT_NO_THROW(ExtReal{kInf});
}

TEST(ExtReal, InfinityAbsorbsFiniteValues) {
  const ExtReal inf = ExtReal::infinity();
  EXPECT_TRUE((inf + ExtReal(3.0)).is_infinite());
  EXPECT_TRUE(inf.scaled(2.0).is_infinite());
  EXPECT_EQ(ExtReal(1.5).scaled(2.0).raw(), 3.0);
  EXPECT_THROW(ExtReal(1.0).scaled(0.0), InvalidArgument);
  EXPECT_THROW((void)inf.value(), InvalidArgument);
  EXPECT_LT(ExtReal(1e308), inf);
  EXPECT_EQ(max(ExtReal(2.0), inf), inf);
}

// ------------------------------------------------------- representations

TEST(Construction, RejectsBadInputs) {
  EXPECT_THROW(PolyhedralFn({}), InvalidArgument);
  EXPECT_THROW(pw({{1.0, 0.0}}, 1.0, -1.0), ImproperFunction);
  EXPECT_THROW(AffineFn(vec({1.0, 2.0, 3.0, 4.0}), 0.0), InvalidArgument);
  EXPECT_THROW(Halfspace(v1(0.0), 1.0), InvalidArgument);
  EXPECT_THROW(AffineFn(v1(std::nan("")), 0.0), InvalidArgument);
  EXPECT_THROW(GridFn({GridAxis{-1, 1, 3}}, {0.0, 1.0}), InvalidArgument);
  EXPECT_THROW(GridFn({GridAxis{-1, 1, 3}}, {kInf, kInf, kInf}), ImproperFunction);
  EXPECT_THROW(GridFn({GridAxis{-1, 1, 3}}, {0.0, std::nan(""), 0.0}), InvalidArgument);
  EXPECT_THROW(GridFn({GridAxis{1, -1, 3}}, {0.0, 0.0, 0.0}), InvalidArgument);
}

TEST(Construction, EmptyPolyhedralDomainInTwoDimensions) {
  // x1 + x2 <= -1 and x1 + x2 >= 1 cannot both hold.
  std::vector<Halfspace> dom{{vec({1.0, 1.0}), -1.0}, {vec({-1.0, -1.0}), -1.0}};
  EXPECT_THROW(PolyhedralFn({AffineFn(vec({0.0, 0.0}), 0.0)}, dom), ImproperFunction);
}

TEST(Eval, AbsoluteValue) {
  EXPECT_EQ(eval(abs_fn(), v1(-2.0)).raw(), 2.0);
}

TEST(Eval, PointIndicatorIsInfiniteOffAnchor) {
  const PointIndicatorFn ind(v1(3.0));
  EXPECT_TRUE(eval(ind, v1(2.0)).is_infinite());
  EXPECT_EQ(eval(ind, v1(3.0)).raw(), 0.0);
  EXPECT_EQ(eval(PointIndicatorFn(v1(3.0), -5.0), v1(3.0)).raw(), -5.0);
}

TEST(Eval, GridInterpolatesLinearlyBetweenNodes) {
  // x^2/2 on 5 nodes of [-1, 1]: nodes at 0 and 0.5 give 0 and 0.125.
  const GridFn g = grid_from([](double x) { return 0.5 * x * x; }, -1.0, 1.0, 5);
  EXPECT_DOUBLE_EQ(eval(g, v1(0.5)).raw(), 0.125);
  // halfway between 0.5 and 1: (0.125 + 0.5) / 2
  EXPECT_DOUBLE_EQ(eval(g, v1(0.75)).raw(), 0.3125);
  EXPECT_TRUE(eval(g, v1(1.5)).is_infinite());
}

TEST(Eval, GridBilinearMatchesHandComputation) {
  // f(x1,x2) = x1 + 2 x2 sampled on a 3x3 grid over [0,2]^2 is reproduced
  // exactly by the bilinear interpolant.
  std::vector<double> vals;
  const GridAxis ax{0.0, 2.0, 3};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) vals.push_back(ax.node(i) + 2.0 * ax.node(j));
  const GridFn g({ax, ax}, vals);
  EXPECT_DOUBLE_EQ(eval(g, vec({0.3, 1.7})).raw(), 0.3 + 3.4);
}

TEST(Eval, DimensionMismatchThrows) {
  EXPECT_THROW(eval(abs_fn(), vec({1.0, 2.0})), DimensionMismatch);
}

TEST(Eval, DomainBoundaryIsIncluded) {
  const PolyhedralFn f = pw({{0.0, 0.0}}, -1.0, 1.0);
  EXPECT_EQ(eval(f, v1(1.0)).raw(), 0.0);
  EXPECT_EQ(eval(f, v1(-1.0)).raw(), 0.0);
  EXPECT_TRUE(eval(f, v1(1.001)).is_infinite());
}

// --------------------------------------------------------------------- leq

TEST(Leq, HalfAbsBelowAbs) {
  const PolyhedralFn half = pw({{0.5, 0.0}, {-0.5, 0.0}});
  EXPECT_TRUE(leq(half, abs_fn()).holds);
}

TEST(Leq, HalfAbsNotBelowPositivePartWitnessOnLeft) {
  const PolyhedralFn half = pw({{0.5, 0.0}, {-0.5, 0.0}});
  const PolyhedralFn pos = pw({{1.0, 0.0}, {0.0, 0.0}});
  SampleSpec unit;
  unit.box_lo = -1.0;
  unit.box_hi = 1.0;
  const auto r = leq(half, pos, unit);
  ASSERT_FALSE(r.holds);
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(r.witness->x[0], -1.0);
  EXPECT_EQ(r.witness->lhs.raw(), 0.5);
  EXPECT_EQ(r.witness->rhs.raw(), 0.0);
}

TEST(Leq, Reflexive) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int t = 0; t < 20; ++t) {
    const PolyhedralFn f = pw({{U(rng), U(rng)}, {U(rng), U(rng)}, {U(rng), U(rng)}});
    EXPECT_TRUE(leq(f, f).holds);
  }
}

TEST(Leq, WitnessValuesReEvaluate) {
  const PolyhedralFn f = pw({{2.0, 1.0}});
  const PolyhedralFn g = pw({{1.0, 0.0}});
  const auto r = leq(f, g);
  ASSERT_FALSE(r.holds);
  EXPECT_EQ(eval(f, r.witness->x), r.witness->lhs);
  EXPECT_EQ(eval(g, r.witness->x), r.witness->rhs);
  EXPECT_GT(r.witness->lhs.raw(), r.witness->rhs.raw() + kOrderEps);
}

TEST(Leq, InfiniteRightSideAlwaysDominates) {
  const PolyhedralFn f = pw({{5.0, 3.0}});
  const PolyhedralFn g = pw({{0.0, 0.0}}, -1.0, 1.0);
  // g is +inf off [-1,1]; on [-1,1] f reaches 8 > 0.
  EXPECT_FALSE(leq(f, g).holds);
  EXPECT_TRUE(leq(pw({{0.0, -1.0}}), g).holds);
  // f restricted to a smaller domain is +inf where g is finite.
  EXPECT_FALSE(leq(pw({{0.0, -1.0}}, -0.5, 0.5), g).holds);
}

TEST(Leq, GridsUseSharedNodes) {
  const GridFn a = grid_from([](double x) { return x * x; }, -1, 1, 9);
  const GridFn b = grid_from([](double x) { return x * x + 0.1; }, -1, 1, 9);
  const GridFn c = grid_from([](double x) { return x; }, -2, 2, 9);
  EXPECT_TRUE(leq(a, b).holds);
  EXPECT_FALSE(leq(b, a).holds);
  EXPECT_THROW(leq(a, c), InvalidArgument);
}

// -------------------------------------------------------------- sup_family

TEST(SupFamily, TwoLinesGiveAbs) {
  const std::vector<ConvexFn> fs{pw({{1.0, 0.0}}), pw({{-1.0, 0.0}})};
  const ConvexFn s = sup_family(fs);
  for (double x : linspace(-3, 3, 13)) EXPECT_EQ(eval(s, v1(x)).raw(), std::abs(x));
}

TEST(SupFamily, SingletonIsIdentity) {
  const PolyhedralFn f = pw({{2.0, 1.0}, {-1.0, 0.5}}, -3.0, 4.0);
  const std::vector<ConvexFn> fs{f};
  const ConvexFn s = sup_family(fs);
  for (double x : linspace(-5, 5, 41)) EXPECT_EQ(eval(s, v1(x)), eval(f, v1(x)));
}

TEST(SupFamily, DisjointIndicatorsAreImproper) {
  const std::vector<ConvexFn> fs{PointIndicatorFn(v1(0.0)), PointIndicatorFn(v1(1.0))};
  EXPECT_THROW(sup_family(fs), ImproperFunction);
}

TEST(SupFamily, SameAnchorIndicatorsKeepLargerLevel) {
  const std::vector<ConvexFn> fs{PointIndicatorFn(v1(1.0), 2.0), PointIndicatorFn(v1(1.0), 5.0)};
  const ConvexFn s = sup_family(fs);
  ASSERT_TRUE(s.indicator());
  EXPECT_EQ(s.indicator()->level(), 5.0);
}

TEST(SupFamily, MixedRepresentationsRejected) {
  const std::vector<ConvexFn> fs{abs_fn(), PointIndicatorFn(v1(0.0))};
  EXPECT_THROW(sup_family(fs), MixedRepresentation);
  EXPECT_THROW(sup_family(std::span<const ConvexFn>{}), InvalidArgument);
}

TEST(SupFamily, DisjointDomainsAreImproper) {
  const std::vector<ConvexFn> fs{pw({{0.0, 0.0}}, std::nullopt, -1.0), pw({{0.0, 0.0}}, 1.0)};
  EXPECT_THROW(sup_family(fs), ImproperFunction);
}

TEST(SupFamily, DominatesEveryMemberExactly) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int t = 0; t < 20; ++t) {
    const std::vector<ConvexFn> fs{pw({{U(rng), U(rng)}, {U(rng), U(rng)}}),
                                   pw({{U(rng), U(rng)}}), pw({{U(rng), U(rng)}})};
    const ConvexFn s = sup_family(fs);
    for (const auto& f : fs) EXPECT_TRUE(leq(f, s, {}, 0.0).holds);
  }
}

TEST(SupFamily, GridsTakeNodewiseMax) {
  const GridFn a = grid_from([](double x) { return x; }, -1, 1, 5);
  const GridFn b = grid_from([](double x) { return -x; }, -1, 1, 5);
  const std::vector<ConvexFn> fs{a, b};
  const ConvexFn s = sup_family(fs);
  ASSERT_TRUE(s.grid());
  for (int i = 0; i < 5; ++i) EXPECT_EQ(s.grid()->raw_values()[i], std::abs(a.axes()[0].node(i)));
}

// ------------------------------------------------------- tight minorants

TEST(TightMinorant, AbsAtZeroSlope) {
  EXPECT_EQ(tight_minorant_offset(abs_fn(), v1(0.0)), 0.0);
}

TEST(TightMinorant, SlopeOutsideRangeHasNoMinorant) {
  EXPECT_THROW(tight_minorant_offset(abs_fn(), v1(2.0)), NoMinorant);
}

TEST(TightMinorant, PointIndicator) {
  // <5, 1> - 0 is the conjugate at 5, so the offset is -5.
  EXPECT_EQ(tight_minorant_offset(PointIndicatorFn(v1(1.0)), v1(5.0)), -5.0);
}

TEST(TightMinorant, IsTightOnSamples) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-4, 4);
  const SampleSpec samples;
  for (int t = 0; t < 20; ++t) {
    const PolyhedralFn f = pw({{-2.0, U(rng)}, {0.5, U(rng)}, {3.0, U(rng)}});
    const double u = U(rng) * 0.45;  // inside [-2, 3]
    const double a = tight_minorant_offset(f, v1(u));
    const PolyhedralFn h = pw({{u, a}});
    EXPECT_TRUE(leq(h, f, samples, 1e-9).holds);
    EXPECT_NEAR(a, -oracle_conj_poly_1d(f, u), 1e-12);
  }
}

TEST(TightMinorant, TwoDimensionalPolyhedral) {
  // f = |x1| + |x2| has f*(u) = 0 on the unit square of slopes.
  std::vector<AffineFn> pieces;
  for (double s1 : {-1.0, 1.0})
    for (double s2 : {-1.0, 1.0}) pieces.emplace_back(vec({s1, s2}), 0.0);
  const PolyhedralFn f(pieces);
  EXPECT_NEAR(tight_minorant_offset(f, vec({0.5, -0.25})), 0.0, 1e-12);
  EXPECT_THROW(tight_minorant_offset(f, vec({1.5, 0.0})), NoMinorant);
}

// ---------------------------------------------------------- detect_affine

TEST(DetectAffine, SinglePiece) {
  const auto h = detect_affine(pw({{2.0, 3.0}}));
  ASSERT_TRUE(h);
  EXPECT_EQ(h->slope[0], 2.0);
  EXPECT_EQ(h->offset, 3.0);
}

TEST(DetectAffine, TwoSlopesAreNotAffine) {
  EXPECT_FALSE(detect_affine(abs_fn()));
}

TEST(DetectAffine, ParallelPiecesKeepLargestOffset) {
  const auto h = detect_affine(pw({{1.0, 0.0}, {1.0, 5.0}}));
  ASSERT_TRUE(h);
  EXPECT_EQ(h->slope[0], 1.0);
  EXPECT_EQ(h->offset, 5.0);
}

TEST(DetectAffine, RestrictedDomainIsNotAffine) {
  EXPECT_FALSE(detect_affine(pw({{1.0, 0.0}}, -1.0, 1.0)));
  EXPECT_FALSE(detect_affine(ConvexFn(PointIndicatorFn(v1(0.0)))));
}

TEST(DetectAffine, AgreesWithSampledOrder) {
  // If f <= h_{u,a} holds everywhere and f is affine, the detected slope is u.
  const PolyhedralFn f = pw({{0.75, -1.0}, {0.75, -2.0}});
  const PolyhedralFn h = pw({{0.75, -1.0}});
  ASSERT_TRUE(leq(f, h).holds);
  const auto d = detect_affine(f);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->slope[0], 0.75);
}

// ------------------------------------------------------------ approx_equal

TEST(ApproxEqual, InfinitePatternsMustMatch) {
  const PolyhedralFn a = pw({{0.0, 0.0}}, -1.0, 1.0);
  const PolyhedralFn b = pw({{0.0, 0.0}}, -1.0, 2.0);
  EXPECT_TRUE(approx_equal(a, a, 1e-12).equal);
  EXPECT_FALSE(approx_equal(a, b, 1e-12).equal);
}

// ---------------------------------------------------------------- small LP

TEST(SmallLp, MaximizeOverBox) {
  using lp::Constraint;
  std::vector<Constraint> box{{vec({1, 0}), 1}, {vec({-1, 0}), 1}, {vec({0, 1}), 2},
                              {vec({0, -1}), 2}};
  const auto m = lp::maximize(vec({1.0, 1.0}), box, 2);
  ASSERT_TRUE(m);
  EXPECT_NEAR(m->raw(), 3.0, 1e-12);
  const auto p = lp::feasible_point(box, 2);
  ASSERT_TRUE(p);
  for (const auto& c : box) EXPECT_LE(c.a.dot(*p), c.b + 1e-12);
}

TEST(SmallLp, UnboundedAndInfeasible) {
  using lp::Constraint;
  std::vector<Constraint> half{{vec({1, 0}), 1}};
  const auto m = lp::maximize(vec({0.0, 1.0}), half, 2);
  ASSERT_TRUE(m);
  EXPECT_TRUE(m->is_infinite());
  std::vector<Constraint> empty{{vec({1}), -1}, {vec({-1}), -1}};
  EXPECT_FALSE(lp::feasible_point(empty, 1));
  EXPECT_FALSE(lp::maximize(vec({1.0}), empty, 1));
}

TEST(SmallLp, ThreeVariablesAgainstVertexEnumeration) {
  // A random polytope given by a box cut by random halfspaces; the maximum of a
  // linear objective is checked against brute-force vertex enumeration.
  using lp::Constraint;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int t = 0; t < 10; ++t) {
    std::vector<Constraint> cs;
    for (int k = 0; k < 3; ++k) {
      Vec e = Vec::Zero(3);
      e[k] = 1;
      cs.push_back({e, 2});
      cs.push_back({-e, 2});
    }
    for (int k = 0; k < 3; ++k) cs.push_back({vec({U(rng), U(rng), U(rng)}), 1.0 + U(rng) * 0.5 + 0.5});
    const Vec obj = vec({U(rng), U(rng), U(rng)});
    double best = -kInf;
    for (std::size_t a = 0; a < cs.size(); ++a)
      for (std::size_t b = a + 1; b < cs.size(); ++b)
        for (std::size_t c = b + 1; c < cs.size(); ++c) {
          Mat A(3, 3);
          A.row(0) = cs[a].a.transpose();
          A.row(1) = cs[b].a.transpose();
          A.row(2) = cs[c].a.transpose();
          if (std::abs(A.determinant()) < 1e-9) continue;
          const Vec z = A.partialPivLu().solve(vec({cs[a].b, cs[b].b, cs[c].b}));
          bool ok = true;
          for (const auto& q : cs) ok = ok && q.a.dot(z) <= q.b + 1e-9;
          if (ok) best = std::max(best, obj.dot(z));
        }
    const auto m = lp::maximize(obj, cs, 3);
    ASSERT_TRUE(m);
    EXPECT_NEAR(m->raw(), best, 1e-9);
  }
}
