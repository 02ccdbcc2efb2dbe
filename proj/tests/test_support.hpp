#pragma once

// Helpers and independent oracles shared by the unit and acceptance tests. The
// oracles deliberately avoid the library's algorithms: conjugates are computed
// by enumerating candidate maximizers, operators by evaluating their defining
// formula pointwise.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "conjcalc/conjugate.hpp"
#include "conjcalc/convex_fn.hpp"
#include "conjcalc/operators.hpp"

namespace testing_support {

using namespace conjcalc;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vec v1(double x) { return vec({x}); }

inline Mat mat1(double e) { return Mat::Constant(1, 1, e); }

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Mat m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

/// 1-D max of pieces (slope, offset) on [lo, hi] (either side may be open).
inline PolyhedralFn pw(std::initializer_list<std::pair<double, double>> pieces,
                       std::optional<double> lo = std::nullopt,
                       std::optional<double> hi = std::nullopt) {
  std::vector<AffineFn> ps;
  for (const auto& [u, a] : pieces) ps.emplace_back(v1(u), a);
  std::vector<Halfspace> dom;
  if (lo) dom.emplace_back(v1(-1.0), -*lo);
  if (hi) dom.emplace_back(v1(1.0), *hi);
  return PolyhedralFn(std::move(ps), std::move(dom));
}

inline PolyhedralFn abs_fn() { return pw({{1.0, 0.0}, {-1.0, 0.0}}); }

/// Interval [lo, hi] of a 1-D polyhedral domain, read off the halfspaces.
inline std::pair<double, double> interval_of(const PolyhedralFn& f) {
  double lo = -kInf, hi = kInf;
  for (const auto& h : f.domain()) {
    const double a = h.normal[0];
    if (a > 0) hi = std::min(hi, h.bound / a);
    if (a < 0) lo = std::max(lo, h.bound / a);
  }
  return {lo, hi};
}

/// f*(u) for 1-D polyhedral f by enumerating every possible maximizer: finite
/// domain ends and all pairwise intersections of pieces inside the domain.
/// Unbounded directions are handled by comparing u with the extreme slopes.
inline double oracle_conj_poly_1d(const PolyhedralFn& f, double u) {
  const auto [lo, hi] = interval_of(f);
  double smin = kInf, smax = -kInf;
  for (const auto& p : f.pieces()) {
    smin = std::min(smin, p.slope[0]);
    smax = std::max(smax, p.slope[0]);
  }
  if (std::isinf(hi) && u > smax) return kInf;
  if (std::isinf(lo) && u < smin) return kInf;
  auto value = [&](double x) {
    double fx = -kInf;
    for (const auto& p : f.pieces()) fx = std::max(fx, p.slope[0] * x + p.offset);
    return u * x - fx;
  };
  std::vector<double> cands;
  if (std::isfinite(lo)) cands.push_back(lo);
  if (std::isfinite(hi)) cands.push_back(hi);
  const auto& ps = f.pieces();
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      const double ds = ps[i].slope[0] - ps[j].slope[0];
      if (ds == 0.0) continue;
      const double x = (ps[j].offset - ps[i].offset) / ds;
      if (x >= lo && x <= hi) cands.push_back(x);
    }
  if (cands.empty()) {
    // a single active slope on an unbounded domain: finite only at that slope
    double best = -kInf;
    for (const auto& p : ps)
      if (p.slope[0] == u) best = std::max(best, -p.offset);
    return std::isinf(best) ? kInf : best;
  }
  double best = -kInf;
  for (double x : cands) best = std::max(best, value(x));
  return best;
}

/// max_i (u x_i - f_i) over finite samples.
inline double oracle_discrete_conj(const std::vector<double>& x, const std::vector<double>& f,
                                   double u) {
  double best = -kInf;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(f[i])) best = std::max(best, u * x[i] - f[i]);
  return best;
}

/// tau f(Ex + c) + <w,x> + beta, straight from the definition.
inline double oracle_apply(const PreservingOp& T, const ConvexFn& f, const Point& x) {
  const ExtReal inner = eval(f, T.E() * x + T.c());
  if (inner.is_infinite()) return kInf;
  return T.tau() * inner.raw() + T.w().dot(x) + T.beta();
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

/// Relative closeness used across the tests: |a-b| <= tol * max(1, |a|, |b|),
/// and two +inf values are equal.
inline bool close(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline GridFn sample_1d(const ConvexFn& f, double lo, double hi, int n) {
  return sample_to_grid(f, {GridAxis{lo, hi, n}});
}

template <class F>
GridFn grid_from(F&& fn, double lo, double hi, int n) {
  std::vector<double> vals;
  const GridAxis ax{lo, hi, n};
  for (int i = 0; i < n; ++i) vals.push_back(fn(ax.node(i)));
  return GridFn({ax}, std::move(vals));
}

}  // namespace testing_support
