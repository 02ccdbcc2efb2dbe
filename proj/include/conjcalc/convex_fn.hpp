#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "conjcalc/ext_real.hpp"
#include "conjcalc/linalg.hpp"

namespace conjcalc {

/// h_{u,alpha}(x) = <u,x> + alpha.
struct AffineFn {
  DualVec slope;
  double offset = 0.0;

  AffineFn() = default;
  AffineFn(DualVec u, double alpha);

  int dim() const noexcept { return static_cast<int>(slope.size()); }
  double operator()(const Point& x) const;
};

/// { x : <normal, x> <= bound } with a nonzero normal.
struct Halfspace {
  DualVec normal;
  double bound = 0.0;

  Halfspace() = default;
  Halfspace(DualVec a, double b);

  int dim() const noexcept { return static_cast<int>(normal.size()); }
  /// Membership with a relative slack of 1e-12 so that pulled-back boundaries
  /// survive rounding.
  bool contains(const Point& x) const;
};

/// max of finitely many affine pieces on a polyhedral domain, +inf outside.
/// Construction rejects empty domains.
class PolyhedralFn {
 public:
  PolyhedralFn(std::vector<AffineFn> pieces, std::vector<Halfspace> domain = {});

  int dim() const noexcept { return dim_; }
  const std::vector<AffineFn>& pieces() const noexcept { return pieces_; }
  const std::vector<Halfspace>& domain() const noexcept { return domain_; }
  bool full_domain() const noexcept { return domain_.empty(); }
  bool in_domain(const Point& x) const;
  /// A point of the effective domain found during the properness check.
  const Point& domain_point() const noexcept { return domain_point_; }

  ExtReal operator()(const Point& x) const;

 private:
  int dim_;
  std::vector<AffineFn> pieces_;
  std::vector<Halfspace> domain_;
  Point domain_point_;
};

/// level at the anchor, +inf elsewhere.
class PointIndicatorFn {
 public:
  explicit PointIndicatorFn(Point anchor, double level = 0.0);

  int dim() const noexcept { return static_cast<int>(anchor_.size()); }
  const Point& anchor() const noexcept { return anchor_; }
  double level() const noexcept { return level_; }

  ExtReal operator()(const Point& x) const;

 private:
  Point anchor_;
  double level_;
};

/// Uniform axis with `count` nodes from lo to hi inclusive.
struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  int count = 2;

  double step() const noexcept { return (hi - lo) / (count - 1); }
  double node(int i) const noexcept { return i == count - 1 ? hi : lo + step() * i; }

  friend bool operator==(const GridAxis&, const GridAxis&) = default;
};

/// Dense samples at the nodes of a tensor grid, stored row-major (last axis
/// fastest). Between nodes the value is the multilinear interpolant; outside the
/// box it is +inf.
class GridFn {
 public:
  GridFn(std::vector<GridAxis> axes, std::vector<double> values);

  int dim() const noexcept { return static_cast<int>(axes_.size()); }
  const std::vector<GridAxis>& axes() const noexcept { return axes_; }
  std::size_t size() const noexcept { return values_.size(); }
  /// Node values with +inf allowed.
  std::span<const double> raw_values() const noexcept { return values_; }
  ExtReal value_at(std::size_t flat) const { return ExtReal(values_[flat]); }

  std::size_t flat_index(std::span<const int> index) const;
  std::vector<int> multi_index(std::size_t flat) const;
  Point node(std::size_t flat) const;

  ExtReal operator()(const Point& x) const;

 private:
  std::vector<GridAxis> axes_;
  std::vector<double> values_;
};

enum class FnKind { polyhedral, point_indicator, grid };

std::string_view to_string(FnKind kind) noexcept;

/// Proper lsc convex function on R^n, 1 <= n <= 3.
class ConvexFn {
 public:
  using Rep = std::variant<PolyhedralFn, PointIndicatorFn, GridFn>;

  ConvexFn(PolyhedralFn f) : rep_(std::move(f)) {}        // NOLINT
  ConvexFn(PointIndicatorFn f) : rep_(std::move(f)) {}    // NOLINT
  ConvexFn(GridFn f) : rep_(std::move(f)) {}              // NOLINT

  int dim() const;
  FnKind kind() const noexcept { return static_cast<FnKind>(rep_.index()); }
  const Rep& rep() const noexcept { return rep_; }

  const PolyhedralFn* polyhedral() const noexcept { return std::get_if<PolyhedralFn>(&rep_); }
  const PointIndicatorFn* indicator() const noexcept {
    return std::get_if<PointIndicatorFn>(&rep_);
  }
  const GridFn* grid() const noexcept { return std::get_if<GridFn>(&rep_); }

 private:
  Rep rep_;
};

/// f(x). Throws DimensionMismatch.
ExtReal eval(const ConvexFn& f, const Point& x);

/// Deterministic lattice over [box_lo, box_hi]^n plus seeded random points.
struct SampleSpec {
  double box_lo = -10.0;
  double box_hi = 10.0;
  /// Nodes per axis; 0 selects default_lattice(n).
  int lattice_per_axis = 0;
  int random_points = 64;
  std::uint64_t seed = 0x5eedULL;

  static int default_lattice(int dim) noexcept { return dim <= 2 ? 257 : 33; }
  std::vector<Point> points(int dim) const;
};

inline constexpr double kOrderEps = 1e-9;

struct Witness {
  Point x;
  ExtReal lhs;
  ExtReal rhs;
};

struct OrderReport {
  bool holds = true;
  std::optional<Witness> witness;
  std::size_t samples_checked = 0;
};

/// f <= g + eps at every sample (+inf <= +inf holds). When either argument is a
/// grid the samples are that grid's nodes; two grids must share their axes.
OrderReport leq(const ConvexFn& f, const ConvexFn& g, const SampleSpec& sampling = {},
                double eps = kOrderEps);

/// Result of comparing two functions for equality on samples.
struct EqualityReport {
  bool equal = true;
  double max_abs_diff = 0.0;
  std::optional<Witness> witness;
  std::size_t samples_checked = 0;
};

/// |f - g| <= tol * max(1, |f|, |g|) at every sample, with +inf patterns equal.
/// Two point indicators are compared by anchor and level.
EqualityReport approx_equal(const ConvexFn& f, const ConvexFn& g, double tol,
                            const SampleSpec& sampling = {});

/// Pointwise supremum. Polyhedral: union of pieces, intersection of domains.
/// Grids: nodewise max on identical axes. Point indicators: same anchor only.
/// Throws ImproperFunction when the result is +inf everywhere and
/// MixedRepresentation for mixed inputs.
ConvexFn sup_family(std::span<const ConvexFn> fs);

/// Largest alpha with h_{u,alpha} <= f, i.e. -f*(u). Throws NoMinorant when
/// f*(u) = +inf.
double tight_minorant_offset(const ConvexFn& f, const DualVec& u);

/// The affine function f is equal to, if any. Requires a full domain and a
/// single slope among the pieces (ties within 1e-12); the offset is the largest.
std::optional<AffineFn> detect_affine(const PolyhedralFn& f);
std::optional<AffineFn> detect_affine(const ConvexFn& f);

/// The polyhedral function with the single piece h.
PolyhedralFn as_polyhedral(const AffineFn& h);

}  // namespace conjcalc
