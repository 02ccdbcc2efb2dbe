#include "conjcalc/convex_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "conjcalc/errors.hpp"
#include "conjcalc/small_lp.hpp"

namespace conjcalc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNodeSnap = 1e-9;

void check_dim(int n, const char* what) {
  if (n < 1 || n > kMaxDim)
    throw InvalidArgument(std::string(what) + ": dimension must be in 1..3, got " +
                          std::to_string(n));
}

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": coordinates must be finite");
}

void check_point(const Point& x, int n, const char* what) {
  if (x.size() != n) throw DimensionMismatch(what, n, x.size());
}

// Single-axis position of x: either an exact node or a bracketing pair with the
// weight of the upper node.
struct AxisPos {
  int lower;
  double t;  // 0 means exactly on `lower`
};

std::optional<AxisPos> locate(const GridAxis& ax, double x) {
  double s = (x - ax.lo) / ax.step();
  const double r = std::round(s);
  if (std::abs(s - r) <= kNodeSnap) s = r;
  if (s < 0.0 || s > ax.count - 1) return std::nullopt;
  int lower = static_cast<int>(std::floor(s));
  if (lower == ax.count - 1) return AxisPos{lower, 0.0};
  return AxisPos{lower, s - lower};
}

}  // namespace

AffineFn::AffineFn(DualVec u, double alpha) : slope(std::move(u)), offset(alpha) {
  check_dim(static_cast<int>(slope.size()), "AffineFn slope");
  check_finite(slope, "AffineFn slope");
  if (!std::isfinite(offset)) throw InvalidArgument("AffineFn offset must be finite");
}

double AffineFn::operator()(const Point& x) const {
  check_point(x, dim(), "AffineFn");
  return slope.dot(x) + offset;
}

Halfspace::Halfspace(DualVec a, double b) : normal(std::move(a)), bound(b) {
  check_dim(static_cast<int>(normal.size()), "Halfspace normal");
  check_finite(normal, "Halfspace normal");
  if (!std::isfinite(bound)) throw InvalidArgument("Halfspace bound must be finite");
  if (normal.cwiseAbs().maxCoeff() == 0.0)
    throw InvalidArgument("Halfspace normal must be nonzero");
}

bool Halfspace::contains(const Point& x) const {
  const double lhs = normal.dot(x);
  const double slack = 1e-12 * (1.0 + std::abs(bound) + normal.cwiseAbs().dot(x.cwiseAbs()));
  return lhs <= bound + slack;
}

PolyhedralFn::PolyhedralFn(std::vector<AffineFn> pieces, std::vector<Halfspace> domain)
    : pieces_(std::move(pieces)), domain_(std::move(domain)) {
  if (pieces_.empty()) throw InvalidArgument("PolyhedralFn needs at least one piece");
  dim_ = pieces_.front().dim();
  check_dim(dim_, "PolyhedralFn");
  for (const auto& p : pieces_)
    if (p.dim() != dim_) throw DimensionMismatch("PolyhedralFn piece", dim_, p.dim());
  for (const auto& h : domain_)
    if (h.dim() != dim_) throw DimensionMismatch("PolyhedralFn halfspace", dim_, h.dim());

  std::vector<lp::Constraint> cs;
  cs.reserve(domain_.size());
  for (const auto& h : domain_) cs.push_back({h.normal, h.bound});
  auto p = lp::feasible_point(cs, dim_);
  if (!p) throw ImproperFunction("PolyhedralFn: empty domain (function is +inf everywhere)");
  domain_point_ = *p;
}

bool PolyhedralFn::in_domain(const Point& x) const {
  return std::all_of(domain_.begin(), domain_.end(),
                     [&](const Halfspace& h) { return h.contains(x); });
}

ExtReal PolyhedralFn::operator()(const Point& x) const {
  check_point(x, dim_, "PolyhedralFn");
  if (!in_domain(x)) return ExtReal::infinity();
  double best = -kInf;
  for (const auto& p : pieces_) best = std::max(best, p.slope.dot(x) + p.offset);
  return ExtReal(best);
}

PointIndicatorFn::PointIndicatorFn(Point anchor, double level)
    : anchor_(std::move(anchor)), level_(level) {
  check_dim(static_cast<int>(anchor_.size()), "PointIndicatorFn");
  check_finite(anchor_, "PointIndicatorFn anchor");
  if (!std::isfinite(level_)) throw InvalidArgument("PointIndicatorFn level must be finite");
}

ExtReal PointIndicatorFn::operator()(const Point& x) const {
  check_point(x, dim(), "PointIndicatorFn");
  return x == anchor_ ? ExtReal(level_) : ExtReal::infinity();
}

GridFn::GridFn(std::vector<GridAxis> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  check_dim(static_cast<int>(axes_.size()), "GridFn");
  std::size_t expected = 1;
  for (const auto& ax : axes_) {
    if (ax.count < 2) throw InvalidArgument("GridFn axis needs at least 2 nodes");
    if (!(std::isfinite(ax.lo) && std::isfinite(ax.hi) && ax.lo < ax.hi))
      throw InvalidArgument("GridFn axis needs finite lo < hi");
    expected *= static_cast<std::size_t>(ax.count);
  }
  if (values_.size() != expected)
    throw InvalidArgument("GridFn: expected " + std::to_string(expected) + " values, got " +
                          std::to_string(values_.size()));
  bool any_finite = false;
  for (double v : values_) {
    if (std::isnan(v) || v == -kInf) throw InvalidArgument("GridFn values must be real or +inf");
    any_finite = any_finite || std::isfinite(v);
  }
  if (!any_finite) throw ImproperFunction("GridFn: all values are +inf");
}

std::size_t GridFn::flat_index(std::span<const int> index) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k)
    flat = flat * static_cast<std::size_t>(axes_[k].count) + static_cast<std::size_t>(index[k]);
  return flat;
}

std::vector<int> GridFn::multi_index(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t k = axes_.size(); k-- > 0;) {
    const auto c = static_cast<std::size_t>(axes_[k].count);
    idx[k] = static_cast<int>(flat % c);
    flat /= c;
  }
  return idx;
}

Point GridFn::node(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point x(dim());
  for (int k = 0; k < dim(); ++k) x[k] = axes_[k].node(idx[k]);
  return x;
}

ExtReal GridFn::operator()(const Point& x) const {
  check_point(x, dim(), "GridFn");
  const int n = dim();
  std::array<AxisPos, kMaxDim> pos{};
  for (int k = 0; k < n; ++k) {
    auto p = locate(axes_[k], x[k]);
    if (!p) return ExtReal::infinity();
    pos[k] = *p;
  }
  double acc = 0.0;
  std::array<int, kMaxDim> idx{};
  for (int corner = 0; corner < (1 << n); ++corner) {
    double weight = 1.0;
    for (int k = 0; k < n; ++k) {
      const bool upper = (corner >> k) & 1;
      weight *= upper ? pos[k].t : 1.0 - pos[k].t;
      idx[k] = pos[k].lower + (upper ? 1 : 0);
    }
    if (weight == 0.0) continue;
    const double v = values_[flat_index(std::span<const int>(idx.data(), n))];
    if (!std::isfinite(v)) return ExtReal::infinity();
    acc += weight * v;
  }
  return ExtReal(acc);
}

std::string_view to_string(FnKind kind) noexcept {
  switch (kind) {
    case FnKind::polyhedral: return "max_affine";
    case FnKind::point_indicator: return "point_indicator";
    case FnKind::grid: return "grid";
  }
  return "?";
}

int ConvexFn::dim() const {
  return std::visit([](const auto& f) { return f.dim(); }, rep_);
}

ExtReal eval(const ConvexFn& f, const Point& x) {
  if (x.size() != f.dim()) throw DimensionMismatch("eval", f.dim(), x.size());
  return std::visit([&](const auto& rep) { return rep(x); }, f.rep());
}

std::vector<Point> SampleSpec::points(int dim) const {
  check_dim(dim, "SampleSpec");
  const int per_axis = lattice_per_axis > 0 ? lattice_per_axis : default_lattice(dim);
  std::vector<Point> pts;
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(per_axis);
  pts.reserve(total + static_cast<std::size_t>(random_points));
  const GridAxis ax{box_lo, box_hi, per_axis};
  std::vector<int> idx(dim, 0);
  for (std::size_t i = 0; i < total; ++i) {
    Point x(dim);
    for (int k = 0; k < dim; ++k) x[k] = per_axis == 1 ? box_lo : ax.node(idx[k]);
    pts.push_back(std::move(x));
    for (int k = dim - 1; k >= 0; --k) {
      if (++idx[k] < per_axis) break;
      idx[k] = 0;
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(box_lo, box_hi);
  for (int r = 0; r < random_points; ++r) {
    Point x(dim);
    for (int k = 0; k < dim; ++k) x[k] = unif(rng);
    pts.push_back(std::move(x));
  }
  return pts;
}

namespace {

std::vector<Point> comparison_points(const ConvexFn& f, const ConvexFn& g,
                                     const SampleSpec& sampling) {
  if (f.dim() != g.dim()) throw DimensionMismatch("comparison", f.dim(), g.dim());
  const GridFn* gf = f.grid();
  const GridFn* gg = g.grid();
  if (gf && gg && gf->axes() != gg->axes())
    throw InvalidArgument("grid functions with different axes are not comparable");
  const GridFn* grid = gf ? gf : gg;
  if (!grid) return sampling.points(f.dim());
  std::vector<Point> pts;
  pts.reserve(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) pts.push_back(grid->node(i));
  return pts;
}

}  // namespace

OrderReport leq(const ConvexFn& f, const ConvexFn& g, const SampleSpec& sampling, double eps) {
  OrderReport report;
  for (const auto& x : comparison_points(f, g, sampling)) {
    ++report.samples_checked;
    const ExtReal fx = eval(f, x);
    const ExtReal gx = eval(g, x);
    if (gx.is_infinite()) continue;
    if (fx.is_infinite() || fx.raw() > gx.raw() + eps) {
      report.holds = false;
      report.witness = Witness{x, fx, gx};
      return report;
    }
  }
  return report;
}

EqualityReport approx_equal(const ConvexFn& f, const ConvexFn& g, double tol,
                            const SampleSpec& sampling) {
  EqualityReport report;
  if (f.dim() != g.dim()) throw DimensionMismatch("approx_equal", f.dim(), g.dim());
  auto close = [tol](double a, double b) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
  };
  if (f.indicator() && g.indicator()) {
    const auto& a = *f.indicator();
    const auto& b = *g.indicator();
    report.samples_checked = 1;
    bool same_anchor = true;
    for (int k = 0; k < a.dim(); ++k) same_anchor = same_anchor && close(a.anchor()[k], b.anchor()[k]);
    report.max_abs_diff = std::abs(a.level() - b.level());
    if (!same_anchor || !close(a.level(), b.level())) {
      report.equal = false;
      report.witness = Witness{a.anchor(), ExtReal(a.level()), b(a.anchor())};
    }
    return report;
  }
  for (const auto& x : comparison_points(f, g, sampling)) {
    ++report.samples_checked;
    const ExtReal fx = eval(f, x);
    const ExtReal gx = eval(g, x);
    if (fx.is_infinite() && gx.is_infinite()) continue;
    const bool ok = fx.is_finite() && gx.is_finite() && close(fx.raw(), gx.raw());
    if (fx.is_finite() && gx.is_finite())
      report.max_abs_diff = std::max(report.max_abs_diff, std::abs(fx.raw() - gx.raw()));
    if (!ok && report.equal) {
      report.equal = false;
      report.witness = Witness{x, fx, gx};
    }
  }
  return report;
}

ConvexFn sup_family(std::span<const ConvexFn> fs) {
  if (fs.empty()) throw InvalidArgument("sup_family needs at least one function");
  const int n = fs.front().dim();
  const FnKind kind = fs.front().kind();
  for (const auto& f : fs) {
    if (f.dim() != n) throw DimensionMismatch("sup_family", n, f.dim());
    if (f.kind() != kind)
      throw MixedRepresentation("sup_family: all functions must share one representation");
  }
  if (fs.size() == 1) return fs.front();

  switch (kind) {
    case FnKind::polyhedral: {
      std::vector<AffineFn> pieces;
      std::vector<Halfspace> domain;
      for (const auto& f : fs) {
        const auto& p = *f.polyhedral();
        pieces.insert(pieces.end(), p.pieces().begin(), p.pieces().end());
        domain.insert(domain.end(), p.domain().begin(), p.domain().end());
      }
      return PolyhedralFn(std::move(pieces), std::move(domain));
    }
    case FnKind::point_indicator: {
      const auto& first = *fs.front().indicator();
      double level = first.level();
      for (const auto& f : fs) {
        const auto& ind = *f.indicator();
        if (ind.anchor() != first.anchor())
          throw ImproperFunction("sup_family: point indicators at different anchors");
        level = std::max(level, ind.level());
      }
      return PointIndicatorFn(first.anchor(), level);
    }
    case FnKind::grid: {
      const auto& first = *fs.front().grid();
      std::vector<double> values(first.raw_values().begin(), first.raw_values().end());
      for (const auto& f : fs) {
        const auto& g = *f.grid();
        if (g.axes() != first.axes())
          throw InvalidArgument("sup_family: grids must share identical axes");
        for (std::size_t i = 0; i < values.size(); ++i)
          values[i] = std::max(values[i], g.raw_values()[i]);
      }
      if (std::none_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
        throw ImproperFunction("sup_family: supremum is +inf at every node");
      return GridFn(first.axes(), std::move(values));
    }
  }
  throw InvalidArgument("sup_family: unknown representation");
}

std::optional<AffineFn> detect_affine(const PolyhedralFn& f) {
  if (!f.full_domain()) return std::nullopt;
  const auto& pieces = f.pieces();
  const DualVec& u = pieces.front().slope;
  const double tol = 1e-12 * std::max(1.0, u.cwiseAbs().maxCoeff());
  double alpha = pieces.front().offset;
  for (const auto& p : pieces) {
    if ((p.slope - u).cwiseAbs().maxCoeff() > tol) return std::nullopt;
    alpha = std::max(alpha, p.offset);
  }
  return AffineFn(u, alpha);
}

std::optional<AffineFn> detect_affine(const ConvexFn& f) {
  if (const auto* p = f.polyhedral()) return detect_affine(*p);
  return std::nullopt;
}

PolyhedralFn as_polyhedral(const AffineFn& h) { return PolyhedralFn({h}); }

}  // namespace conjcalc
