#include "conjcalc/conjugate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "conjcalc/errors.hpp"
#include "conjcalc/exact_pwl.hpp"
#include "conjcalc/parallel.hpp"
#include "conjcalc/small_lp.hpp"

namespace conjcalc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCollinearTol = 1e-12;

std::vector<double> axis_nodes(const GridAxis& ax) {
  std::vector<double> x(static_cast<std::size_t>(ax.count));
  for (int i = 0; i < ax.count; ++i) x[static_cast<std::size_t>(i)] = ax.node(i);
  return x;
}

void check_dual_axes(const GridFn& f, const std::vector<GridAxis>& dual_axes) {
  if (static_cast<int>(dual_axes.size()) != f.dim())
    throw DimensionMismatch("dual axes", f.dim(), static_cast<long>(dual_axes.size()));
  for (const auto& ax : dual_axes)
    if (ax.count < 2 || !(ax.lo < ax.hi)) throw InvalidArgument("dual axis needs lo < hi, count >= 2");
}

// A grid with one finite node conjugates to an affine function exactly.
std::optional<ConjugateResult> single_node_conjugate(const GridFn& f, ConjMethod method) {
  std::optional<std::size_t> only;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f.raw_values()[i])) continue;
    if (only) return std::nullopt;
    only = i;
  }
  return ConjugateResult{as_polyhedral(AffineFn(f.node(*only), -f.raw_values()[*only])), method};
}

using Kernel = void (*)(std::span<const double>, std::span<const double>, std::span<const double>,
                        std::span<double>);

ConjugateResult conj_grid_1d(const GridFn& f, const std::vector<GridAxis>& dual_axes,
                             Kernel kernel, ConjMethod method) {
  if (f.dim() != 1) throw DimensionMismatch("1-D grid conjugate", 1, f.dim());
  check_dual_axes(f, dual_axes);
  if (auto r = single_node_conjugate(f, method)) return *r;
  const auto x = axis_nodes(f.axes()[0]);
  const auto u = axis_nodes(dual_axes[0]);
  std::vector<double> out(u.size());
  kernel(x, f.raw_values(), u, out);
  return {GridFn(dual_axes, std::move(out)), method};
}

// Slope range of the samples along `axis`, over adjacent finite pairs.
std::optional<std::pair<double, double>> slope_range(const GridFn& f, int axis) {
  const auto& axes = f.axes();
  const double h = axes[static_cast<std::size_t>(axis)].step();
  std::size_t stride = 1;
  for (std::size_t k = static_cast<std::size_t>(axis) + 1; k < axes.size(); ++k)
    stride *= static_cast<std::size_t>(axes[k].count);
  const auto count = static_cast<std::size_t>(axes[static_cast<std::size_t>(axis)].count);
  const auto vals = f.raw_values();
  double lo = kInf, hi = -kInf;
  for (std::size_t flat = 0; flat < vals.size(); ++flat) {
    const std::size_t pos = (flat / stride) % count;
    if (pos + 1 >= count) continue;
    const double a = vals[flat];
    const double b = vals[flat + stride];
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    const double s = (b - a) / h;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (lo > hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

}  // namespace

std::string_view to_string(ConjMethod m) noexcept {
  switch (m) {
    case ConjMethod::exact_polyhedral: return "exact-polyhedral";
    case ConjMethod::exact_indicator: return "exact-indicator";
    case ConjMethod::grid_naive: return "grid-naive";
    case ConjMethod::grid_llt: return "grid-llt";
  }
  return "?";
}

void legendre_naive_1d(std::span<const double> x, std::span<const double> f,
                       std::span<const double> u, std::span<double> out) {
  for (std::size_t j = 0; j < u.size(); ++j) {
    double best = -kInf;
    const double uj = u[j];
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(f[i])) continue;
      best = std::max(best, uj * x[i] - f[i]);
    }
    out[j] = best;
  }
}

namespace {

// True when a is a strict lower-hull turn between o and b (left turn beyond
// the collinearity tolerance).
inline bool strict_turn(double ox, double of, double ax, double af, double bx, double bf) {
  const double p = (ax - ox) * (bf - of);
  const double q = (af - of) * (bx - ox);
  return p - q > kCollinearTol * (std::abs(p) + std::abs(q));
}

constexpr std::size_t kHullChunk = 1024;
constexpr int kFilterPasses = 8;

}  // namespace

void legendre_llt_1d(std::span<const double> x, std::span<const double> f,
                     std::span<const double> u, std::span<double> out) {
  // Lower convex envelope by monotone chain (x is sorted). Points are taken in
  // cache-sized chunks; inside a chunk, any point lying on or above the chord of
  // its two neighbours cannot be an envelope vertex and is dropped by a
  // branch-free compaction pass before the chain sees it. A global envelope
  // vertex is a vertex of its chunk's envelope too, so the filter is exact.
  std::vector<double> hx(kHullChunk), hf(kHullChunk);
  std::size_t top = 0;
  std::array<double, kHullChunk> cx{}, cf{};
  for (std::size_t start = 0; start < x.size(); start += kHullChunk) {
    std::size_t n = std::min(x.size(), start + kHullChunk) - start;
    const double* sx = x.data() + start;
    const double* sf = f.data() + start;
    bool all_finite = true;
    for (std::size_t i = 0; i < n; ++i) all_finite &= (sf[i] - sf[i] == 0.0);
    if (!all_finite) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < n; ++i) {
        cx[k] = sx[i];
        cf[k] = sf[i];
        k += std::isfinite(sf[i]) ? 1 : 0;
      }
      n = k;
      sx = cx.data();
      sf = cf.data();
    }
    // The first pass reads the caller's arrays directly; later passes compact
    // the staging buffer in place (the write index never passes the read index).
    for (int pass = 0; pass < kFilterPasses && n > 2; ++pass) {
      std::size_t m = 1;
      double ox = sx[0], of = sf[0], ax = sx[1], af = sf[1];
      cx[0] = ox;
      cf[0] = of;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double bx = sx[i + 1], bf = sf[i + 1];
        const bool keep = (ax - ox) * (bf - of) > (af - of) * (bx - ox);
        cx[m] = ax;
        cf[m] = af;
        m += keep ? 1 : 0;
        ox = ax;
        of = af;
        ax = bx;
        af = bf;
      }
      cx[m] = sx[n - 1];
      cf[m] = sf[n - 1];
      const bool shrunk = m + 1 < n;
      n = m + 1;
      sx = cx.data();
      sf = cf.data();
      if (!shrunk) break;
    }
    if (hx.size() < top + n) {
      hx.resize(2 * (top + n));
      hf.resize(2 * (top + n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      while (top >= 2 && !strict_turn(hx[top - 2], hf[top - 2], hx[top - 1], hf[top - 1], sx[i], sf[i]))
        --top;
      hx[top] = sx[i];
      hf[top] = sf[i];
      ++top;
    }
  }
  hx.resize(top);
  hf.resize(top);
  if (hx.empty()) {
    std::fill(out.begin(), out.end(), -kInf);
    return;
  }
  // Merge the dual nodes with the envelope edge slopes: vertex k maximizes
  // u*x - f for u between the slopes of its two incident edges.
  const std::size_t h = hx.size();
  std::vector<double> slope(h, kInf);
  for (std::size_t k = 0; k + 1 < h; ++k) slope[k] = (hf[k + 1] - hf[k]) / (hx[k + 1] - hx[k]);
  std::size_t k = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double uj = u[j];
    while (uj > slope[k]) ++k;
    out[j] = uj * hx[k] - hf[k];
  }
}

ConjugateResult conj_affine(const AffineFn& h) {
  return {PointIndicatorFn(h.slope, -h.offset), ConjMethod::exact_indicator};
}

ConjugateResult conj_polyhedral_1d(const PolyhedralFn& f) {
  if (f.dim() != 1) throw DimensionMismatch("conj_polyhedral_1d", 1, f.dim());
  return {exact::to_polyhedral(exact::conjugate(exact::from_polyhedral(f))),
          ConjMethod::exact_polyhedral};
}

ConjugateResult conj_indicator(const PointIndicatorFn& f) {
  return {as_polyhedral(AffineFn(f.anchor(), -f.level())), ConjMethod::exact_polyhedral};
}

ConjugateResult conj_grid_naive(const GridFn& f, const std::vector<GridAxis>& dual_axes) {
  return conj_grid_1d(f, dual_axes, &legendre_naive_1d, ConjMethod::grid_naive);
}

ConjugateResult conj_grid_llt(const GridFn& f, const std::vector<GridAxis>& dual_axes) {
  return conj_grid_1d(f, dual_axes, &legendre_llt_1d, ConjMethod::grid_llt);
}

ConjugateResult conj_grid_nd(const GridFn& f, const std::vector<GridAxis>& dual_axes,
                             ConjPreference inner) {
  const int n = f.dim();
  if (n < 2) throw InvalidArgument("conj_grid_nd expects n in {2, 3}; use the 1-D transforms");
  check_dual_axes(f, dual_axes);
  const ConjMethod method =
      inner == ConjPreference::naive ? ConjMethod::grid_naive : ConjMethod::grid_llt;
  if (auto r = single_node_conjugate(f, method)) return *r;
  const Kernel kernel = inner == ConjPreference::naive ? &legendre_naive_1d : &legendre_llt_1d;

  // Shape of the working array; axis k switches from primal to dual count once
  // transformed.
  std::vector<std::size_t> shape;
  for (const auto& ax : f.axes()) shape.push_back(static_cast<std::size_t>(ax.count));
  std::vector<double> work(f.raw_values().begin(), f.raw_values().end());

  for (int axis = n - 1; axis >= 0; --axis) {
    const auto k = static_cast<std::size_t>(axis);
    const auto x = axis_nodes(f.axes()[k]);
    const auto u = axis_nodes(dual_axes[k]);
    std::size_t inner_stride = 1;
    for (std::size_t j = k + 1; j < shape.size(); ++j) inner_stride *= shape[j];
    std::size_t outer = 1;
    for (std::size_t j = 0; j < k; ++j) outer *= shape[j];
    const std::size_t n_in = shape[k];
    const std::size_t n_out = u.size();
    std::vector<double> next(outer * n_out * inner_stride);

    parallel_for(outer * inner_stride, [&](std::size_t line) {
      const std::size_t o = line / inner_stride;
      const std::size_t r = line % inner_stride;
      std::vector<double> src(n_in), dst(n_out);
      for (std::size_t i = 0; i < n_in; ++i) src[i] = work[(o * n_in + i) * inner_stride + r];
      kernel(x, src, u, dst);
      for (std::size_t j = 0; j < n_out; ++j) next[(o * n_out + j) * inner_stride + r] = dst[j];
    });

    shape[k] = n_out;
    // sup_{x_k} [u_k x_k + phi] = sup_{x_k} [u_k x_k - (-phi)]: the next pass
    // transforms -phi. A row that was +inf everywhere gives -inf, i.e. a +inf sample.
    if (axis > 0)
      for (double& v : next) v = -v;
    work = std::move(next);
  }
  return {GridFn(dual_axes, std::move(work)), method};
}

std::vector<GridAxis> default_dual_axes(const GridFn& f, int nodes) {
  std::vector<GridAxis> out;
  for (int k = 0; k < f.dim(); ++k) {
    const int count = nodes > 0 ? nodes : (f.dim() == 1 ? 513 : f.axes()[static_cast<std::size_t>(k)].count);
    const auto range = slope_range(f, k);
    if (!range) {
      out.push_back({-1.0, 1.0, count});
      continue;
    }
    const auto [smin, smax] = *range;
    if (!(smax > smin)) {
      out.push_back({smin - 1.0, smax + 1.0, count});
      continue;
    }
    // Integer margin so that smin and smax land on nodes; ~10% total widening.
    const int margin = static_cast<int>(std::lround((count - 1) * 0.1 / 2.2));
    const int inner = count - 1 - 2 * margin;
    if (inner < 1) {
      out.push_back({smin, smax, count});
      continue;
    }
    const double du = (smax - smin) / inner;
    out.push_back({smin - margin * du, smax + margin * du, count});
  }
  return out;
}

std::vector<GridAxis> default_sampling_axes(int dim) {
  const int count = dim == 1 ? 1025 : (dim == 2 ? 129 : 33);
  return std::vector<GridAxis>(static_cast<std::size_t>(dim), GridAxis{-10.0, 10.0, count});
}

GridFn sample_to_grid(const ConvexFn& f, const std::vector<GridAxis>& axes) {
  if (static_cast<int>(axes.size()) != f.dim())
    throw DimensionMismatch("sample_to_grid", f.dim(), static_cast<long>(axes.size()));
  std::size_t total = 1;
  for (const auto& ax : axes) total *= static_cast<std::size_t>(ax.count);
  // Borrow GridFn's index arithmetic through a throwaway instance.
  std::vector<double> zeros(total, 0.0);
  const GridFn shape(axes, zeros);
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) values[i] = eval(f, shape.node(i)).raw();
  return GridFn(axes, std::move(values));
}

ConjugateResult conjugate(const ConvexFn& f, ConjPreference pref,
                          const std::optional<std::vector<GridAxis>>& dual_axes) {
  if (const auto* ind = f.indicator()) return conj_indicator(*ind);

  if (const auto* poly = f.polyhedral()) {
    const bool want_grid = pref == ConjPreference::naive || pref == ConjPreference::llt;
    if (!want_grid) {
      if (auto h = detect_affine(*poly)) return conj_affine(*h);
      if (poly->dim() == 1) return conj_polyhedral_1d(*poly);
      if (pref == ConjPreference::exact)
        throw InvalidArgument("exact conjugation of polyhedral functions is 1-D only");
    }
    return conjugate(sample_to_grid(f, default_sampling_axes(f.dim())),
                     pref == ConjPreference::naive ? ConjPreference::naive : ConjPreference::llt,
                     dual_axes);
  }

  const GridFn& g = *f.grid();
  if (pref == ConjPreference::exact) throw InvalidArgument("grid functions have no exact conjugate");
  const auto axes = dual_axes ? *dual_axes : default_dual_axes(g);
  if (g.dim() == 1)
    return pref == ConjPreference::naive ? conj_grid_naive(g, axes) : conj_grid_llt(g, axes);
  return conj_grid_nd(g, axes,
                      pref == ConjPreference::naive ? ConjPreference::naive : ConjPreference::llt);
}

ConvexFn biconjugate(const ConvexFn& f) {
  if (const auto* ind = f.indicator()) return conj_affine(AffineFn(ind->anchor(), -ind->level())).fn;
  if (const auto* poly = f.polyhedral()) {
    if (auto h = detect_affine(*poly)) return as_polyhedral(*h);
    if (poly->dim() == 1)
      return exact::to_polyhedral(
          exact::conjugate(exact::conjugate(exact::from_polyhedral(*poly))));
    const GridFn g = sample_to_grid(f, default_sampling_axes(f.dim()));
    return biconjugate(g);
  }
  const GridFn& g = *f.grid();
  const auto star = conjugate(g);
  if (const auto* star_poly = star.fn.polyhedral()) {
    // single finite node: the conjugate is affine and f** is the node's indicator
    // restricted to the grid
    return sample_to_grid(conj_affine(*detect_affine(*star_poly)).fn, g.axes());
  }
  return conjugate(star.fn, ConjPreference::llt, g.axes()).fn;
}

ExtReal biconj_via_minorants(const PolyhedralFn& f, const Point& a) {
  return biconj_via_minorants(f, std::span<const Point>(&a, 1)).front();
}

std::vector<ExtReal> biconj_via_minorants(const PolyhedralFn& f, std::span<const Point> points) {
  if (f.dim() != 1) throw DimensionMismatch("biconj_via_minorants", 1, f.dim());
  for (const auto& a : points)
    if (a.size() != 1) throw DimensionMismatch("biconj_via_minorants point", 1, a.size());
  const auto star = exact::conjugate(exact::from_polyhedral(f));

  // Recession of f* bounds the effective domain of f**.
  std::optional<Halfspace> left, right;
  if (!star.lo) left.emplace(Vec::Constant(1, -1.0), -exact::to_double(star.lines.front().slope));
  if (!star.hi) right.emplace(Vec::Constant(1, 1.0), exact::to_double(star.lines.back().slope));

  auto verts = exact::vertices(star);
  if (verts.empty()) verts.push_back({exact::Rational(0), star.value(exact::Rational(0))});
  // tight minorants of f with slope u = v.x: h_{u, -f*(u)}
  std::vector<AffineFn> minorants;
  minorants.reserve(verts.size());
  for (const auto& v : verts)
    minorants.emplace_back(Vec::Constant(1, exact::to_double(v.x)), exact::to_double(-v.value));

  std::vector<ExtReal> out;
  out.reserve(points.size());
  for (const auto& a : points) {
    if ((left && !left->contains(a)) || (right && !right->contains(a))) {
      out.push_back(ExtReal::infinity());
      continue;
    }
    double best = -kInf;
    for (const auto& h : minorants) best = std::max(best, h.slope.dot(a) + h.offset);
    out.push_back(ExtReal(best));
  }
  return out;
}

ExtReal conjugate_value(const ConvexFn& f, const DualVec& u) {
  if (u.size() != f.dim()) throw DimensionMismatch("conjugate_value", f.dim(), u.size());
  if (const auto* ind = f.indicator()) return ExtReal(u.dot(ind->anchor()) - ind->level());

  if (const auto* poly = f.polyhedral()) {
    const int n = poly->dim();
    if (n == 1) {
      const auto star = exact::conjugate(exact::from_polyhedral(*poly));
      const exact::Rational ur = exact::to_rational(u[0]);
      if ((star.lo && ur < *star.lo) || (star.hi && ur > *star.hi)) return ExtReal::infinity();
      return ExtReal(exact::to_double(star.value(ur)));
    }
    // sup <u,x> - t  s.t.  <s_i,x> - t <= -alpha_i,  <a_j,x> <= b_j
    std::vector<lp::Constraint> cs;
    for (const auto& p : poly->pieces()) {
      Vec a(n + 1);
      a.head(n) = p.slope;
      a[n] = -1.0;
      cs.push_back({a, -p.offset});
    }
    for (const auto& h : poly->domain()) {
      Vec a = Vec::Zero(n + 1);
      a.head(n) = h.normal;
      cs.push_back({a, h.bound});
    }
    Vec obj(n + 1);
    obj.head(n) = u;
    obj[n] = -1.0;
    auto best = lp::maximize(obj, cs, n + 1);
    if (!best) throw ImproperFunction("conjugate_value: empty domain");
    return *best;
  }

  const GridFn& g = *f.grid();
  double best = -kInf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = g.raw_values()[i];
    if (!std::isfinite(v)) continue;
    best = std::max(best, u.dot(g.node(i)) - v);
  }
  return ExtReal(best);
}

double tight_minorant_offset(const ConvexFn& f, const DualVec& u) {
  const ExtReal star = conjugate_value(f, u);
  if (star.is_infinite()) throw NoMinorant("no affine minorant with the requested slope");
  return -star.raw();
}

PolyhedralFn canonical_1d(const PolyhedralFn& f) {
  return exact::to_polyhedral(exact::from_polyhedral(f));
}

}  // namespace conjcalc
