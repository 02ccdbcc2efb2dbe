#include "conjcalc/exact_pwl.hpp"

#include <algorithm>

#include "conjcalc/errors.hpp"

namespace conjcalc::exact {
namespace {

// x where a and b cross; slopes must differ.
Rational crossing(const Line& a, const Line& b) {
  return (a.offset - b.offset) / (b.slope - a.slope);
}

// Upper envelope over the whole line: slopes strictly increasing, each line
// strictly on top somewhere.
std::vector<Line> upper_envelope(std::vector<Line> lines) {
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    return a.offset > b.offset;
  });
  std::vector<Line> hull;
  for (auto& l : lines) {
    if (!hull.empty() && hull.back().slope == l.slope) continue;  // dominated: smaller offset
    while (hull.size() >= 2) {
      const Line& a = hull[hull.size() - 2];
      const Line& b = hull.back();
      if (crossing(a, l) <= crossing(a, b))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(std::move(l));
  }
  return hull;
}

Rational max_at(const std::vector<Line>& lines, const Rational& x) {
  Rational best = lines.front()(x);
  for (const auto& l : lines) best = std::max(best, l(x));
  return best;
}

}  // namespace

Rational Pwl1::value(const Rational& x) const { return max_at(lines, x); }

Pwl1 canonicalize(std::vector<Line> lines, std::optional<Rational> lo,
                  std::optional<Rational> hi) {
  if (lines.empty()) throw InvalidArgument("canonicalize: no lines");
  if (lo && hi && *lo > *hi) throw ImproperFunction("canonicalize: empty interval");
  Pwl1 out;
  out.lo = lo;
  out.hi = hi;
  if (lo && hi && *lo == *hi) {
    out.lines.push_back(Line{Rational(0), max_at(lines, *lo)});
    return out;
  }
  auto hull = upper_envelope(std::move(lines));
  for (std::size_t j = 0; j < hull.size(); ++j) {
    // Line j is on top over [left, right].
    std::optional<Rational> left, right;
    if (j > 0) left = crossing(hull[j - 1], hull[j]);
    if (j + 1 < hull.size()) right = crossing(hull[j], hull[j + 1]);
    if (lo && (!left || *left < *lo)) left = lo;
    if (hi && (!right || *right > *hi)) right = hi;
    if (left && right && !(*left < *right)) continue;
    out.lines.push_back(hull[j]);
  }
  return out;
}

Pwl1 from_polyhedral(const PolyhedralFn& f) {
  if (f.dim() != 1) throw DimensionMismatch("exact 1-D path", 1, f.dim());
  std::vector<Line> lines;
  lines.reserve(f.pieces().size());
  for (const auto& p : f.pieces()) lines.push_back({to_rational(p.slope[0]), to_rational(p.offset)});
  std::optional<Rational> lo, hi;
  for (const auto& h : f.domain()) {
    const Rational a = to_rational(h.normal[0]);
    const Rational bound = to_rational(h.bound) / a;
    if (a > 0) {
      if (!hi || bound < *hi) hi = bound;
    } else {
      if (!lo || bound > *lo) lo = bound;
    }
  }
  // The properness check admits intervals that are empty by rounding noise only.
  if (lo && hi && *lo > *hi) {
    const Rational mid = (*lo + *hi) / 2;
    lo = mid;
    hi = mid;
  }
  return canonicalize(std::move(lines), std::move(lo), std::move(hi));
}

PolyhedralFn to_polyhedral(const Pwl1& f) {
  std::vector<AffineFn> pieces;
  pieces.reserve(f.lines.size());
  for (const auto& l : f.lines)
    pieces.emplace_back(Vec::Constant(1, to_double(l.slope)), to_double(l.offset));
  std::vector<Halfspace> domain;
  if (f.lo) domain.emplace_back(Vec::Constant(1, -1.0), -to_double(*f.lo));
  if (f.hi) domain.emplace_back(Vec::Constant(1, 1.0), to_double(*f.hi));
  return PolyhedralFn(std::move(pieces), std::move(domain));
}

std::vector<Vertex> vertices(const Pwl1& f) {
  std::vector<Vertex> out;
  if (f.singleton()) {
    out.push_back({*f.lo, f.lines.front().offset});
    return out;
  }
  if (f.lo) out.push_back({*f.lo, f.value(*f.lo)});
  for (std::size_t j = 0; j + 1 < f.lines.size(); ++j) {
    const Rational x = crossing(f.lines[j], f.lines[j + 1]);
    out.push_back({x, f.lines[j](x)});
  }
  if (f.hi) out.push_back({*f.hi, f.value(*f.hi)});
  return out;
}

Pwl1 conjugate(const Pwl1& f) {
  if (f.singleton()) {
    // sup over the single point lo: u lo - f(lo)
    return canonicalize({Line{*f.lo, -f.lines.front().offset}}, std::nullopt, std::nullopt);
  }
  const auto verts = vertices(f);
  if (verts.empty()) {
    // affine on the whole line: f* is the indicator of its slope
    const Line& l = f.lines.front();
    return canonicalize({Line{Rational(0), -l.offset}}, l.slope, l.slope);
  }
  std::vector<Line> lines;
  lines.reserve(verts.size());
  for (const auto& v : verts) lines.push_back(Line{v.x, -v.value});
  std::optional<Rational> lo, hi;
  if (!f.lo) lo = f.lines.front().slope;
  if (!f.hi) hi = f.lines.back().slope;
  return canonicalize(std::move(lines), std::move(lo), std::move(hi));
}

}  // namespace conjcalc::exact
