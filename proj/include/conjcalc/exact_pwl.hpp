#pragma once

#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "conjcalc/convex_fn.hpp"

// Exact rational arithmetic for one-dimensional polyhedral functions. Every
// double is a rational, so converting inputs is lossless; results are rounded
// once when converted back.
namespace conjcalc::exact {

using Rational = boost::multiprecision::cpp_rational;

struct Line {
  Rational slope;
  Rational offset;

  Rational operator()(const Rational& x) const { return slope * x + offset; }
  friend bool operator==(const Line&, const Line&) = default;
};

/// Canonical 1-D polyhedral function: domain [lo, hi] (nullopt = unbounded)
/// and the pieces that are active on a subinterval of positive length, sorted
/// by slope. A singleton domain {lo} carries the single line (0, f(lo)).
struct Pwl1 {
  std::optional<Rational> lo;
  std::optional<Rational> hi;
  std::vector<Line> lines;

  bool singleton() const { return lo && hi && *lo == *hi; }
  /// Value at a point of the domain.
  Rational value(const Rational& x) const;
  friend bool operator==(const Pwl1&, const Pwl1&) = default;
};

struct Vertex {
  Rational x;
  Rational value;
};

/// Reduces arbitrary lines on [lo, hi] to canonical form. Requires lo <= hi.
Pwl1 canonicalize(std::vector<Line> lines, std::optional<Rational> lo,
                  std::optional<Rational> hi);

Pwl1 from_polyhedral(const PolyhedralFn& f);
PolyhedralFn to_polyhedral(const Pwl1& f);

/// Finite endpoints and interior breakpoints, ascending.
std::vector<Vertex> vertices(const Pwl1& f);

/// f*(u) = sup_x { u x - f(x) }, exact.
Pwl1 conjugate(const Pwl1& f);

inline Rational to_rational(double x) { return Rational(x); }
inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace conjcalc::exact
