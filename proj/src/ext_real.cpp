#include "conjcalc/ext_real.hpp"

#include <cmath>
#include <ostream>

#include "conjcalc/errors.hpp"

namespace conjcalc {

ExtReal::ExtReal(double v) : v_(v) {
  if (std::isnan(v)) throw InvalidArgument("ExtReal: NaN is not an extended real");
  if (v == -std::numeric_limits<double>::infinity())
    throw InvalidArgument("ExtReal: -inf does not occur for proper functions");
}

double ExtReal::value() const {
  if (!is_finite()) throw InvalidArgument("ExtReal::value on +inf");
  return v_;
}

ExtReal ExtReal::scaled(double tau) const {
  if (!(tau > 0.0)) throw InvalidArgument("ExtReal::scaled requires tau > 0");
  ExtReal r;
  r.v_ = is_finite() ? tau * v_ : v_;
  return r;
}

std::ostream& operator<<(std::ostream& os, ExtReal x) {
  if (x.is_infinite()) return os << "+inf";
  return os << x.raw();
}

}  // namespace conjcalc
