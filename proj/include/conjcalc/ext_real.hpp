#pragma once

#include <compare>
#include <iosfwd>
#include <limits>

namespace conjcalc {

/// A real number or +inf. NaN and -inf are rejected at construction, so every
/// value is meaningful for a proper convex function.
class ExtReal {
 public:
  constexpr ExtReal() noexcept = default;
  ExtReal(double v);  // NOLINT(google-explicit-constructor)

  static constexpr ExtReal infinity() noexcept {
    ExtReal r;
    r.v_ = std::numeric_limits<double>::infinity();
    return r;
  }

  constexpr bool is_finite() const noexcept {
    return v_ != std::numeric_limits<double>::infinity();
  }
  constexpr bool is_infinite() const noexcept { return !is_finite(); }

  /// Finite value; throws InvalidArgument when +inf.
  double value() const;
  /// Underlying double, +inf included.
  constexpr double raw() const noexcept { return v_; }

  /// tau * (*this) for tau > 0, keeping +inf.
  ExtReal scaled(double tau) const;

  friend ExtReal operator+(ExtReal a, ExtReal b) noexcept {
    ExtReal r;
    r.v_ = a.v_ + b.v_;
    return r;
  }
  ExtReal& operator+=(ExtReal other) noexcept { return *this = *this + other; }

  friend constexpr bool operator==(ExtReal a, ExtReal b) noexcept { return a.v_ == b.v_; }
  friend constexpr std::partial_ordering operator<=>(ExtReal a, ExtReal b) noexcept {
    return a.v_ <=> b.v_;
  }

 private:
  double v_ = 0.0;
};

std::ostream& operator<<(std::ostream& os, ExtReal x);

inline ExtReal max(ExtReal a, ExtReal b) noexcept { return a < b ? b : a; }

}  // namespace conjcalc
