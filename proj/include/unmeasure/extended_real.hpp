#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

#include "unmeasure/error.hpp"

namespace unmeasure {

/// A value in (-inf, +inf]: either a finite double or +infinity.
///
/// Divergences take values in [0, +inf]; keeping infinity as an explicit state
/// stops NaN or overflowed doubles from leaking across module boundaries.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double finite) : value_(finite) {}  // NOLINT: implicit by intent

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  /// Converts a raw double; +inf maps to infinity(), NaN and -inf are rejected.
  static ExtendedReal from_double(double x) {
    if (std::isnan(x) || x == -std::numeric_limits<double>::infinity()) {
      throw DomainError("ExtendedReal: NaN or -inf is not representable");
    }
    if (std::isinf(x)) return infinity();
    return ExtendedReal(x);
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) throw DomainError("ExtendedReal: value() on +inf");
    return value_;
  }

  /// +inf is rendered as std::numeric_limits<double>::infinity().
  constexpr double to_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtendedReal(a.value_ + b.value_);
  }
  ExtendedReal& operator+=(ExtendedReal other) { return *this = *this + other; }

  /// Multiplication by a non-negative scalar; 0 * inf is 0 (measure convention).
  friend ExtendedReal operator*(double c, ExtendedReal a) {
    if (c < 0.0) throw DomainError("ExtendedReal: negative scale");
    if (a.infinite_) return c == 0.0 ? ExtendedReal(0.0) : infinity();
    return ExtendedReal(c * a.value_);
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend constexpr std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, ExtendedReal x) {
    if (x.infinite_) return os << "inf";
    return os << x.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace unmeasure
