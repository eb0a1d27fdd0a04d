#pragma once

#include <vector>

namespace minid {

// Non-negative, non-decreasing, right-continuous function b with b = 0 on
// (-inf, first knot) (or on (-inf, 0] for the linear kind).
class DriftFn {
 public:
  enum class Kind { zero, linear, table };

  static DriftFn zero();
  static DriftFn linear(double rate);  // rate * max(t, 0)
  // Knots strictly increasing; values >= 0 and non-decreasing. Between knots
  // the value is held (step) or linearly interpolated; after the last knot
  // it stays constant.
  static DriftFn table(std::vector<double> knots, std::vector<double> values, bool step);

  double operator()(double t) const;
  // inf{t : b(t) >= level}; -inf for level <= 0, +inf when never reached.
  double inverse(double level) const;
  DriftFn scaled(double factor) const;

  Kind kind() const noexcept { return kind_; }
  double rate() const noexcept { return rate_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }
  bool is_step() const noexcept { return step_; }

  bool is_zero() const noexcept;
  // b(+inf)
  double limit() const noexcept;
  // No growth on (t, inf).
  bool constant_after(double t) const noexcept;
  // Piecewise linear between consecutive points of any grid containing the
  // returned breakpoints, apart from jumps (step tables, first knot).
  bool piecewise_linear() const noexcept { return kind_ != Kind::table || step_; }

 private:
  Kind kind_ = Kind::zero;
  double rate_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> values_;
  bool step_ = false;
};

// Non-decreasing map of the extended real line used for margin transforms
// and for the left-continuous inverse in time changes. +inf and -inf are
// fixed points.
class MonotoneMap {
 public:
  enum class Kind { affine, ceiling, floor, table };

  static MonotoneMap identity() { return affine(1.0, 0.0); }
  static MonotoneMap affine(double scale, double shift);  // scale > 0
  static MonotoneMap ceiling();
  static MonotoneMap floor();
  // Linear interpolation between knots, constant outside.
  static MonotoneMap table(std::vector<double> knots, std::vector<double> values);

  double operator()(double x) const;
  // g(y) = sup{x : f(x) <= y}, so that f(X) > y  <=>  X > g(y).
  MonotoneMap left_inverse() const;

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  double shift() const noexcept { return shift_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }
  bool is_identity() const noexcept { return kind_ == Kind::affine && scale_ == 1.0 && shift_ == 0.0; }

 private:
  Kind kind_ = Kind::affine;
  double scale_ = 1.0;
  double shift_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace minid
