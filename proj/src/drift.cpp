#include "minid/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minid/errors.hpp"

namespace minid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_knots(const std::vector<double>& knots, const std::vector<double>& values) {
  if (knots.empty() || knots.size() != values.size())
    throw DomainError("table needs equally many knots and values (at least one)");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i])) throw DomainError("table entries must be finite");
    if (i > 0 && !(knots[i] > knots[i - 1])) throw DomainError("table knots must be strictly increasing");
  }
}
}  // namespace

DriftFn DriftFn::zero() { return {}; }

DriftFn DriftFn::linear(double rate) {
  if (!std::isfinite(rate) || rate < 0.0) throw DomainError("drift rate must be finite and >= 0");
  DriftFn b;
  if (rate == 0.0) return b;
  b.kind_ = Kind::linear;
  b.rate_ = rate;
  return b;
}

DriftFn DriftFn::table(std::vector<double> knots, std::vector<double> values, bool step) {
  check_knots(knots, values);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) throw DomainError("drift values must be >= 0");
    if (i > 0 && values[i] < values[i - 1]) throw DomainError("drift values must be non-decreasing");
  }
  DriftFn b;
  b.kind_ = Kind::table;
  b.knots_ = std::move(knots);
  b.values_ = std::move(values);
  b.step_ = step;
  return b;
}

double DriftFn::operator()(double t) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::linear: return t > 0.0 ? rate_ * t : 0.0;
    case Kind::table: {
      if (t < knots_.front()) return 0.0;
      if (t >= knots_.back()) return values_.back();
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
      const auto k = static_cast<std::size_t>(it - knots_.begin()) - 1;
      if (step_) return values_[k];
      const double w = (t - knots_[k]) / (knots_[k + 1] - knots_[k]);
      return values_[k] + w * (values_[k + 1] - values_[k]);
    }
  }
  return 0.0;
}

double DriftFn::inverse(double level) const {
  if (level <= 0.0) return -kInf;
  switch (kind_) {
    case Kind::zero: return kInf;
    case Kind::linear: return level / rate_;
    case Kind::table: {
      const auto it = std::lower_bound(values_.begin(), values_.end(), level);
      if (it == values_.end()) return kInf;
      const auto k = static_cast<std::size_t>(it - values_.begin());
      if (step_ || k == 0) return knots_[k];
      const double w = (level - values_[k - 1]) / (values_[k] - values_[k - 1]);
      return knots_[k - 1] + w * (knots_[k] - knots_[k - 1]);
    }
  }
  return kInf;
}

DriftFn DriftFn::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) throw DomainError("drift scaling factor must be finite and >= 0");
  DriftFn b = *this;
  b.rate_ *= factor;
  for (auto& v : b.values_) v *= factor;
  if (factor == 0.0) return zero();
  return b;
}

bool DriftFn::is_zero() const noexcept {
  return kind_ == Kind::zero || (kind_ == Kind::table && values_.back() == 0.0);
}

double DriftFn::limit() const noexcept {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::linear: return kInf;
    case Kind::table: return values_.back();
  }
  return 0.0;
}

bool DriftFn::constant_after(double t) const noexcept {
  switch (kind_) {
    case Kind::zero: return true;
    case Kind::linear: return false;
    case Kind::table:
      if (step_) return true;  // remaining growth is a finite list of jumps
      return t >= knots_.back();
  }
  return false;
}

MonotoneMap MonotoneMap::affine(double scale, double shift) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(shift))
    throw DomainError("affine map needs finite scale > 0 and finite shift");
  MonotoneMap f;
  f.scale_ = scale;
  f.shift_ = shift;
  return f;
}

MonotoneMap MonotoneMap::ceiling() {
  MonotoneMap f;
  f.kind_ = Kind::ceiling;
  return f;
}

MonotoneMap MonotoneMap::floor() {
  MonotoneMap f;
  f.kind_ = Kind::floor;
  return f;
}

MonotoneMap MonotoneMap::table(std::vector<double> knots, std::vector<double> values) {
  check_knots(knots, values);
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[i - 1]) throw DomainError("non-monotone transform table");
  MonotoneMap f;
  f.kind_ = Kind::table;
  f.knots_ = std::move(knots);
  f.values_ = std::move(values);
  return f;
}

double MonotoneMap::operator()(double x) const {
  if (std::isinf(x)) return x;
  switch (kind_) {
    case Kind::affine: return scale_ * x + shift_;
    case Kind::ceiling: return std::ceil(x);
    case Kind::floor: return std::floor(x);
    case Kind::table: {
      if (x <= knots_.front()) return values_.front();
      if (x >= knots_.back()) return values_.back();
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
      const auto k = static_cast<std::size_t>(it - knots_.begin()) - 1;
      const double w = (x - knots_[k]) / (knots_[k + 1] - knots_[k]);
      return values_[k] + w * (values_[k + 1] - values_[k]);
    }
  }
  return x;
}

MonotoneMap MonotoneMap::left_inverse() const {
  switch (kind_) {
    case Kind::affine: return affine(1.0 / scale_, -shift_ / scale_);
    case Kind::ceiling: return floor();
    case Kind::floor:
      throw UnsupportedError("floor has no left-continuous inverse of the supported kinds");
    case Kind::table:
      for (std::size_t i = 1; i < values_.size(); ++i)
        if (!(values_[i] > values_[i - 1]))
          throw UnsupportedError("table inverse needs strictly increasing values");
      return table(values_, knots_);
  }
  return *this;
}

}  // namespace minid
