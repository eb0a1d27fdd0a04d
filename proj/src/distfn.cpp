#include "minid/distfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "minid/errors.hpp"

namespace minid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DistFn DistFn::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential rate must be > 0");
  return {Family::exponential, rate};
}

DistFn DistFn::frechet_unit() { return {Family::frechet_unit, 0.0}; }

DistFn DistFn::unit_exponential() { return {Family::unit_exponential, 0.0}; }

DistFn DistFn::point_mass(double at) {
  if (std::isnan(at) || at == -kInf) throw DomainError("point mass location must lie in (-inf, inf]");
  return {Family::point_mass, at};
}

DistFn DistFn::scaled(const DistFn& base, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be finite and > 0");
  DistFn g(Family::scaled, scale);
  g.base_ = std::make_shared<const DistFn>(base);
  return g;
}

DistFn DistFn::empirical(std::vector<std::pair<double, double>> steps) {
  if (steps.empty()) throw DomainError("empirical distribution needs at least one step");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto [t, p] = steps[i];
    if (!std::isfinite(t)) throw DomainError("empirical step locations must be finite");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("empirical cumulative values must lie in [0, 1]");
    if (i > 0 && !(t > steps[i - 1].first)) throw DomainError("empirical step locations must be strictly increasing");
    if (i > 0 && p < steps[i - 1].second) throw DomainError("empirical cumulative values must be non-decreasing");
  }
  DistFn g(Family::empirical, 0.0);
  g.steps_ = std::move(steps);
  return g;
}

DistFn DistFn::path_transform(DriftFn h, double infinite_from) {
  if (std::isnan(infinite_from)) throw DomainError("infinite_from must not be NaN");
  DistFn g(Family::path_transform, infinite_from);
  g.path_ = std::make_shared<const DriftFn>(std::move(h));
  return g;
}

DistFn DistFn::with_defect(double d) const {
  if (!(d >= 0.0 && d <= 1.0)) throw DomainError("defect must lie in [0, 1]");
  DistFn g = *this;
  g.defect_ = 1.0 - (1.0 - defect_) * (1.0 - d);
  return g;
}

double DistFn::raw(double t) const {
  switch (family_) {
    case Family::exponential: return t > 0.0 ? -std::expm1(-a_ * t) : 0.0;
    case Family::frechet_unit: return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
    case Family::unit_exponential: return t > 0.0 ? -std::expm1(-t) : 0.0;
    case Family::point_mass: return t >= a_ ? 1.0 : 0.0;
    case Family::scaled: return (*base_)(t / a_);
    case Family::empirical: {
      const auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                                       [](double x, const auto& s) { return x < s.first; });
      return it == steps_.begin() ? 0.0 : std::prev(it)->second;
    }
    case Family::path_transform:
      if (t >= a_) return 1.0;
      return -std::expm1(-(*path_)(t));
  }
  return 0.0;
}

double DistFn::raw_limit() const {
  switch (family_) {
    case Family::point_mass: return std::isinf(a_) ? 0.0 : 1.0;
    case Family::scaled: return 1.0 - base_->defect();
    case Family::empirical: return steps_.back().second;
    case Family::path_transform: return std::isinf(a_) ? -std::expm1(-path_->limit()) : 1.0;
    default: return 1.0;
  }
}

double DistFn::raw_quantile(double q) const {
  switch (family_) {
    case Family::exponential: return q >= 1.0 ? kInf : -std::log1p(-q) / a_;
    case Family::frechet_unit: return q >= 1.0 ? kInf : -1.0 / std::log(q);
    case Family::unit_exponential: return q >= 1.0 ? kInf : -std::log1p(-q);
    case Family::point_mass: return a_;
    case Family::scaled: return a_ * base_->quantile(q);
    case Family::empirical: {
      const auto it = std::lower_bound(steps_.begin(), steps_.end(), q,
                                       [](const auto& s, double x) { return s.second < x; });
      return it == steps_.end() ? kInf : it->first;
    }
    case Family::path_transform: return std::min(path_->inverse(-std::log1p(-q)), a_);
  }
  return kInf;
}

double DistFn::operator()(double t) const {
  if (t == kInf) return 1.0;
  if (t == -kInf) return 0.0;
  return (1.0 - defect_) * raw(t);
}

double DistFn::left_limit(double t) const {
  if (t == -kInf) return 0.0;
  if (t == kInf) return 1.0 - defect();
  return (*this)(std::nextafter(t, -kInf));
}

double DistFn::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  if (p <= 0.0) return -kInf;
  if (p > 1.0 - defect()) return kInf;
  const double q = std::min(1.0, p / (1.0 - defect_));
  double x = raw_quantile(q);
  // snap to the floating-point generalized inverse of the computed G
  if (!std::isfinite(x)) return x;
  for (int i = 0; i < 16 && (*this)(x) < p; ++i) x = std::nextafter(x, kInf);
  for (int i = 0; i < 16; ++i) {
    const double below = std::nextafter(x, -kInf);
    if ((*this)(below) < p) break;
    x = below;
  }
  return x;
}

double DistFn::defect() const { return 1.0 - (1.0 - defect_) * raw_limit(); }

bool DistFn::is_zero() const { return defect() >= 1.0; }

std::string DistFn::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case Family::exponential: os << "exponential(rate=" << a_ << ")"; break;
    case Family::frechet_unit: os << "frechet_unit"; break;
    case Family::unit_exponential: os << "unit_exponential"; break;
    case Family::point_mass: os << "point_mass(" << a_ << ")"; break;
    case Family::scaled: os << "scaled(" << base_->describe() << ", scale=" << a_ << ")"; break;
    case Family::empirical: os << "empirical(" << steps_.size() << " steps)"; break;
    case Family::path_transform: os << "path_transform(infinite_from=" << a_ << ")"; break;
  }
  if (defect_ > 0.0) os << " with defect " << defect_;
  return os.str();
}

}  // namespace minid
