#include "minid/radon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minid/errors.hpp"

namespace minid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
double bisect_increasing(F f, double target, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= target) hi = mid; else lo = mid;
  }
  return hi;
}
}  // namespace

RadonMeasure::RadonMeasure(double coef, double power, std::vector<Atom> atoms)
    : coef_(coef), power_(power), atoms_(std::move(atoms)) {
  if (!(coef >= 0.0) || !std::isfinite(coef)) throw DomainError("density coefficient must be finite and >= 0");
  if (coef > 0.0 && (!(power > 0.0) || !std::isfinite(power))) throw DomainError("density power must be > 0");
  for (const auto& a : atoms_) {
    if (!(a.at >= 0.0) || !std::isfinite(a.at)) throw DomainError("atom location must be finite and >= 0");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw DomainError("atom weight must be finite and > 0");
  }
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& x, const Atom& y) { return x.at < y.at; });
}

RadonMeasure RadonMeasure::galambos(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("Galambos parameter must be > 0");
  return {1.0 / (theta * std::tgamma(1.0 + 1.0 / theta)), 1.0 / theta};
}

double RadonMeasure::total_mass() const noexcept {
  if (has_density()) return kInf;
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight;
  return m;
}

double RadonMeasure::cumulative(double t) const {
  if (t < 0.0) return 0.0;
  if (t == kInf) return total_mass();
  double m = has_density() ? coef_ * std::pow(t, power_) / power_ : 0.0;
  for (const auto& a : atoms_)
    if (a.at <= t) m += a.weight;
  return m;
}

double RadonMeasure::cumulative_left(double t) const {
  if (t <= 0.0) return 0.0;
  if (t == kInf) return total_mass();
  double m = has_density() ? coef_ * std::pow(t, power_) / power_ : 0.0;
  for (const auto& a : atoms_)
    if (a.at < t) m += a.weight;
  return m;
}

double RadonMeasure::cumulative_inverse(double x) const {
  if (x <= 0.0) return 0.0;
  if (atoms_.empty()) {
    if (!has_density()) return kInf;
    return std::pow(power_ * x / coef_, 1.0 / power_);
  }
  if (x > total_mass()) return kInf;
  // a candidate atom may be hit exactly
  double before = 0.0;
  for (const auto& a : atoms_) {
    const double dens_at = has_density() ? coef_ * std::pow(a.at, power_) / power_ : 0.0;
    const double left = dens_at + before;
    if (left < x && left + a.weight >= x) return a.at;
    before += a.weight;
  }
  double hi = 1.0;
  while (cumulative(hi) < x) hi *= 2.0;
  return bisect_increasing([this](double t) { return cumulative(t); }, x, 0.0, hi);
}

double RadonMeasure::laplace(double t) const {
  if (t < 0.0) throw DomainError("Laplace transform argument must be >= 0");
  double v = 0.0;
  if (has_density()) v += t == 0.0 ? kInf : coef_ * std::tgamma(power_) * std::pow(t, -power_);
  for (const auto& a : atoms_) v += a.weight * std::exp(-t * a.at);
  return v;
}

double RadonMeasure::laplace_inverse(double y) const {
  if (y <= 0.0) return kInf;
  if (atoms_.empty()) {
    if (!has_density()) throw UnsupportedError("Laplace transform of the zero measure is not invertible");
    return std::pow(coef_ * std::tgamma(power_) / y, 1.0 / power_);
  }
  if (y >= laplace(0.0)) return 0.0;
  double hi = 1.0;
  while (laplace(hi) > y) hi *= 2.0;
  // laplace is decreasing; bisect on its negation
  return bisect_increasing([this](double t) { return -laplace(t); }, -y, 0.0, hi);
}

QuadratureResult RadonMeasure::integrate(const ScalarFn& h, QuadratureOptions opt) const {
  QuadratureResult r;
  if (has_density()) {
    const double p = power_;
    const double c = coef_ / p;
    const auto g = [&](double u) {
      const double v = h(std::pow(u, 1.0 / p));
      return v == 0.0 ? 0.0 : c * v;
    };
    r = integrate_half_line(g, opt);
  }
  for (const auto& a : atoms_) r.value += a.weight * h(a.at);
  return r;
}

RadonMeasure RadonMeasure::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("measure scaling factor must be > 0");
  std::vector<Atom> atoms = atoms_;
  for (auto& a : atoms) a.weight *= factor;
  return {coef_ * factor, power_, std::move(atoms)};
}

}  // namespace minid
