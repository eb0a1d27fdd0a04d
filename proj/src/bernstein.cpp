#include "minid/bernstein.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "minid/errors.hpp"

namespace minid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
  if (!ok) throw DomainError(msg);
}

}  // namespace

double exponential_integral_e1(double x) {
  if (!(x > 0.0)) throw DomainError("E1 needs x > 0");
  return -std::expint(-x);
}

BernsteinSpec BernsteinSpec::drift(double rate) {
  require(std::isfinite(rate) && rate >= 0.0, "drift rate must be finite and >= 0");
  return {Family::drift, rate, 0.0};
}

BernsteinSpec BernsteinSpec::gamma(double shape, double rate) {
  require(std::isfinite(shape) && shape > 0.0, "gamma shape must be > 0");
  require(std::isfinite(rate) && rate > 0.0, "gamma rate must be > 0");
  return {Family::gamma, shape, rate};
}

BernsteinSpec BernsteinSpec::stable(double alpha, double scale) {
  require(alpha > 0.0 && alpha <= 1.0, "stable index must lie in (0, 1]");
  require(std::isfinite(scale) && scale > 0.0, "stable scale must be > 0");
  return {Family::stable, alpha, scale};
}

BernsteinSpec BernsteinSpec::cp_exponential(double intensity, double jump_rate) {
  require(std::isfinite(intensity) && intensity > 0.0, "cp intensity must be > 0");
  require(std::isfinite(jump_rate) && jump_rate > 0.0, "cp jump rate must be > 0");
  return {Family::cp_exponential, intensity, jump_rate};
}

BernsteinSpec BernsteinSpec::sum(std::vector<BernsteinSpec> terms) {
  require(!terms.empty(), "sum of Bernstein specs needs at least one term");
  BernsteinSpec s(Family::sum, 0.0, 0.0);
  s.terms_ = std::move(terms);
  return s;
}

BernsteinSpec BernsteinSpec::with_kill_rate(double c) const {
  require(std::isfinite(c) && c >= 0.0, "kill rate must be finite and >= 0");
  BernsteinSpec s = *this;
  s.kill_ = c;
  return s;
}

BernsteinSpec BernsteinSpec::scaled(double factor) const {
  require(std::isfinite(factor) && factor > 0.0, "scaling factor must be > 0");
  BernsteinSpec s = *this;
  s.kill_ = kill_ * factor;
  switch (family_) {
    case Family::drift: s.p1_ = p1_ * factor; break;
    case Family::gamma: s.p1_ = p1_ * factor; break;
    case Family::stable: s.p2_ = p2_ * factor; break;
    case Family::cp_exponential: s.p1_ = p1_ * factor; break;
    case Family::sum:
      for (auto& t : s.terms_) t = t.scaled(factor);
      break;
  }
  return s;
}

double BernsteinSpec::total_kill_rate() const noexcept {
  double c = kill_;
  for (const auto& t : terms_) c += t.total_kill_rate();
  return c;
}

double BernsteinSpec::drift_rate() const noexcept {
  switch (family_) {
    case Family::drift: return p1_;
    case Family::stable: return p1_ == 1.0 ? p2_ : 0.0;
    case Family::sum: {
      double b = 0.0;
      for (const auto& t : terms_) b += t.drift_rate();
      return b;
    }
    default: return 0.0;
  }
}

bool BernsteinSpec::is_drift_only() const noexcept {
  switch (family_) {
    case Family::drift: return true;
    case Family::stable: return p1_ == 1.0;
    case Family::sum:
      for (const auto& t : terms_)
        if (!t.is_drift_only()) return false;
      return true;
    default: return false;
  }
}

bool BernsteinSpec::has_infinite_activity() const noexcept {
  switch (family_) {
    case Family::gamma: return true;
    case Family::stable: return p1_ < 1.0;
    case Family::sum:
      for (const auto& t : terms_)
        if (t.has_infinite_activity()) return true;
      return false;
    default: return false;
  }
}

double BernsteinSpec::supremum() const noexcept {
  double s = kill_;
  switch (family_) {
    case Family::drift: s += p1_ > 0.0 ? kInf : 0.0; break;
    case Family::gamma:
    case Family::stable: s = kInf; break;
    case Family::cp_exponential: s += p1_; break;
    case Family::sum:
      for (const auto& t : terms_) s += t.supremum();
      break;
  }
  return s;
}

double BernsteinSpec::levy_tail_mass(double eps) const {
  require(eps >= 0.0, "jump threshold must be >= 0");
  switch (family_) {
    case Family::drift: return 0.0;
    case Family::gamma: return eps == 0.0 ? kInf : p1_ * exponential_integral_e1(p2_ * eps);
    case Family::stable:
      if (p1_ == 1.0) return 0.0;
      return eps == 0.0 ? kInf : p2_ * std::pow(eps, -p1_) / std::tgamma(1.0 - p1_);
    case Family::cp_exponential: return p1_ * std::exp(-p2_ * eps);
    case Family::sum: {
      double m = 0.0;
      for (const auto& t : terms_) m += t.levy_tail_mass(eps);
      return m;
    }
  }
  return 0.0;
}

double BernsteinSpec::sample_jump_above(double eps, RngStream& rng) const {
  switch (family_) {
    case Family::drift: throw UnsupportedError("drift has no jumps");
    case Family::gamma: {
      require(eps > 0.0, "gamma jumps need eps > 0");
      // proposal eps + Exp(rate), accepted with probability eps / y
      for (;;) {
        const double y = eps + rng.exponential() / p2_;
        if (rng.uniform() * y <= eps) return y;
      }
    }
    case Family::stable:
      if (p1_ == 1.0) throw UnsupportedError("stable index 1 has no jumps");
      require(eps > 0.0, "stable jumps need eps > 0");
      return eps * std::pow(rng.uniform(), -1.0 / p1_);
    case Family::cp_exponential: return eps + rng.exponential() / p2_;
    case Family::sum: {
      const double total = levy_tail_mass(eps);
      if (!(total > 0.0)) throw UnsupportedError("no jumps above threshold");
      double u = rng.uniform() * total;
      const BernsteinSpec* pick = nullptr;
      for (const auto& t : terms_) {
        const double m = t.levy_tail_mass(eps);
        if (m <= 0.0) continue;
        pick = &t;
        if (u < m) break;
        u -= m;
      }
      return pick->sample_jump_above(eps, rng);
    }
  }
  return 0.0;
}

double BernsteinSpec::sample_increment(double dt, RngStream& rng) const {
  require(dt >= 0.0, "increment span must be >= 0");
  if (dt == 0.0) return 0.0;
  if (std::isinf(dt)) return supremum() > kill_ ? kInf : 0.0;
  switch (family_) {
    case Family::drift: return p1_ * dt;
    case Family::gamma: return rng.gamma(p1_ * dt, p2_);
    case Family::stable:
      if (p1_ == 1.0) return p2_ * dt;
      return std::pow(p2_ * dt, 1.0 / p1_) * rng.positive_stable(p1_);
    case Family::cp_exponential: {
      const auto n = rng.poisson(p1_ * dt);
      return n == 0 ? 0.0 : rng.gamma(static_cast<double>(n), p2_);
    }
    case Family::sum: {
      double x = 0.0;
      for (const auto& t : terms_) x += t.sample_increment(dt, rng);
      return x;
    }
  }
  return 0.0;
}

std::string BernsteinSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case Family::drift: os << "drift(rate=" << p1_ << ")"; break;
    case Family::gamma: os << "gamma(shape=" << p1_ << ", rate=" << p2_ << ")"; break;
    case Family::stable: os << "stable(alpha=" << p1_ << ", scale=" << p2_ << ")"; break;
    case Family::cp_exponential: os << "cp_exponential(intensity=" << p1_ << ", jump_rate=" << p2_ << ")"; break;
    case Family::sum:
      os << "sum(";
      for (std::size_t i = 0; i < terms_.size(); ++i) os << (i ? ", " : "") << terms_[i].describe();
      os << ")";
      break;
  }
  if (kill_ > 0.0) os << " killed at rate " << kill_;
  return os.str();
}

double eval_bernstein(const BernsteinSpec& spec, double a) {
  if (!(a >= 0.0)) throw DomainError("Bernstein function argument must be >= 0");
  using F = BernsteinSpec::Family;
  double v = 0.0;
  switch (spec.family()) {
    case F::drift: v = spec.p1() == 0.0 ? 0.0 : spec.p1() * a; break;
    case F::gamma: v = spec.p1() * std::log1p(a / spec.p2()); break;
    case F::stable: v = a == 0.0 ? 0.0 : spec.p2() * std::pow(a, spec.p1()); break;
    case F::cp_exponential: v = std::isinf(a) ? spec.p1() : spec.p1() * a / (spec.p2() + a); break;
    case F::sum:
      for (const auto& t : spec.terms()) v += eval_bernstein(t, a);
      break;
  }
  if (a > 0.0) v += spec.kill_rate();
  return v;
}

double eval_bernstein_derivative(const BernsteinSpec& spec, double a) {
  if (!(a >= 0.0)) throw DomainError("Bernstein function argument must be >= 0");
  using F = BernsteinSpec::Family;
  switch (spec.family()) {
    case F::drift: return spec.p1();
    case F::gamma: return spec.p1() / (spec.p2() + a);
    case F::stable:
      if (spec.p1() == 1.0) return spec.p2();
      return a == 0.0 ? kInf : spec.p2() * spec.p1() * std::pow(a, spec.p1() - 1.0);
    case F::cp_exponential: {
      const double q = spec.p2() + a;
      return spec.p1() * spec.p2() / (q * q);
    }
    case F::sum: {
      double d = 0.0;
      for (const auto& t : spec.terms()) d += eval_bernstein_derivative(t, a);
      return d;
    }
  }
  return 0.0;
}

double invert_bernstein(const BernsteinSpec& spec, double y) {
  if (!(y >= 0.0)) throw DomainError("Bernstein inverse argument must be >= 0");
  if (spec.total_kill_rate() > 0.0) throw UnsupportedError("killed Bernstein function is not invertible at 0");
  const double sup = spec.supremum();
  if (sup == 0.0) throw UnsupportedError("degenerate Bernstein function (identically zero)");
  if (y == 0.0) return 0.0;
  if (y >= sup) throw RangeError("value outside the range of the Bernstein function");

  using F = BernsteinSpec::Family;
  if (spec.family() == F::drift) return y / spec.p1();
  if (spec.family() == F::stable) return std::pow(y / spec.p2(), 1.0 / spec.p1());

  double lo = 0.0;
  double hi = 1.0;
  while (eval_bernstein(spec, hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw RangeError("Bernstein inverse bracket overflow");
  }
  double a = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double f = eval_bernstein(spec, a) - y;
    if (f == 0.0) return a;
    if (f < 0.0) lo = a; else hi = a;
    const double slope = eval_bernstein_derivative(spec, a);
    double next = slope > 0.0 && std::isfinite(slope) ? a - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - a) <= 1e-16 * std::abs(a) || hi - lo <= 1e-16 * hi) return next;
    a = next;
  }
  return a;
}

}  // namespace minid
