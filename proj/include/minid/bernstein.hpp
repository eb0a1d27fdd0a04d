#pragma once

#include <string>
#include <vector>

#include "minid/rng.hpp"

namespace minid {

// Laplace exponent psi of a (possibly killed) subordinator, from a small
// catalog of closed-form families.
//   drift:          b * a
//   gamma:          shape * log(1 + a / rate)
//   stable:         scale * a^alpha           (alpha in (0, 1], alpha = 1 is a drift)
//   cp_exponential: intensity * a / (jump_rate + a)
//   sum:            sum of the terms
// A kill rate c adds c for every a > 0.
class BernsteinSpec {
 public:
  enum class Family { drift, gamma, stable, cp_exponential, sum };

  static BernsteinSpec drift(double rate);
  static BernsteinSpec gamma(double shape, double rate);
  static BernsteinSpec stable(double alpha, double scale = 1.0);
  static BernsteinSpec cp_exponential(double intensity, double jump_rate);
  static BernsteinSpec sum(std::vector<BernsteinSpec> terms);

  BernsteinSpec with_kill_rate(double c) const;
  // factor * psi; the Laplace exponent of L_{factor * t}.
  BernsteinSpec scaled(double factor) const;

  Family family() const noexcept { return family_; }
  double p1() const noexcept { return p1_; }
  double p2() const noexcept { return p2_; }
  const std::vector<BernsteinSpec>& terms() const noexcept { return terms_; }
  double kill_rate() const noexcept { return kill_; }
  double total_kill_rate() const noexcept;
  // Linear drift coefficient (stable with alpha = 1 counts as drift).
  double drift_rate() const noexcept;
  // True when the only non-drift structure is killing.
  bool is_drift_only() const noexcept;
  bool has_infinite_activity() const noexcept;
  // lim_{a -> inf} psi(a); +inf for unbounded families.
  double supremum() const noexcept;

  // Levy mass of jumps with size strictly larger than eps (eps > 0 unless
  // the jump part is finite).
  double levy_tail_mass(double eps) const;
  // One jump from the Levy measure restricted to (eps, inf), normalized.
  double sample_jump_above(double eps, RngStream& rng) const;
  // Increment of the unkilled subordinator over a time span dt >= 0.
  double sample_increment(double dt, RngStream& rng) const;

  std::string describe() const;

 private:
  BernsteinSpec(Family f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}

  Family family_;
  double p1_ = 0.0;
  double p2_ = 0.0;
  double kill_ = 0.0;
  std::vector<BernsteinSpec> terms_;
};

double eval_bernstein(const BernsteinSpec& spec, double a);
double eval_bernstein_derivative(const BernsteinSpec& spec, double a);
// a with psi(a) = y; closed form for drift and stable, bracketed
// bisection plus Newton polish otherwise.
double invert_bernstein(const BernsteinSpec& spec, double y);

// E1 exponential integral for x > 0.
double exponential_integral_e1(double x);

}  // namespace minid
