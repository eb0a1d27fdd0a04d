#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "minid/drift.hpp"
#include "minid/rng.hpp"

namespace minid {

// Distribution function G of a random variable on (-inf, inf], possibly
// defective. The mass at +inf is carried explicitly: an explicit defect d
// turns a base law G0 into (1 - d) * G0. eval(+inf) is 1 by convention.
class DistFn {
 public:
  enum class Family { exponential, frechet_unit, unit_exponential, point_mass, scaled, empirical, path_transform };

  static DistFn exponential(double rate);
  static DistFn frechet_unit();
  static DistFn unit_exponential();
  static DistFn point_mass(double at);  // at may be +inf (the zero function)
  static DistFn scaled(const DistFn& base, double scale);  // t -> base(t / scale)
  // Steps (t_k, G(t_k)) with strictly increasing t and non-decreasing
  // cumulative values in [0, 1].
  static DistFn empirical(std::vector<std::pair<double, double>> steps);
  // G(t) = 1 - exp(-h(t)) for t < infinite_from, 1 afterwards.
  static DistFn path_transform(DriftFn h, double infinite_from);

  DistFn with_defect(double d) const;

  double operator()(double t) const;
  double left_limit(double t) const;
  // inf{t : G(t) >= p}, inf of the empty set is +inf.
  double quantile(double p) const;
  double sample(RngStream& rng) const { return quantile(rng.uniform()); }

  // Mass at +inf.
  double defect() const;
  // G vanishes on the whole real line.
  bool is_zero() const;

  Family family() const noexcept { return family_; }
  double param() const noexcept { return a_; }
  double explicit_defect() const noexcept { return defect_; }
  const DistFn& base() const { return *base_; }
  const std::vector<std::pair<double, double>>& steps() const noexcept { return steps_; }
  const DriftFn& path() const { return *path_; }

  std::string describe() const;

 private:
  DistFn(Family f, double a) : family_(f), a_(a) {}
  double raw(double t) const;
  double raw_limit() const;
  double raw_quantile(double q) const;

  Family family_;
  double a_ = 0.0;
  double defect_ = 0.0;
  std::shared_ptr<const DistFn> base_;
  std::shared_ptr<const DriftFn> path_;
  std::vector<std::pair<double, double>> steps_;
};

}  // namespace minid
