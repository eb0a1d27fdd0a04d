#pragma once

#include <utility>
#include <vector>

#include "minid/quadrature.hpp"

namespace minid {

// Radon measure on [0, inf): density coef * s^(power - 1) plus point atoms.
class RadonMeasure {
 public:
  struct Atom {
    double at;
    double weight;
  };

  RadonMeasure(double coef, double power, std::vector<Atom> atoms = {});

  static RadonMeasure lebesgue(double scale = 1.0) { return {scale, 1.0}; }
  // Laplace transform t^(-1/theta).
  static RadonMeasure galambos(double theta);

  double coef() const noexcept { return coef_; }
  double power() const noexcept { return power_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  bool has_density() const noexcept { return coef_ > 0.0; }
  double total_mass() const noexcept;

  double cumulative(double t) const;       // kappa([0, t])
  double cumulative_left(double t) const;  // kappa([0, t))
  // inf{t >= 0 : kappa([0, t]) >= x}
  double cumulative_inverse(double x) const;
  // phi(t) = int exp(-t s) kappa(ds)
  double laplace(double t) const;
  double laplace_inverse(double y) const;
  // int h d(kappa); the density part uses u = s^power to remove the
  // endpoint singularity.
  QuadratureResult integrate(const ScalarFn& h, QuadratureOptions opt = {}) const;

  RadonMeasure scaled(double factor) const;

 private:
  double coef_;
  double power_;
  std::vector<Atom> atoms_;
};

}  // namespace minid
