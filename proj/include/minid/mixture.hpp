#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "minid/bernstein.hpp"
#include "minid/distfn.hpp"
#include "minid/drift.hpp"
#include "minid/radon.hpp"

namespace minid {

struct WeightedDist {
  double weight;
  DistFn dist;
};

// gamma = image of kappa(ds) x rho(dG) under (s, G) -> G(. / s).
struct ProductForm {
  RadonMeasure kappa;
  std::vector<WeightedDist> rho;
};

// gamma of a (time-changed) killed subordinator L_{clock(t)}: atoms
// (1 - exp(-u)) 1{. >= s} under d clock(s) x levy(du), plus point masses at
// s with intensity kill_rate d clock(s). psi must carry no drift.
struct SubordinatorForm {
  DriftFn clock;
  BernsteinSpec psi;
};

// Pair (b, gamma) describing the exponent measure of an exchangeable min-id
// sequence.
class ExponentMixture {
 public:
  using Gamma = std::variant<std::vector<WeightedDist>, ProductForm, SubordinatorForm>;

  ExponentMixture(DriftFn drift, Gamma gamma) : drift_(std::move(drift)), gamma_(std::move(gamma)) {}

  static ExponentMixture drift_only(DriftFn b) { return {std::move(b), std::vector<WeightedDist>{}}; }

  const DriftFn& drift() const noexcept { return drift_; }
  const Gamma& gamma() const noexcept { return gamma_; }

 private:
  DriftFn drift_;
  Gamma gamma_;
};

struct MixtureReport {
  bool ok = true;
  std::vector<std::string> failures;
  // int G(t) gamma(dG) at each probe point
  std::vector<double> probe_integrals;
};

// Integrability at every probe, monotone drift, no zero atom. Never throws.
MixtureReport validate_mixture(const ExponentMixture& m, std::span<const double> probe_grid);

// int G(t) gamma(dG) for one t.
QuadratureResult mixture_first_moment(const ExponentMixture& m, double t);

}  // namespace minid
