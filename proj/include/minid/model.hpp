#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "minid/bernstein.hpp"
#include "minid/distfn.hpp"
#include "minid/drift.hpp"
#include "minid/mixture.hpp"
#include "minid/radon.hpp"

namespace minid {

class ChronometerModel;
using ModelPtr = std::shared_ptr<const ChronometerModel>;

// Keep only Levy-measure paths x with x(horizon) > eps.
struct Truncation {
  double horizon;
  double eps;
};

namespace node {

struct Drift {
  DriftFn b;
};
// H_t = L_{max(t, 0)} for a (killed) subordinator with exponent psi.
struct LevySubordinator {
  BernsteinSpec psi;
  std::optional<Truncation> truncation;
};
// H_t = L_{clock(t)}
struct AdditiveSubordinator {
  DriftFn clock;
  BernsteinSpec psi;
  std::optional<Truncation> truncation;
};
// H_t = sum_k -log(1 - G_k(t / S_k)), S_k the points of a Poisson process
// with intensity kappa, G_k i.i.d. from rho (weights normalized on use).
struct StrongIdt {
  RadonMeasure kappa;
  std::vector<WeightedDist> rho;
  std::size_t max_terms = 1000;
  std::optional<Truncation> truncation;
};
// H_t = (drift_rate + M) max(t, 0), M distributed as L_1 for `mixing`.
struct Frailty {
  double drift_rate;
  BernsteinSpec mixing;
};
// H_t = -log(1 - Gamma_t) for a Dirichlet process with base law `base`.
struct Dirichlet {
  double concentration;
  DistFn base;
  std::size_t sticks = 1000;
};
struct PathAtom {
  double weight;
  DriftFn shape;
  double infinite_from = std::numeric_limits<double>::infinity();
};
// Sum of N ~ Poisson(mass) deterministic paths picked i.i.d. from `atoms`.
struct CompoundPoissonPaths {
  double mass;
  std::vector<PathAtom> atoms;
};
// H_t = inf * 1{t >= Xbar}
struct Comonotone {
  DistFn law;
};
struct Sum {
  std::vector<ModelPtr> terms;
};
struct Subordinated {
  BernsteinSpec outer;
  ModelPtr inner;
};
// H_t = int_[0, t] V_s kappa(ds)
struct Integrated {
  ModelPtr inner;
  RadonMeasure kappa;
};
// H_t = inner_{map(t)}, map the left-continuous inverse of a margin transform.
struct TimeChanged {
  ModelPtr inner;
  MonotoneMap map;
};

}  // namespace node

class ChronometerModel {
 public:
  using Node = std::variant<node::Drift, node::LevySubordinator, node::AdditiveSubordinator, node::StrongIdt,
                            node::Frailty, node::Dirichlet, node::CompoundPoissonPaths, node::Comonotone, node::Sum,
                            node::Subordinated, node::Integrated, node::TimeChanged>;

  // Validates the node parameters; throws DomainError with the constraint.
  explicit ChronometerModel(Node n);

  const Node& node() const noexcept { return node_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&node_);
  }
  std::string type_name() const;

 private:
  Node node_;
};

ModelPtr make_model(ChronometerModel::Node n);

ModelPtr drift_model(DriftFn b);
ModelPtr levy_model(BernsteinSpec psi);
ModelPtr additive_model(DriftFn clock, BernsteinSpec psi);
ModelPtr strong_idt_model(RadonMeasure kappa, std::vector<WeightedDist> rho, std::size_t max_terms = 1000);
ModelPtr frailty_model(double drift_rate, BernsteinSpec mixing);
ModelPtr dirichlet_model(double concentration, DistFn base, std::size_t sticks = 1000);
ModelPtr compound_poisson_model(double mass, std::vector<node::PathAtom> atoms);
ModelPtr comonotone_model(DistFn law);
ModelPtr sum_model(std::vector<ModelPtr> terms);
ModelPtr subordinated_model(BernsteinSpec outer, ModelPtr inner);
ModelPtr integrated_model(ModelPtr inner, RadonMeasure kappa);
ModelPtr time_changed_model(ModelPtr inner, MonotoneMap map);

// Restrict the Levy measure to paths with x(s) > eps.
ModelPtr truncate_levy(const ModelPtr& model, double s, double eps);
// Model whose n-fold i.i.d. sum has the law of `model`.
ModelPtr divide_model(const ModelPtr& model, std::size_t n);
// P(H_t = inf), exact.
double jump_to_infinity_prob(const ChronometerModel& model, double t);
// Exponent-measure representation (b, gamma) when one is available in
// closed form.
ExponentMixture mixture_from_model(const ChronometerModel& model);

}  // namespace minid
