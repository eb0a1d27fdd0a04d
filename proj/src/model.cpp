#include "minid/model.hpp"

#include <cmath>

#include "minid/errors.hpp"

namespace minid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

void check_truncation(const std::optional<Truncation>& tr) {
  if (!tr) return;
  require(std::isfinite(tr->horizon), "truncation horizon must be finite");
  require(tr->eps >= 0.0, "truncation threshold must be >= 0");
}

void check_child(const ModelPtr& m) { require(static_cast<bool>(m), "composite node has a missing child"); }

// psi with every drift component removed (kill rates kept).
BernsteinSpec jump_part(const BernsteinSpec& psi) {
  using F = BernsteinSpec::Family;
  if (psi.family() == F::sum) {
    std::vector<BernsteinSpec> terms;
    for (const auto& t : psi.terms()) terms.push_back(jump_part(t));
    return BernsteinSpec::sum(std::move(terms)).with_kill_rate(psi.kill_rate());
  }
  if (psi.is_drift_only()) return BernsteinSpec::drift(0.0).with_kill_rate(psi.kill_rate());
  return psi;
}

}  // namespace

ChronometerModel::ChronometerModel(Node n) : node_(std::move(n)) {
  std::visit(overloaded{
                 [](const node::Drift&) {},
                 [](const node::LevySubordinator& m) { check_truncation(m.truncation); },
                 [](const node::AdditiveSubordinator& m) { check_truncation(m.truncation); },
                 [](const node::StrongIdt& m) {
                   require(!m.rho.empty(), "strong_idt needs a non-empty mixing law rho");
                   for (const auto& r : m.rho) {
                     require(r.weight > 0.0 && std::isfinite(r.weight), "rho weights must be finite and > 0");
                     require(!r.dist.is_zero(), "rho must not charge the zero function");
                   }
                   require(m.kappa.has_density() || !m.kappa.atoms().empty(), "kappa must not be the zero measure");
                   for (const auto& a : m.kappa.atoms()) require(a.at > 0.0, "kappa must not charge 0");
                   require(m.max_terms >= 1, "strong_idt needs at least one term");
                   check_truncation(m.truncation);
                 },
                 [](const node::Frailty& m) {
                   require(m.drift_rate >= 0.0 && std::isfinite(m.drift_rate), "frailty drift must be finite and >= 0");
                   require(m.mixing.total_kill_rate() == 0.0, "frailty mixing law must not be killed");
                 },
                 [](const node::Dirichlet& m) {
                   require(m.concentration > 0.0 && std::isfinite(m.concentration), "concentration must be > 0");
                   require(m.sticks >= 1, "Dirichlet model needs at least one stick");
                 },
                 [](const node::CompoundPoissonPaths& m) {
                   require(m.mass > 0.0 && std::isfinite(m.mass), "compound Poisson mass must be > 0");
                   require(!m.atoms.empty(), "compound Poisson model needs at least one path atom");
                   for (const auto& a : m.atoms) {
                     require(a.weight > 0.0 && std::isfinite(a.weight), "path atom weights must be finite and > 0");
                     require(!std::isnan(a.infinite_from), "infinite_from must not be NaN");
                     require(!a.shape.is_zero() || std::isfinite(a.infinite_from), "path atom must not be the zero path");
                   }
                 },
                 [](const node::Comonotone&) {},
                 [](const node::Sum& m) {
                   require(!m.terms.empty(), "sum needs at least one term");
                   for (const auto& t : m.terms) check_child(t);
                 },
                 [](const node::Subordinated& m) { check_child(m.inner); },
                 [](const node::Integrated& m) { check_child(m.inner); },
                 [](const node::TimeChanged& m) { check_child(m.inner); },
             },
             node_);
}

std::string ChronometerModel::type_name() const {
  static constexpr const char* names[] = {"drift",   "levy_subordinator", "additive_subordinator", "strong_idt",
                                          "frailty", "dirichlet",         "compound_poisson_paths", "comonotone",
                                          "sum",     "subordinated",      "integrated",             "time_changed"};
  return names[node_.index()];
}

ModelPtr make_model(ChronometerModel::Node n) { return std::make_shared<const ChronometerModel>(std::move(n)); }

ModelPtr drift_model(DriftFn b) { return make_model(node::Drift{std::move(b)}); }
ModelPtr levy_model(BernsteinSpec psi) { return make_model(node::LevySubordinator{std::move(psi), std::nullopt}); }
ModelPtr additive_model(DriftFn clock, BernsteinSpec psi) {
  return make_model(node::AdditiveSubordinator{std::move(clock), std::move(psi), std::nullopt});
}
ModelPtr strong_idt_model(RadonMeasure kappa, std::vector<WeightedDist> rho, std::size_t max_terms) {
  return make_model(node::StrongIdt{std::move(kappa), std::move(rho), max_terms, std::nullopt});
}
ModelPtr frailty_model(double drift_rate, BernsteinSpec mixing) {
  return make_model(node::Frailty{drift_rate, std::move(mixing)});
}
ModelPtr dirichlet_model(double concentration, DistFn base, std::size_t sticks) {
  return make_model(node::Dirichlet{concentration, std::move(base), sticks});
}
ModelPtr compound_poisson_model(double mass, std::vector<node::PathAtom> atoms) {
  return make_model(node::CompoundPoissonPaths{mass, std::move(atoms)});
}
ModelPtr comonotone_model(DistFn law) { return make_model(node::Comonotone{std::move(law)}); }
ModelPtr sum_model(std::vector<ModelPtr> terms) { return make_model(node::Sum{std::move(terms)}); }
ModelPtr subordinated_model(BernsteinSpec outer, ModelPtr inner) {
  return make_model(node::Subordinated{std::move(outer), std::move(inner)});
}
ModelPtr integrated_model(ModelPtr inner, RadonMeasure kappa) {
  return make_model(node::Integrated{std::move(inner), std::move(kappa)});
}
ModelPtr time_changed_model(ModelPtr inner, MonotoneMap map) {
  return make_model(node::TimeChanged{std::move(inner), std::move(map)});
}

ModelPtr truncate_levy(const ModelPtr& model, double s, double eps) {
  if (!model) throw DomainError("missing model");
  if (!std::isfinite(s)) throw DomainError("truncation horizon must be finite");
  if (!(eps >= 0.0)) throw DomainError("truncation threshold must be >= 0");
  const Truncation tr{s, eps};
  if (const auto* m = model->as<node::LevySubordinator>()) return make_model(node::LevySubordinator{m->psi, tr});
  if (const auto* m = model->as<node::AdditiveSubordinator>())
    return make_model(node::AdditiveSubordinator{m->clock, m->psi, tr});
  if (const auto* m = model->as<node::StrongIdt>())
    return make_model(node::StrongIdt{m->kappa, m->rho, m->max_terms, tr});
  if (const auto* m = model->as<node::CompoundPoissonPaths>()) {
    double total = 0.0, kept_weight = 0.0;
    std::vector<node::PathAtom> kept;
    for (const auto& a : m->atoms) {
      total += a.weight;
      const double xs = s >= a.infinite_from ? kInf : a.shape(s);
      if (xs > eps) {
        kept.push_back(a);
        kept_weight += a.weight;
      }
    }
    if (kept.empty()) return drift_model(DriftFn::zero());
    return compound_poisson_model(m->mass * kept_weight / total, std::move(kept));
  }
  throw UnsupportedError("truncation is defined for subordinators, strong_idt and compound Poisson paths only");
}

ModelPtr divide_model(const ModelPtr& model, std::size_t n) {
  if (!model) throw DomainError("missing model");
  if (n == 0) throw DomainError("division count must be >= 1");
  if (n == 1) return model;
  const double f = 1.0 / static_cast<double>(n);
  return std::visit(
      overloaded{
          [&](const node::Drift& m) { return drift_model(m.b.scaled(f)); },
          [&](const node::LevySubordinator& m) { return make_model(node::LevySubordinator{m.psi.scaled(f), m.truncation}); },
          [&](const node::AdditiveSubordinator& m) {
            return make_model(node::AdditiveSubordinator{m.clock, m.psi.scaled(f), m.truncation});
          },
          [&](const node::StrongIdt& m) {
            return make_model(node::StrongIdt{m.kappa.scaled(f), m.rho, m.max_terms, m.truncation});
          },
          [&](const node::Frailty& m) { return frailty_model(m.drift_rate * f, m.mixing.scaled(f)); },
          [&](const node::CompoundPoissonPaths& m) { return compound_poisson_model(m.mass * f, m.atoms); },
          [&](const node::Comonotone& m) -> ModelPtr {
            using F = DistFn::Family;
            if (m.law.explicit_defect() == 0.0) {
              if (m.law.family() == F::exponential) return comonotone_model(DistFn::exponential(m.law.param() * f));
              if (m.law.family() == F::unit_exponential) return comonotone_model(DistFn::exponential(f));
            }
            throw UnsupportedError("comonotone division needs an exponential law");
          },
          [&](const node::Sum& m) {
            std::vector<ModelPtr> terms;
            for (const auto& t : m.terms) terms.push_back(divide_model(t, n));
            return sum_model(std::move(terms));
          },
          [&](const node::Integrated& m) { return integrated_model(divide_model(m.inner, n), m.kappa); },
          [&](const node::TimeChanged& m) { return time_changed_model(divide_model(m.inner, n), m.map); },
          [&](const node::Dirichlet&) -> ModelPtr { throw UnsupportedError("Dirichlet model has no divided form"); },
          [&](const node::Subordinated&) -> ModelPtr {
            throw UnsupportedError("subordinated model has no divided form");
          },
      },
      model->node());
}

double jump_to_infinity_prob(const ChronometerModel& model, double t) {
  if (std::isnan(t)) throw DomainError("time must not be NaN");
  return std::visit(
      overloaded{
          [&](const node::Drift&) { return 0.0; },
          [&](const node::LevySubordinator& m) {
            const double c = m.psi.total_kill_rate();
            double span = std::max(t, 0.0);
            if (m.truncation) {
              if (std::isinf(m.truncation->eps)) return 0.0;
              span = std::min(span, std::max(m.truncation->horizon, 0.0));
            }
            return c == 0.0 ? 0.0 : -std::expm1(-c * span);
          },
          [&](const node::AdditiveSubordinator& m) {
            const double c = m.psi.total_kill_rate();
            double tt = t;
            if (m.truncation) {
              if (std::isinf(m.truncation->eps)) return 0.0;
              tt = std::min(tt, m.truncation->horizon);
            }
            const double lam = m.clock(tt);
            return c == 0.0 || lam == 0.0 ? 0.0 : -std::expm1(-c * lam);
          },
          [&](const node::Comonotone& m) { return m.law(t); },
          [&](const node::CompoundPoissonPaths& m) {
            double total = 0.0, inf_weight = 0.0;
            for (const auto& a : m.atoms) {
              total += a.weight;
              if (t >= a.infinite_from) inf_weight += a.weight;
            }
            return -std::expm1(-m.mass * inf_weight / total);
          },
          [&](const node::StrongIdt& m) {
            if (m.truncation && m.truncation->eps > 0.0)
              throw UnsupportedError("jump-to-infinity probability of a truncated strong_idt model");
            if (t <= 0.0) return 0.0;
            double total = 0.0, mass = 0.0;
            for (const auto& r : m.rho) total += r.weight;
            for (const auto& r : m.rho) {
              const double q = r.dist.quantile(1.0);
              if (std::isinf(q)) continue;
              if (q <= 0.0) return 1.0;
              mass += r.weight / total * m.kappa.cumulative(t / q);
            }
            return -std::expm1(-mass);
          },
          [&](const node::Frailty&) { return 0.0; },
          [&](const node::Sum& m) {
            double none = 1.0;
            for (const auto& term : m.terms) none *= 1.0 - jump_to_infinity_prob(*term, t);
            return 1.0 - none;
          },
          [&](const node::TimeChanged& m) { return jump_to_infinity_prob(*m.inner, m.map(t)); },
          [&](const node::Dirichlet&) -> double {
            throw UnsupportedError("jump-to-infinity probability is not available for the Dirichlet model");
          },
          [&](const node::Subordinated&) -> double {
            throw UnsupportedError("jump-to-infinity probability is not available for subordinated models");
          },
          [&](const node::Integrated&) -> double {
            throw UnsupportedError("jump-to-infinity probability is not available for integrated models");
          },
      },
      model.node());
}

ExponentMixture mixture_from_model(const ChronometerModel& model) {
  return std::visit(
      overloaded{
          [&](const node::Drift& m) { return ExponentMixture::drift_only(m.b); },
          [&](const node::LevySubordinator& m) -> ExponentMixture {
            if (m.truncation) throw UnsupportedError("exponent mixture of a truncated subordinator");
            return {DriftFn::linear(m.psi.drift_rate()), SubordinatorForm{DriftFn::linear(1.0), jump_part(m.psi)}};
          },
          [&](const node::AdditiveSubordinator& m) -> ExponentMixture {
            if (m.truncation) throw UnsupportedError("exponent mixture of a truncated subordinator");
            const double b = m.psi.drift_rate();
            return {b > 0.0 ? m.clock.scaled(b) : DriftFn::zero(), SubordinatorForm{m.clock, jump_part(m.psi)}};
          },
          [&](const node::StrongIdt& m) -> ExponentMixture {
            if (m.truncation && m.truncation->eps > 0.0)
              throw UnsupportedError("exponent mixture of a truncated strong_idt model");
            double total = 0.0;
            for (const auto& r : m.rho) total += r.weight;
            std::vector<WeightedDist> rho;
            for (const auto& r : m.rho) rho.push_back({r.weight / total, r.dist});
            return {DriftFn::zero(), ProductForm{m.kappa, std::move(rho)}};
          },
          [&](const node::Frailty& m) -> ExponentMixture {
            // Levy measure of M pushed to the scale 1/M of unit exponential atoms
            double drift = m.drift_rate + m.mixing.drift_rate();
            const BernsteinSpec jumps = jump_part(m.mixing);
            std::vector<const BernsteinSpec*> parts;
            if (jumps.family() == BernsteinSpec::Family::sum) {
              for (const auto& t : jumps.terms()) parts.push_back(&t);
            } else {
              parts.push_back(&jumps);
            }
            const BernsteinSpec* stable = nullptr;
            for (const auto* p : parts) {
              if (p->is_drift_only()) continue;
              if (p->family() != BernsteinSpec::Family::stable || stable)
                throw UnsupportedError("frailty exponent mixture needs a single stable jump component");
              stable = p;
            }
            if (!stable) return ExponentMixture::drift_only(DriftFn::linear(drift));
            const double alpha = stable->p1();
            const double coef = stable->p2() * alpha / std::tgamma(1.0 - alpha);
            return {DriftFn::linear(drift),
                    ProductForm{RadonMeasure(coef, alpha), {{1.0, DistFn::unit_exponential()}}}};
          },
          [&](const node::CompoundPoissonPaths& m) -> ExponentMixture {
            double total = 0.0;
            for (const auto& a : m.atoms) total += a.weight;
            std::vector<WeightedDist> atoms;
            for (const auto& a : m.atoms)
              atoms.push_back({m.mass * a.weight / total, DistFn::path_transform(a.shape, a.infinite_from)});
            return {DriftFn::zero(), std::move(atoms)};
          },
          [&](const node::Comonotone& m) -> ExponentMixture {
            using F = DistFn::Family;
            if (m.law.explicit_defect() == 0.0) {
              double rate = 0.0;
              if (m.law.family() == F::exponential) rate = m.law.param();
              if (m.law.family() == F::unit_exponential) rate = 1.0;
              if (rate > 0.0)
                return {DriftFn::zero(),
                        SubordinatorForm{DriftFn::linear(rate), BernsteinSpec::drift(0.0).with_kill_rate(1.0)}};
            }
            throw UnsupportedError("comonotone exponent mixture needs an exponential law");
          },
          [&](const node::Sum& m) -> ExponentMixture {
            // linear drifts add; finite lists concatenate; one structured
            // gamma may be combined with drift-only terms
            double rate = 0.0;
            std::vector<WeightedDist> atoms;
            std::optional<ExponentMixture::Gamma> structured;
            for (const auto& term : m.terms) {
              const auto part = mixture_from_model(*term);
              const auto& b = part.drift();
              if (b.kind() == DriftFn::Kind::table) throw UnsupportedError("sum mixture needs linear drifts");
              rate += b.rate();
              if (const auto* list = std::get_if<std::vector<WeightedDist>>(&part.gamma())) {
                atoms.insert(atoms.end(), list->begin(), list->end());
              } else if (!structured) {
                structured = part.gamma();
              } else {
                throw UnsupportedError("sum mixture supports one non-finite gamma term");
              }
            }
            if (structured) {
              if (!atoms.empty()) throw UnsupportedError("sum mixture cannot mix finite and non-finite gamma terms");
              return {DriftFn::linear(rate), std::move(*structured)};
            }
            return {DriftFn::linear(rate), std::move(atoms)};
          },
          [&](const auto&) -> ExponentMixture {
            throw UnsupportedError("no closed-form exponent mixture for model type " + model.type_name());
          },
      },
      model.node());
}

}  // namespace minid
