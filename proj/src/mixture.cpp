#include "minid/mixture.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace minid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

QuadratureResult mixture_first_moment(const ExponentMixture& m, double t) {
  const auto& g = m.gamma();
  if (const auto* atoms = std::get_if<std::vector<WeightedDist>>(&g)) {
    double v = 0.0;
    for (const auto& a : *atoms) v += a.weight * a.dist(t);
    return {v, 0.0};
  }
  if (const auto* pf = std::get_if<ProductForm>(&g)) {
    QuadratureResult total;
    for (const auto& r : pf->rho) {
      const auto q = pf->kappa.integrate([&](double s) {
        if (s == 0.0) return r.dist(t > 0.0 ? kInf : (t < 0.0 ? -kInf : 0.0));
        return r.dist(t / s);
      });
      total.value += r.weight * q.value;
      total.abs_error += r.weight * q.abs_error;
    }
    return total;
  }
  const auto& sf = std::get<SubordinatorForm>(g);
  const double lam = sf.clock(t);
  return {lam == 0.0 ? 0.0 : lam * eval_bernstein(sf.psi, 1.0), 0.0};
}

MixtureReport validate_mixture(const ExponentMixture& m, std::span<const double> probe_grid) {
  MixtureReport rep;
  const auto fail = [&rep](std::string msg) {
    rep.ok = false;
    rep.failures.push_back(std::move(msg));
  };
  if (probe_grid.empty()) {
    fail("empty probe grid");
    return rep;
  }

  double prev = -kInf;
  double prev_b = 0.0;
  for (double t : probe_grid) {
    const double b = m.drift()(t);
    if (!(b >= 0.0)) fail("negative drift value");
    if (t >= prev && b < prev_b) fail("drift decreases between probe points");
    prev = t;
    prev_b = b;
  }

  const auto& g = m.gamma();
  if (const auto* atoms = std::get_if<std::vector<WeightedDist>>(&g)) {
    for (const auto& a : *atoms) {
      if (!(a.weight > 0.0) || !std::isfinite(a.weight)) fail("atom weight must be finite and > 0");
      if (a.dist.is_zero()) fail("zero atom");
    }
  } else if (const auto* pf = std::get_if<ProductForm>(&g)) {
    if (pf->rho.empty()) fail("empty mixing law");
    for (const auto& r : pf->rho) {
      if (!(r.weight > 0.0) || !std::isfinite(r.weight)) fail("mixing weight must be finite and > 0");
      if (r.dist.is_zero()) fail("zero atom");
    }
    for (const auto& a : pf->kappa.atoms())
      if (a.at == 0.0) fail("kappa must not charge 0");
  } else {
    const auto& sf = std::get<SubordinatorForm>(g);
    if (sf.psi.drift_rate() > 0.0) fail("subordinator form must not carry a drift in psi");
  }
  if (!rep.ok) return rep;

  for (double t : probe_grid) {
    double v = kInf;
    try {
      v = mixture_first_moment(m, t).value;
    } catch (const std::exception& e) {
      fail(std::string("integral evaluation failed: ") + e.what());
    }
    rep.probe_integrals.push_back(v);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integral of G(t) is not finite at t=" << t;
      fail(os.str());
    }
  }
  return rep;
}

}  // namespace minid
