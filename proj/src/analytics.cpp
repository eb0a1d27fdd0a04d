#include "minid/analytics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "minid/batch.hpp"
#include "minid/errors.hpp"
#include "minid/sampler.hpp"
#include "minid/stats.hpp"

namespace minid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_thresholds(std::span<const double> t) {
  if (t.empty()) throw DomainError("threshold vector must not be empty");
  for (double x : t)
    if (std::isnan(x) || x == kInf) throw DomainError("thresholds must be < +inf");
}

void check_subset_dim(std::size_t d) {
  if (d > kMaxSubsetDim) throw UnsupportedError("subset enumeration limited to d <= 20");
}

// sum over non-empty subsets A of (-1)^{|A|+1} f(sum_{k in A} x_k)
template <class F>
double inclusion_exclusion(std::span<const double> x, F f) {
  const std::size_t d = x.size();
  check_subset_dim(d);
  double total = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k)
      if (mask & (1u << k)) s += x[k];
    total += (std::popcount(mask) % 2 ? 1.0 : -1.0) * f(s);
  }
  return total;
}

bool contains_integrated(const ModelPtr& m) {
  const auto& n = m->node();
  if (std::holds_alternative<node::Integrated>(n)) return true;
  if (const auto* s = std::get_if<node::Sum>(&n))
    return std::any_of(s->terms.begin(), s->terms.end(), contains_integrated);
  if (const auto* s = std::get_if<node::Subordinated>(&n)) return contains_integrated(s->inner);
  if (const auto* s = std::get_if<node::TimeChanged>(&n)) return contains_integrated(s->inner);
  return false;
}

double one_minus_product(const DistFn& g, std::span<const double> t, double s) {
  // 1 - prod_i (1 - G(t_i / s))
  double prod = 1.0;
  for (double x : t) {
    if (x == -kInf) continue;
    prod *= 1.0 - g(x / s);
  }
  return 1.0 - prod;
}

std::vector<WeightedDist> normalized(const std::vector<WeightedDist>& rho) {
  double total = 0.0;
  for (const auto& r : rho) total += r.weight;
  std::vector<WeightedDist> out;
  for (const auto& r : rho) out.push_back({r.weight / total, r.dist});
  return out;
}

}  // namespace

double survival_mo(const BernsteinSpec& psi, std::span<const double> t) {
  check_thresholds(t);
  for (double x : t)
    if (x < 0.0) throw DomainError("Marshall-Olkin thresholds must be >= 0");
  std::vector<double> s(t.begin(), t.end());
  std::sort(s.begin(), s.end());
  const std::size_t d = s.size();
  double exponent = 0.0;
  for (std::size_t i = 1; i <= d; ++i) {
    if (s[i - 1] == 0.0) continue;
    const double hi = eval_bernstein(psi, static_cast<double>(d - i + 1));
    const double lo = eval_bernstein(psi, static_cast<double>(d - i));
    exponent += s[i - 1] * (hi - lo);
  }
  return std::exp(-exponent);
}

Estimate survival_minstable(const DistFn& z_law, std::span<const double> t, std::size_t mc_n, std::uint64_t seed) {
  check_thresholds(t);
  for (double x : t)
    if (x < 0.0) throw DomainError("min-stable thresholds must be >= 0");
  if (z_law(0.0) > 0.0) throw DomainError("Z must be > 0 almost surely");
  using F = DistFn::Family;
  if (z_law.explicit_defect() == 0.0) {
    if (z_law.family() == F::point_mass) {
      const double c = z_law.param();
      return {std::exp(-*std::max_element(t.begin(), t.end()) / c), 0.0};
    }
    // 1 / Z_i are independent exponentials with mean 1 / scale
    double scale = 0.0;
    if (z_law.family() == F::frechet_unit) scale = 1.0;
    if (z_law.family() == F::scaled && z_law.base().family() == F::frechet_unit &&
        z_law.base().explicit_defect() == 0.0)
      scale = z_law.param();
    if (scale > 0.0) {
      std::vector<double> rates;
      for (double x : t)
        if (x > 0.0) rates.push_back(1.0 / x);
      if (rates.empty()) return {1.0, 0.0};
      const double emax = inclusion_exclusion(rates, [](double r) { return 1.0 / r; }) / scale;
      return {std::exp(-emax), 0.0};
    }
  }
  if (mc_n < 2) throw DomainError("Monte Carlo size must be >= 2");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < mc_n; ++i) {
    auto rng = RngStream::for_replicate(seed, i);
    double mx = 0.0;
    for (double x : t) mx = std::max(mx, x == 0.0 ? 0.0 : x / z_law.sample(rng));
    sum += mx;
    sum2 += mx * mx;
  }
  const double n = static_cast<double>(mc_n);
  const double mean = sum / n;
  const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / (n - 1.0));
  if (!std::isfinite(mean)) throw DomainError("E[max t_i / Z_i] is not finite for this Z");
  const double v = std::exp(-mean);
  return {v, v * se};
}

double archimedean_copula(const BernsteinSpec& g, std::span<const double> u) {
  if (u.empty()) throw DomainError("copula argument must not be empty");
  for (double x : u)
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("copula arguments must lie in [0, 1]");
  if (std::any_of(u.begin(), u.end(), [](double x) { return x == 0.0; })) return 0.0;
  double s = 0.0;
  for (double x : u) {
    if (x == 1.0) continue;
    s += invert_bernstein(g, -std::log(x));
  }
  return std::exp(-eval_bernstein(g, s));
}

Estimate reciprocal_archimedean_survival(const RadonMeasure& kappa, std::span<const double> t, ReciprocalMode mode) {
  check_thresholds(t);
  for (double x : t)
    if (!(x > 0.0)) throw DomainError("reciprocal Archimedean thresholds must be > 0");
  if (mode == ReciprocalMode::closed_form) {
    std::vector<double> inv;
    for (double x : t) inv.push_back(1.0 / x);
    const double e = inclusion_exclusion(inv, [&](double y) { return kappa.laplace(y); });
    return {std::exp(-e), 0.0};
  }
  const auto r = kappa.integrate([&](double s) {
    double prod = 1.0;
    for (double x : t) prod *= -std::expm1(-s / x);
    return 1.0 - prod;
  });
  const double v = std::exp(-r.value);
  return {v, v * r.abs_error};
}

double reciprocal_archimedean_copula(const RadonMeasure& kappa, std::span<const double> u) {
  if (u.empty()) throw DomainError("copula argument must not be empty");
  for (double x : u)
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("copula arguments must lie in [0, 1]");
  if (std::any_of(u.begin(), u.end(), [](double x) { return x == 0.0; })) return 0.0;
  // arguments equal to 1 contribute a factor of exactly 1
  std::vector<double> rest;
  for (double x : u)
    if (x < 1.0) rest.push_back(x);
  if (rest.empty()) return 1.0;
  if (rest.size() == 1) return rest[0];
  std::vector<double> y;
  for (double x : rest) y.push_back(kappa.laplace_inverse(-std::log(x)));
  const double e = inclusion_exclusion(y, [&](double s) { return kappa.laplace(s); });
  return std::exp(-e);
}

Estimate exponent_mass(const ExponentMixture& m, std::span<const double> t) {
  check_thresholds(t);
  double drift = 0.0;
  for (double x : t)
    if (x != -kInf) drift += m.drift()(x);
  return std::visit(
      [&](const auto& g) -> Estimate {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, std::vector<WeightedDist>>) {
          double s = drift;
          for (const auto& w : g) {
            double prod = 1.0;
            for (double x : t)
              if (x != -kInf) prod *= 1.0 - w.dist(x);
            s += w.weight * (1.0 - prod);
          }
          return {s, 0.0};
        } else if constexpr (std::is_same_v<T, ProductForm>) {
          double s = drift, err = 0.0;
          for (const auto& r : normalized(g.rho)) {
            const auto q = g.kappa.integrate([&](double u) { return u == 0.0 ? 0.0 : one_minus_product(r.dist, t, u); });
            s += r.weight * q.value;
            err += r.weight * q.abs_error;
          }
          return {s, err};
        } else {
          std::vector<double> c;
          for (double x : t)
            if (x != -kInf) c.push_back(g.clock(x));
          std::sort(c.begin(), c.end());
          const std::size_t d = c.size();
          double s = drift;
          for (std::size_t i = 1; i <= d; ++i) {
            if (c[i - 1] == 0.0) continue;
            s += c[i - 1] * (eval_bernstein(g.psi, static_cast<double>(d - i + 1)) -
                             eval_bernstein(g.psi, static_cast<double>(d - i)));
          }
          return {s, 0.0};
        }
      },
      m.gamma());
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::increasing: return "increasing";
    case Trend::decreasing: return "decreasing";
    case Trend::flat: return "flat";
    case Trend::mixed: return "mixed";
  }
  return "mixed";
}

TailDependence tail_dependence(const ExponentMixture& m, std::size_t d_prime, std::span<const double> probes) {
  if (d_prime < 2) throw DomainError("tail dependence needs d' >= 2");
  if (probes.size() < 3) throw DomainError("tail dependence needs at least 3 probes");
  for (std::size_t i = 1; i < probes.size(); ++i)
    if (!(probes[i] > probes[i - 1])) throw DomainError("probes must be strictly increasing");
  const double k = static_cast<double>(d_prime);
  TailDependence out;
  out.probes.assign(probes.begin(), probes.end());
  for (double t : probes) {
    if (!std::isfinite(t)) throw DomainError("probes must be finite");
    double mass = m.drift()(t);
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, std::vector<WeightedDist>>) {
            for (const auto& w : g) {
              const double p = w.dist(t);
              mass += w.weight * p * std::pow(1.0 - p, k - 1.0);
            }
          } else if constexpr (std::is_same_v<T, ProductForm>) {
            for (const auto& r : normalized(g.rho)) {
              mass += r.weight * g.kappa
                                     .integrate([&](double u) {
                                       if (u == 0.0) return 0.0;
                                       const double p = r.dist(t / u);
                                       return p * std::pow(1.0 - p, k - 1.0);
                                     })
                                     .value;
            }
          } else {
            mass += g.clock(t) * (eval_bernstein(g.psi, k) - eval_bernstein(g.psi, k - 1.0));
          }
        },
        m.gamma());
    out.masses.push_back(mass);
    out.rho.push_back(std::exp(-mass));
  }
  out.estimate = out.rho.back();
  bool up = true, down = true, flat = true;
  for (std::size_t i = 1; i < out.rho.size(); ++i) {
    const double diff = out.rho[i] - out.rho[i - 1];
    const double tol = 1e-12 * std::max(1.0, std::abs(out.rho[i]));
    if (diff > tol) down = flat = false;
    if (diff < -tol) up = flat = false;
  }
  out.trend = flat ? Trend::flat : up ? Trend::increasing : down ? Trend::decreasing : Trend::mixed;
  return out;
}

Estimate mc_survival_from_model(const ModelPtr& model, std::span<const double> t, const McConfig& cfg) {
  check_thresholds(t);
  if (cfg.n < 2) throw DomainError("Monte Carlo size must be >= 2");
  for (double x : t)
    if (x < cfg.t_lo || x > cfg.t_hi) throw DomainError("thresholds must lie inside the window");
  // paths are only read at the thresholds; integration needs the fine grid
  GridPtr grid;
  if (contains_integrated(model)) {
    grid = make_uniform_grid(cfg.t_lo, cfg.t_hi, cfg.grid_step);
  } else {
    std::vector<double> times(t.begin(), t.end());
    times.push_back(cfg.t_lo);
    grid = make_grid(std::move(times), cfg.grid_step);
  }
  PathSampler sampler(model, grid);
  std::vector<double> z(cfg.n);
  parallel_rows(cfg.n, cfg.threads, [&](std::size_t i) {
    auto rng = RngStream::for_replicate(cfg.seed, i).substream(1);
    const auto p = sampler.sample(rng);
    double s = 0.0;
    for (double x : t) s += p.value_at(x);
    z[i] = std::exp(-s);
  });
  const auto m = sample_mean(z);
  return {m.mean, m.std_error};
}

}  // namespace minid
