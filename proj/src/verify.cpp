#include "minid/verify.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <sstream>

#include "minid/errors.hpp"
#include "minid/sampler.hpp"
#include "minid/stats.hpp"

namespace minid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

nlohmann::json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  return x;
}

nlohmann::json to_json_value(const CheckReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["status"] = to_string(r.status);
  j["pass"] = r.passed();
  j["statistic"] = number(r.statistic);
  j["target"] = number(r.target);
  j["tolerance"] = number(r.tolerance);
  j["one_sided"] = r.one_sided;
  j["std_error"] = number(r.std_error);
  j["seed"] = r.seed;
  j["replications"] = r.replications;
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (!r.parts.empty()) {
    j["parts"] = nlohmann::json::array();
    for (const auto& p : r.parts) j["parts"].push_back(to_json_value(p));
  }
  return j;
}

CheckStatus combine(const std::vector<CheckReport>& parts) {
  bool any_inconclusive = false;
  for (const auto& p : parts) {
    if (p.status == CheckStatus::fail) return CheckStatus::fail;
    if (p.status == CheckStatus::inconclusive) any_inconclusive = true;
  }
  return any_inconclusive ? CheckStatus::inconclusive : CheckStatus::pass;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// standard error of a difference of two proportions, floored at one count
double diff_se(double p, double q, double n) {
  const double floor = 1.0 / n;
  return std::sqrt(std::max(p * (1.0 - p), floor) / n + std::max(q * (1.0 - q), floor) / n);
}

}  // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string CheckReport::to_json() const { return to_json_value(*this).dump(); }

Estimate mc_survival_estimate(const SampleBatch& batch, std::span<const double> t) {
  if (t.size() != batch.d()) throw DomainError("threshold dimension must equal the batch dimension");
  if (batch.n() == 0) throw DomainError("survival estimate of an empty batch");
  for (double x : t)
    if (std::isnan(x)) throw DomainError("thresholds must not be NaN");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch.n(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < batch.d() && all; ++j) all = t[j] == -kInf || batch.at(i, j) > t[j];
    hits += all ? 1 : 0;
  }
  const double n = static_cast<double>(batch.n());
  const double p = static_cast<double>(hits) / n;
  return {p, binomial_std_error(p, n)};
}

KsResult ks_two_sample(std::span<const double> a_in, std::span<const double> b_in) {
  if (a_in.empty() || b_in.empty()) throw DomainError("KS test needs two non-empty samples");
  std::vector<double> a(a_in.begin(), a_in.end()), b(b_in.begin(), b_in.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 1.0;
  if (lambda >= 0.2) {
    p = 0.0;
    for (int k = 1; k <= 200; ++k) {
      const double term = 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
      p += term;
      if (std::abs(term) <= 1e-16 * std::max(p, 1e-300)) break;
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return {d, p};
}

double ks_critical_distance(double level, std::size_t na, std::size_t nb) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
  const auto q = [](double lambda) {
    double p = 0.0;
    for (int k = 1; k <= 200; ++k) p += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
  };
  double lo = 0.2, hi = 10.0;  // q is decreasing in lambda
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (q(mid) > level ? lo : hi) = mid;
  }
  const double ne = static_cast<double>(na) * static_cast<double>(nb) / static_cast<double>(na + nb);
  return hi / (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne));
}

double bonferroni_z(double level, std::size_t m) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
  const double per = level / static_cast<double>(std::max<std::size_t>(m, 1));
  return std::max(3.0, normal_quantile(1.0 - per / 2.0));
}

CheckReport point_check(std::string name, Estimate estimate, double target, double z, double slack) {
  CheckReport r;
  r.name = std::move(name);
  r.statistic = estimate.value;
  r.target = target;
  r.std_error = estimate.error;
  r.tolerance = z * estimate.error + slack;
  r.status = std::abs(estimate.value - target) <= r.tolerance ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

CheckReport exchangeability_check(const SampleBatch& batch, const std::vector<std::vector<double>>& probes,
                                  double level, std::size_t permutations, std::uint64_t seed) {
  if (probes.empty()) throw DomainError("exchangeability check needs at least one probe");
  if (permutations == 0) throw DomainError("exchangeability check needs at least one permutation");
  if (batch.d() < 2) throw DomainError("exchangeability needs d >= 2");
  CheckReport r;
  r.name = "exchangeability";
  r.seed = seed;
  r.replications = batch.n();
  const double n = static_cast<double>(batch.n());
  const double z = bonferroni_z(level, probes.size() * permutations);
  r.tolerance = z;
  r.target = 0.0;
  r.std_error = kNan;
  RngStream rng(seed, 0);
  double worst = 0.0;
  std::ostringstream detail;
  for (const auto& t : probes) {
    if (t.size() != batch.d()) throw DomainError("probe dimension must equal the batch dimension");
    const auto base = mc_survival_estimate(batch, t);
    for (std::size_t k = 0; k < permutations; ++k) {
      std::vector<double> p = t;
      // a uniformly random permutation different from the identity
      do std::shuffle(p.begin(), p.end(), rng);
      while (p == t && std::adjacent_find(t.begin(), t.end(), std::not_equal_to<>()) != t.end());
      const auto other = mc_survival_estimate(batch, p);
      const double stat = std::abs(base.value - other.value) / diff_se(base.value, other.value, n);
      if (stat > worst) {
        worst = stat;
        detail.str("");
        detail << "largest gap " << fmt(base.value - other.value) << " between probe and permutation";
      }
    }
  }
  r.statistic = worst;
  r.one_sided = true;
  r.status = worst <= z ? CheckStatus::pass : CheckStatus::fail;
  r.detail = detail.str();
  return r;
}

CheckReport divisibility_check(const ModelPtr& model, std::size_t n_split, double t_probe, const SamplingConfig& cfg,
                               bool adversarial, double level) {
  if (n_split == 0) throw DomainError("n_split must be >= 1");
  CheckReport r;
  r.name = adversarial ? "divisibility(adversarial full-model minimum)" : "divisibility";
  r.seed = cfg.seed;
  r.replications = cfg.n;
  r.target = 0.0;
  r.std_error = kNan;
  r.one_sided = true;
  if (n_split == 1 && !adversarial) {
    r.statistic = 0.0;
    r.tolerance = 0.0;
    r.status = CheckStatus::pass;
    r.detail = "n_split = 1: the divided model is the model itself";
    return r;
  }
  const auto piece = adversarial ? model : divide_model(model, n_split);
  const std::size_t tests = cfg.d + 1;
  const double per_level = level / static_cast<double>(tests);
  SampleOptions opt;
  opt.threads = cfg.threads;

  // (a) minimum of n_split batches of the divided model
  const auto full = definetti_sample(model, cfg.d, cfg.n, cfg.t_lo, cfg.t_hi, cfg.grid_step,
                                     splitmix64(cfg.seed ^ 0xA1), opt);
  std::vector<double> mins(cfg.n * cfg.d, kInf);
  for (std::size_t k = 0; k < n_split; ++k) {
    const auto part = definetti_sample(piece, cfg.d, cfg.n, cfg.t_lo, cfg.t_hi, cfg.grid_step,
                                       splitmix64(cfg.seed ^ (0xB000 + k)), opt);
    for (std::size_t i = 0; i < mins.size(); ++i) mins[i] = std::min(mins[i], part.data()[i]);
  }
  CheckReport min_route;
  min_route.name = "min-of-batches";
  min_route.one_sided = true;
  min_route.tolerance = ks_critical_distance(per_level, cfg.n, cfg.n);
  min_route.statistic = 0.0;
  double smallest_p = 1.0;
  for (std::size_t j = 0; j < cfg.d; ++j) {
    std::vector<double> a(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) a[i] = mins[i * cfg.d + j];
    const auto ks = ks_two_sample(a, full.column(j));
    min_route.statistic = std::max(min_route.statistic, ks.statistic);
    smallest_p = std::min(smallest_p, ks.p_value);
  }
  min_route.status = min_route.statistic <= min_route.tolerance ? CheckStatus::pass : CheckStatus::fail;
  min_route.detail = "largest per-margin KS distance; smallest p-value " + fmt(smallest_p);

  // (b) sum of n_split divided paths at t_probe
  const auto grid = make_grid({cfg.t_lo, t_probe}, cfg.grid_step);
  if (!(t_probe > cfg.t_lo && t_probe <= cfg.t_hi)) throw DomainError("t_probe must lie inside the window");
  PathSampler full_sampler(model, grid), piece_sampler(piece, grid);
  std::vector<double> direct(cfg.n), summed(cfg.n);
  parallel_rows(cfg.n, cfg.threads, [&](std::size_t i) {
    auto a = RngStream::for_replicate(splitmix64(cfg.seed ^ 0xC1), i);
    direct[i] = full_sampler.sample(a).value_at(t_probe);
    auto b = RngStream::for_replicate(splitmix64(cfg.seed ^ 0xC2), i);
    double s = 0.0;
    for (std::size_t k = 0; k < n_split; ++k) s += piece_sampler.sample(b).value_at(t_probe);
    summed[i] = s;
  });
  const auto ks = ks_two_sample(summed, direct);
  CheckReport sum_route;
  sum_route.name = "sum-of-paths";
  sum_route.one_sided = true;
  sum_route.statistic = ks.statistic;
  sum_route.tolerance = ks_critical_distance(per_level, cfg.n, cfg.n);
  sum_route.status = ks.statistic <= sum_route.tolerance ? CheckStatus::pass : CheckStatus::fail;
  sum_route.detail = "KS distance of H(t_probe); p-value " + fmt(ks.p_value);

  r.parts = {min_route, sum_route};
  r.statistic = std::max(min_route.statistic, sum_route.statistic);
  r.tolerance = sum_route.tolerance;
  r.status = combine(r.parts);
  r.detail = "KS distances against the critical distance; Bonferroni over " + std::to_string(tests) +
             " tests at level " + fmt(level);
  return r;
}

CheckReport taildep_monotonicity_check(const SampleBatch& batch, std::size_t d_max, double threshold, double level,
                                       std::size_t min_exceedances) {
  if (d_max < 3) throw DomainError("monotonicity needs d_max >= 3");
  if (batch.d() < d_max) throw DomainError("batch dimension must be >= d_max");
  CheckReport r;
  r.name = "tail-dependence monotonicity";
  r.replications = batch.n();
  r.seed = batch.meta().seed;
  r.one_sided = true;
  r.target = 0.0;
  std::vector<double> ratio, se;
  std::size_t fewest = std::numeric_limits<std::size_t>::max();
  std::ostringstream detail;
  detail << "ratios";
  for (std::size_t dp = 2; dp <= d_max; ++dp) {
    std::size_t cond = 0, both = 0;
    for (std::size_t i = 0; i < batch.n(); ++i) {
      bool rest = true;
      for (std::size_t j = 1; j < dp && rest; ++j) rest = batch.at(i, j) > threshold;
      if (!rest) continue;
      ++cond;
      both += batch.at(i, 0) > threshold ? 1 : 0;
    }
    fewest = std::min(fewest, cond);
    const double p = cond ? static_cast<double>(both) / static_cast<double>(cond) : kNan;
    ratio.push_back(p);
    se.push_back(cond ? binomial_std_error(p, static_cast<double>(cond)) : kNan);
    detail << " " << fmt(p);
  }
  detail << "; fewest conditioning rows " << fewest;
  r.detail = detail.str();
  const double z = bonferroni_z(level, ratio.size() - 1);
  r.tolerance = z;
  if (fewest < min_exceedances) {
    r.status = CheckStatus::inconclusive;
    r.statistic = kNan;
    r.std_error = kNan;
    return r;
  }
  double worst = -kInf;
  for (std::size_t k = 0; k + 1 < ratio.size(); ++k) {
    const double s = std::sqrt(se[k] * se[k] + se[k + 1] * se[k + 1]);
    const double drop = ratio[k] - ratio[k + 1];
    const double stat = s > 0.0 ? drop / s : (drop > 0.0 ? kInf : 0.0);
    worst = std::max(worst, stat);
  }
  r.statistic = worst;
  r.std_error = kNan;
  r.status = worst <= z ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

CheckReport truncation_convergence_check(const ModelPtr& model, double s, std::span<const double> eps,
                                         const std::vector<std::vector<double>>& t_grid, const McConfig& cfg,
                                         double level) {
  if (eps.empty()) throw DomainError("truncation check needs at least one eps");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw DomainError("eps values must be > 0");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw DomainError("eps values must be strictly decreasing");
  }
  if (t_grid.empty()) throw DomainError("truncation check needs at least one threshold vector");
  CheckReport r;
  r.name = "truncation convergence";
  r.seed = cfg.seed;
  r.replications = cfg.n;
  r.one_sided = true;
  r.target = 0.0;
  r.std_error = kNan;

  // models: eps_1 > ... > eps_k, then eps = 0, then the full model
  std::vector<ModelPtr> chain;
  for (double e : eps) chain.push_back(truncate_levy(model, s, e));
  chain.push_back(truncate_levy(model, s, 0.0));
  chain.push_back(model);
  const std::size_t levels = chain.size();
  // comparisons: ordering (levels - 1) and gap shrinkage (eps.size() - 1), per t
  const std::size_t m = t_grid.size() * ((levels - 1) + (eps.size() > 1 ? eps.size() - 1 : 0) + 1);
  const double z = bonferroni_z(level, m);
  r.tolerance = z;

  double worst = -kInf;
  std::ostringstream detail;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const auto& t = t_grid[ti];
    std::vector<Estimate> est;
    for (std::size_t k = 0; k < levels; ++k) {
      McConfig c = cfg;
      c.seed = splitmix64(cfg.seed + 0x100 * (ti + 1) + k);
      est.push_back(mc_survival_from_model(chain[k], t, c));
    }
    const auto se2 = [&](std::size_t a, std::size_t b) {
      return std::sqrt(est[a].error * est[a].error + est[b].error * est[b].error);
    };
    const auto score = [](double excess, double se) { return se > 0.0 ? excess / se : (excess > 0.0 ? kInf : 0.0); };
    // ordering chain: est[k] >= est[k + 1]
    for (std::size_t k = 0; k + 1 < levels; ++k) worst = std::max(worst, score(est[k + 1].value - est[k].value, se2(k, k + 1)));
    // eps = 0 equals the full model when every threshold is <= s
    const bool inside = std::all_of(t.begin(), t.end(), [&](double x) { return x <= s; });
    if (inside) worst = std::max(worst, score(std::abs(est[levels - 2].value - est[levels - 1].value), se2(levels - 2, levels - 1)));
    // gap to the full model shrinks as eps decreases
    const std::size_t full = levels - 1;
    for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
      const double gap_a = est[k].value - est[full].value;
      const double gap_b = est[k + 1].value - est[full].value;
      worst = std::max(worst, score(gap_b - gap_a, se2(k, k + 1)));
    }
    detail << (ti ? "; " : "") << "survival";
    for (const auto& e : est) detail << " " << fmt(e.value);
  }
  detail << " (eps descending, eps=0, full)";
  r.statistic = worst;
  r.detail = detail.str();
  r.status = worst <= z ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

}  // namespace minid
