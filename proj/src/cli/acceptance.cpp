#include "minid/cli/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "minid/cli/batch_io.hpp"
#include "minid/errors.hpp"
#include "minid/stats.hpp"

namespace minid::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pinned tolerances.
constexpr double kClosedFormTol = 1e-10;
constexpr double kQuadratureTol = 1e-8;
constexpr double kZ = 3.0;
constexpr double kKsLevel = 0.01;
constexpr double kExchangeLevel = 0.05;
constexpr double kTaildepLevel = 0.05;
constexpr double kTruncationLevel = 0.05;
constexpr double kRhoLow = 0.02;
constexpr double kRhoHigh = 0.98;
constexpr std::size_t kRhoMinExceedances = 200;
constexpr double kDriftRhoLimit = 1e-6;

CheckReport bound_check(std::string name, double statistic, double limit, std::string detail = {}) {
  CheckReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.target = 0.0;
  r.tolerance = limit;
  r.one_sided = true;
  r.std_error = std::numeric_limits<double>::quiet_NaN();
  r.status = statistic <= limit ? CheckStatus::pass : CheckStatus::fail;
  r.detail = std::move(detail);
  return r;
}

CheckReport flag_check(std::string name, bool ok, std::string detail) {
  CheckReport r;
  r.name = std::move(name);
  r.statistic = ok ? 1.0 : 0.0;
  r.target = 1.0;
  r.std_error = std::numeric_limits<double>::quiet_NaN();
  r.status = ok ? CheckStatus::pass : CheckStatus::fail;
  r.detail = std::move(detail);
  return r;
}

CheckReport closed_form_check(std::string name, double a, double b, double tol) {
  auto r = point_check(std::move(name), Estimate{a, 0.0}, b, kZ, tol);
  r.std_error = std::numeric_limits<double>::quiet_NaN();
  return r;
}

// |a - b| within z standard errors of the difference of independent
// estimates.
CheckReport mc_pair_check(std::string name, Estimate a, Estimate b, double z = kZ) {
  return point_check(std::move(name), Estimate{a.value - b.value, std::hypot(a.error, b.error)}, 0.0, z);
}

CheckReport ks_check(std::string name, std::span<const double> a, std::span<const double> b, double level) {
  const auto ks = ks_two_sample(a, b);
  auto r = bound_check(std::move(name), ks.statistic, ks_critical_distance(level, a.size(), b.size()));
  r.replications = a.size();
  std::ostringstream os;
  os << "p=" << ks.p_value << " level=" << level;
  r.detail = os.str();
  return r;
}

std::string fmt(double x) { return format_double(x); }

SampleBatch sorted_rows(const SampleBatch& b) {
  std::vector<double> data(b.data());
  for (std::size_t i = 0; i < b.n(); ++i)
    std::sort(data.begin() + static_cast<std::ptrdiff_t>(i * b.d()),
              data.begin() + static_cast<std::ptrdiff_t>((i + 1) * b.d()));
  return SampleBatch(b.n(), b.d(), std::move(data), b.meta());
}

struct Ctx {
  std::uint64_t seed;
  unsigned threads;
  std::string cli_path;
  std::uint64_t sub(int id, int k) const { return seed + 1000u * static_cast<std::uint64_t>(id) + static_cast<std::uint64_t>(k); }
};

using Checks = std::vector<CheckReport>;

SampleOptions threaded(const Ctx& c) {
  SampleOptions o;
  o.threads = c.threads;
  return o;
}

Checks consistency_triangle(const Ctx& c) {
  const auto psi = BernsteinSpec::gamma(1.0, 1.0);
  const auto model = levy_model(psi);
  const std::vector<double> t{0.3, 0.9, 1.7};
  const std::size_t n = 200000;
  const double step = 1e-3;

  const double mo = survival_mo(psi, t);
  const auto mass = exponent_mass(mixture_from_model(*model), t);
  const double from_mass = std::exp(-mass.value);
  const auto batch = definetti_sample(model, 3, n, 0.0, 2.0, step, c.sub(1, 0), threaded(c));
  const auto empirical = mc_survival_estimate(batch, t);
  const auto mc = mc_survival_from_model(model, t, McConfig{n, 0.0, 2.0, step, c.sub(1, 1), c.threads});
  const Estimate closed{mo, 0.0};

  Checks out;
  out.push_back(closed_form_check("survival_mo vs exp(-exponent_mass)", mo, from_mass, kClosedFormTol));
  out.push_back(mc_pair_check("empirical vs survival_mo", empirical, closed));
  out.push_back(mc_pair_check("mc_survival_from_model vs survival_mo", mc, closed));
  out.push_back(mc_pair_check("empirical vs mc_survival_from_model", empirical, mc));
  out.back().replications = n;
  return out;
}

Checks gumbel_copula(const Ctx& c) {
  Checks out;
  const std::size_t n = 200000;
  const std::vector<double> grid{0.2, 0.5, 0.8};
  for (const double alpha : {0.7, 1.0}) {
    const auto mixing = BernsteinSpec::stable(alpha);
    const auto batch = definetti_sample(frailty_model(0.0, mixing), 2, n, 0.0, 5.0, 0.01,
                                        c.sub(2, alpha == 1.0 ? 1 : 0), threaded(c));
    for (const double u1 : grid) {
      for (const double u2 : grid) {
        const std::vector<double> u{u1, u2};
        // survival margins exp(-x^alpha)
        const std::vector<double> x{std::pow(-std::log(u1), 1.0 / alpha), std::pow(-std::log(u2), 1.0 / alpha)};
        const auto emp = mc_survival_estimate(batch, x);
        const double target = alpha == 1.0 ? u1 * u2 : archimedean_copula(mixing, u);
        auto r = point_check("alpha=" + fmt(alpha) + " u=(" + fmt(u1) + "," + fmt(u2) + ")", emp, target, kZ);
        r.replications = n;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

Checks galambos(const Ctx&) {
  Checks out;
  const std::vector<std::vector<double>> t2{{1.0, 1.0}, {0.5, 2.0}, {0.2, 0.7}, {3.0, 1.5}, {0.05, 10.0}};
  const std::vector<std::vector<double>> t3{{1.0, 1.0, 1.0}, {0.5, 2.0, 1.0}, {0.2, 0.7, 4.0}, {3.0, 1.5, 0.4},
                                            {0.05, 10.0, 2.0}};
  for (const double theta : {0.5, 1.0, 2.0}) {
    const auto kappa = RadonMeasure::galambos(theta);
    for (const auto* grid : {&t2, &t3}) {
      double worst = 0.0;
      for (const auto& t : *grid) {
        const auto q = reciprocal_archimedean_survival(kappa, t, ReciprocalMode::quadrature);
        const auto cf = reciprocal_archimedean_survival(kappa, t, ReciprocalMode::closed_form);
        worst = std::max(worst, std::abs(q.value - cf.value));
      }
      out.push_back(bound_check("theta=" + fmt(theta) + " d=" + std::to_string((*grid)[0].size()) +
                                    " max |quadrature - closed form|",
                                worst, kQuadratureTol));
    }
  }
  const std::vector<double> ones{1.0, 1.0};
  const double exact = reciprocal_archimedean_survival(RadonMeasure::galambos(1.0), ones, ReciprocalMode::closed_form).value;
  out.push_back(bound_check("theta=1 t=(1,1) closed form vs exp(-3/2)", std::abs(exact - std::exp(-1.5)), 0.0));
  return out;
}

Checks min_stable(const Ctx& c) {
  const auto model = strong_idt_model(RadonMeasure::lebesgue(), {{1.0, DistFn::frechet_unit()}});
  const std::size_t n = 50000, d = 2, parts = 4;
  const double t_hi = 12.0, step = 2.5e-4;
  const auto opt = threaded(c);
  const auto single = definetti_sample(model, d, n, 0.0, t_hi, step, c.sub(4, 0), opt);
  std::vector<double> rescaled(n * d, kInf);
  for (std::size_t k = 0; k < parts; ++k) {
    const auto b = definetti_sample(model, d, n, 0.0, t_hi, step, c.sub(4, 1 + static_cast<int>(k)), opt);
    for (std::size_t i = 0; i < n * d; ++i) rescaled[i] = std::min(rescaled[i], b.data()[i]);
  }
  for (double& x : rescaled) x *= static_cast<double>(parts);
  const SampleBatch min_batch(n, d, std::move(rescaled), BatchMeta{});
  Checks out;
  for (std::size_t j = 0; j < d; ++j) {
    const auto a = single.column(j);
    const auto b = min_batch.column(j);
    out.push_back(ks_check("margin " + std::to_string(j + 1) + " KS(4 * min of 4 batches, single)", a, b,
                           kKsLevel / static_cast<double>(d)));
  }
  return out;
}

Checks divisibility(const Ctx& c) {
  SamplingConfig cfg;
  cfg.d = 2;
  cfg.n = 20000;
  cfg.t_lo = 0.0;
  cfg.t_hi = 8.0;
  cfg.grid_step = 1e-3;
  cfg.seed = c.sub(5, 0);
  cfg.threads = c.threads;
  const auto model = levy_model(BernsteinSpec::gamma(2.0, 1.0));
  auto honest = divisibility_check(model, 4, 1.0, cfg, false, kKsLevel);
  const auto adversarial = divisibility_check(model, 4, 1.0, cfg, true, kKsLevel);
  Checks out;
  out.push_back(std::move(honest));
  out.back().name = "gamma(2,1) n_split=4";
  out.push_back(flag_check("adversarial full-model min detected", adversarial.status == CheckStatus::fail,
                           "adversarial status " + to_string(adversarial.status) + ": " + adversarial.detail));
  return out;
}

Checks exchangeability(const Ctx& c) {
  const std::vector<std::vector<double>> probes{{0.3, 0.9, 1.7}};
  const std::size_t n = 50000;
  const auto opt = threaded(c);
  const auto mo = definetti_sample(levy_model(BernsteinSpec::gamma(1.0, 1.0)), 3, n, 0.0, 2.0, 1e-3, c.sub(6, 0), opt);
  const auto dir = definetti_sample(dirichlet_model(1.0, DistFn::unit_exponential()), 3, n, 0.0, 12.0, 1e-2,
                                    c.sub(6, 1), opt);
  Checks out;
  out.push_back(exchangeability_check(mo, probes, kExchangeLevel, 5, c.sub(6, 2)));
  out.back().name = "Marshall-Olkin gamma(1,1)";
  out.push_back(exchangeability_check(dir, probes, kExchangeLevel, 5, c.sub(6, 3)));
  out.back().name = "Dirichlet(1, unit exponential)";
  const auto sorted = exchangeability_check(sorted_rows(mo), probes, kExchangeLevel, 5, c.sub(6, 4));
  out.push_back(flag_check("sorted rows rejected", sorted.status == CheckStatus::fail,
                           "sorted status " + to_string(sorted.status) + ": " + sorted.detail));
  return out;
}

Checks tail_dependence_criterion(const Ctx& c) {
  const std::size_t n = 100000, d = 4;
  const double threshold = std::log(100.0);
  const auto dir = definetti_sample(dirichlet_model(1.0, DistFn::unit_exponential()), d, n, 0.0, 12.0, 1e-2,
                                    c.sub(7, 0), threaded(c));
  Checks out;
  out.push_back(taildep_monotonicity_check(dir, d, threshold, kTaildepLevel));
  out.back().name = "Dirichlet monotone ratios up to d'=4";

  std::size_t cond = 0, both = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dir.at(i, 1) > threshold) {
      ++cond;
      if (dir.at(i, 0) > threshold) ++both;
    }
  }
  const double rho = cond ? static_cast<double>(both) / static_cast<double>(cond) : 0.0;
  std::ostringstream os;
  os << "rho_2=" << rho << " from " << cond << " exceedances";
  out.push_back(flag_check("Dirichlet rho_2 in (0.02, 0.98)", cond >= kRhoMinExceedances && rho > kRhoLow && rho < kRhoHigh,
                           os.str()));
  out.back().statistic = rho;
  out.back().replications = cond;

  const std::vector<double> probes{1.0, 2.0, 5.0, 10.0, 20.0};
  const auto td = tail_dependence(ExponentMixture::drift_only(DriftFn::linear(1.0)), 2, probes);
  out.push_back(flag_check("drift-only rho decreasing", td.trend == Trend::decreasing, "trend " + to_string(td.trend)));
  out.push_back(bound_check("drift-only rho at largest probe", td.estimate, kDriftRhoLimit));
  return out;
}

Checks truncation(const Ctx& c) {
  const auto model = levy_model(BernsteinSpec::gamma(1.0, 1.0));
  const std::vector<double> eps{0.5, 0.1, 0.02};
  const std::vector<std::vector<double>> t{{0.5, 0.5}};
  McConfig cfg{200000, 0.0, 2.0, 1e-2, c.sub(8, 0), c.threads};
  auto r = truncation_convergence_check(model, 1.0, eps, t, cfg, kTruncationLevel);
  r.name = "gamma(1,1) s=1 eps=0.5,0.1,0.02";
  return {r};
}

Checks time_change(const Ctx& c) {
  const auto psi = BernsteinSpec::gamma(1.0, 1.0);
  const auto model = levy_model(psi);
  const std::size_t n = 50000, d = 2;
  const auto opt = threaded(c);
  const auto base = definetti_sample(model, d, n, 0.0, 6.0, 1e-3, c.sub(9, 0), opt);
  const auto doubled = transform_margins(base, MonotoneMap::affine(2.0, 0.0));
  const auto changed = definetti_sample(time_changed_model(model, MonotoneMap::affine(0.5, 0.0)), d, n, 0.0, 12.0,
                                        2e-3, c.sub(9, 1), opt);
  Checks out;
  for (std::size_t j = 0; j < d; ++j) {
    const auto a = doubled.column(j);
    const auto b = changed.column(j);
    out.push_back(ks_check("margin " + std::to_string(j + 1) + " KS(2X, time-changed)", a, b,
                           kKsLevel / static_cast<double>(d)));
  }
  const auto ceil = transform_margins(base, MonotoneMap::ceiling());
  const double rate = eval_bernstein(psi, 1.0);
  for (int k = 1; k <= 3; ++k) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += ceil.at(i, 0) > k ? 1 : 0;
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    auto r = point_check("P(ceil X > " + std::to_string(k) + ")", Estimate{p, binomial_std_error(p, static_cast<double>(n))},
                         std::exp(-rate * k), kZ);
    r.replications = n;
    out.push_back(std::move(r));
  }
  return out;
}

Checks poisson_min(const Ctx& c) {
  const double rate = 1.0;
  const std::size_t n = 200000, d = 3;
  const RowSampler unit_exp = [](RngStream& rng, std::span<double> row) {
    for (double& x : row) x = rng.exponential();
  };
  const auto batch = poisson_min_sample(rate, unit_exp, d, n, c.sub(10, 0), c.threads);
  std::size_t all_inf = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = batch.row(i);
    all_inf += std::all_of(r.begin(), r.end(), [](double x) { return x == kInf; }) ? 1 : 0;
  }
  const double p = static_cast<double>(all_inf) / static_cast<double>(n);
  Checks out;
  out.push_back(point_check("all +inf frequency", Estimate{p, binomial_std_error(p, static_cast<double>(n))}, std::exp(-rate), kZ));
  const ExponentMixture gamma(DriftFn::zero(), std::vector<WeightedDist>{{rate, DistFn::unit_exponential()}});
  const std::vector<std::vector<double>> grid{{0.2, 0.5, 1.0}, {0.5, 0.5, 0.5}, {1.0, 2.0, 0.3}};
  for (const auto& t : grid) {
    const double target = std::exp(-exponent_mass(gamma, t).value);
    auto r = point_check("survival at (" + fmt(t[0]) + "," + fmt(t[1]) + "," + fmt(t[2]) + ")",
                         mc_survival_estimate(batch, t), target, kZ);
    r.replications = n;
    out.push_back(std::move(r));
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Checks determinism(const Ctx& c) {
  if (c.cli_path.empty() || !std::filesystem::exists(c.cli_path))
    return {flag_check("sample executable available", false, "no executable at \"" + c.cli_path + "\"")};
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("minid_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto spec = dir / "mo.json";
  {
    std::ofstream out(spec);
    out << R"({"model":{"type":"levy_subordinator","psi":{"family":"gamma","shape":1.0,"rate":1.0}},)"
        << R"("window":[0,4],"grid_step":0.001,"seed":)" << c.sub(11, 0) << "}\n";
  }
  const auto run = [&](unsigned threads, const fs::path& out) {
    const std::string cmd = "MINID_THREADS=" + std::to_string(threads) + " '" + c.cli_path + "' sample --model '" +
                            spec.string() + "' --dim 3 --n 20000 --out '" + out.string() + "' >/dev/null 2>>'" +
                            (dir / "stderr.log").string() + "'";
    return std::system(cmd.c_str());
  };
  const auto a = dir / "threads1.csv";
  const auto b = dir / "threads4.csv";
  const int ra = run(1, a);
  const int rb = run(4, b);
  Checks out;
  out.push_back(flag_check("both runs exit 0", ra == 0 && rb == 0,
                           "exit statuses " + std::to_string(ra) + " and " + std::to_string(rb)));
  const auto ba = read_file(a);
  const auto bb = read_file(b);
  out.push_back(flag_check("CSV bytes identical (MINID_THREADS 1 vs 4)", !ba.empty() && ba == bb,
                           std::to_string(ba.size()) + " vs " + std::to_string(bb.size()) + " bytes"));
  std::error_code ec;
  fs::remove_all(dir, ec);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget;
  Checks (*run)(const Ctx&);
};

constexpr Criterion kCriteria[] = {
    {1, "consistency triangle (Marshall-Olkin)", 60.0, consistency_triangle},
    {2, "Archimedean / Gumbel copula", 60.0, gumbel_copula},
    {3, "Galambos quadrature vs closed form", 5.0, galambos},
    {4, "min-stability of StrongIdt", 120.0, min_stable},
    {5, "infinite divisibility", 60.0, divisibility},
    {6, "exchangeability", 60.0, exchangeability},
    {7, "tail dependence", 120.0, tail_dependence_criterion},
    {8, "truncation convergence", 120.0, truncation},
    {9, "time-change equivalence", 60.0, time_change},
    {10, "finite exponent measure", 30.0, poisson_min},
    {11, "determinism across thread counts", 30.0, determinism},
};

}  // namespace

std::string CriterionResult::summary_line() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs / %.0fs", seconds, budget_seconds);
  std::string line = passed() ? "PASS" : (status == CheckStatus::fail ? "FAIL" : "INCONCLUSIVE");
  line += "  criterion " + std::to_string(id) + ": " + name + "  (" + buf + ")";
  for (const auto& c : checks) {
    if (!c.passed()) line += "\n      " + to_string(c.status) + ": " + c.name + " statistic=" + format_double(c.statistic) +
                             " target=" + format_double(c.target) + " tolerance=" + format_double(c.tolerance) +
                             (c.detail.empty() ? "" : " [" + c.detail + "]");
  }
  return line;
}

std::string CriterionResult::to_json() const {
  nlohmann::json j = {{"criterion", id},        {"name", name},
                      {"status", to_string(status)}, {"pass", passed()},
                      {"seconds", seconds},     {"budget_seconds", budget_seconds}};
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& c : checks) parts.push_back(nlohmann::json::parse(c.to_json()));
  j["checks"] = parts;
  return j.dump();
}

std::vector<CriterionResult> run_core_suite(const SuiteOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  const Ctx ctx{options.seed, std::max(1u, options.threads), options.cli_path};
  std::vector<CriterionResult> results;
  for (const auto& c : kCriteria) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), c.id) == options.only.end())
      continue;
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    r.budget_seconds = c.budget;
    const auto start = std::chrono::steady_clock::now();
    try {
      r.checks = c.run(ctx);
    } catch (const std::exception& e) {
      r.checks.push_back(flag_check("criterion ran to completion", false, e.what()));
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& chk : r.checks)
      if (chk.seed == 0) chk.seed = ctx.sub(c.id, 0);
    r.checks.push_back(bound_check("runtime seconds", r.seconds, c.budget));
    const bool any_fail = std::any_of(r.checks.begin(), r.checks.end(),
                                      [](const CheckReport& x) { return x.status == CheckStatus::fail; });
    const bool all_pass = std::all_of(r.checks.begin(), r.checks.end(), [](const CheckReport& x) { return x.passed(); });
    r.status = any_fail ? CheckStatus::fail : (all_pass ? CheckStatus::pass : CheckStatus::inconclusive);
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace minid::cli
