#include <doctest.h>

#include <cmath>
#include <random>

#include "minid/errors.hpp"
#include "minid/model.hpp"
#include "minid/sampler.hpp"
#include "test_support.hpp"

using namespace minid;
using testsupport::mean_se;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

PathSkeleton step_path(double jump_time, double size, double lo, double hi) {
  auto g = make_uniform_grid(lo, hi, 0.5);
  std::vector<double> v;
  for (double t : g->times) v.push_back(t >= jump_time ? size : 0.0);
  return PathSkeleton(g, v, {{jump_time, size}}, kInf, true, true);
}

bool non_decreasing(const PathSkeleton& p) {
  double prev = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double v = p.value(k);
    if (v < prev || v < 0.0) return false;
    prev = v;
  }
  return true;
}
}  // namespace

TEST_CASE("drift path equals b on the grid") {
  RngStream rng(1, 0);
  const auto p = sample_path(drift_model(DriftFn::linear(1.0)), 0.0, 2.0, 0.1, rng);
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(p.value(k) == doctest::Approx(p.grid()[k]).epsilon(1e-15));
  CHECK(std::isinf(p.kill_time()));
  CHECK(p.exact_inversion());
}

TEST_CASE("comonotone point mass kills at 1") {
  RngStream rng(1, 0);
  const auto p = sample_path(comonotone_model(DistFn::point_mass(1.0)), 0.0, 2.0, 0.25, rng);
  CHECK(p.kill_time() == 1.0);
  CHECK(p.value_at(0.99) == 0.0);
  CHECK(std::isinf(p.value_at(1.0)));
  CHECK(std::isinf(p.value_at(5.0)));
}

TEST_CASE("first passage examples") {
  const auto p = step_path(1.0, 2.0, 0.0, 3.0);
  CHECK(invert_path_at_level(p, 1.0).time == 1.0);
  CHECK(std::isinf(invert_path_at_level(p, 3.0).time));
  CHECK_THROWS_AS(invert_path_at_level(p, 0.0), DomainError);

  // grid-rounded upward on a path without exact inversion
  auto g = make_uniform_grid(0.0, 2.0, 0.1);
  std::vector<double> v(g->times.begin(), g->times.end());
  const PathSkeleton rounded(g, v, {}, kInf, false, false);
  CHECK(invert_path_at_level(rounded, 0.55).time == doctest::Approx(0.6));
  // the exact drift path solves inside the cell
  const PathSkeleton exact(g, v, {}, kInf, true, false);
  CHECK(invert_path_at_level(exact, 0.55).time == doctest::Approx(0.55));
  // censoring when the path may still grow
  const auto c = invert_path_at_level(rounded, 10.0);
  CHECK(c.censored);
  CHECK(c.time == 2.0);
}

TEST_CASE("strong idt with Lebesgue and Frechet: E exp(-H_t) = exp(-t)") {
  const auto model = strong_idt_model(RadonMeasure::lebesgue(), {{1.0, DistFn::frechet_unit()}});
  PathSampler sampler(model, make_grid({0.5, 1.0, 2.0}, 0.5));
  const int n = 20000;
  std::vector<std::vector<double>> e(3);
  for (int r = 0; r < n; ++r) {
    auto rng = RngStream::for_replicate(11, static_cast<std::uint64_t>(r));
    const auto p = sampler.sample(rng);
    for (std::size_t k = 0; k < 3; ++k) e[k].push_back(std::exp(-p.value_at(std::array{0.5, 1.0, 2.0}[k])));
  }
  const double ts[] = {0.5, 1.0, 2.0};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto m = mean_se(e[k]);
    CHECK(std::abs(m.mean - std::exp(-ts[k])) < 3.0 * m.se);
  }
}

TEST_CASE("strong idt terms") {
  const std::vector<WeightedDist> rho{{1.0, DistFn::unit_exponential()}};
  SUBCASE("Lebesgue arrivals are exactly partial sums") {
    RngStream a(5, 2), b(5, 2);
    const auto terms = sample_strong_idt_terms(RadonMeasure::lebesgue(), rho, 20, a);
    double s = 0.0;
    for (const auto& t : terms) {
      s += b.exponential();
      CHECK(t.scale == doctest::Approx(s).epsilon(1e-14));
      CHECK(t.rho_index == 0);
    }
    for (std::size_t k = 1; k < terms.size(); ++k) CHECK(terms[k].scale >= terms[k - 1].scale);
  }
  SUBCASE("doubled intensity halves the arrivals") {
    RngStream a(9, 0), b(9, 0);
    const auto one = sample_strong_idt_terms(RadonMeasure::lebesgue(), rho, 30, a);
    const auto two = sample_strong_idt_terms(RadonMeasure::lebesgue(2.0), rho, 30, b);
    for (std::size_t k = 0; k < one.size(); ++k) CHECK(two[k].scale == doctest::Approx(one[k].scale / 2.0));
  }
  SUBCASE("Galambos theta = 1: mean of S_1 is 1") {
    std::vector<double> s1;
    for (int r = 0; r < 20000; ++r) {
      auto rng = RngStream::for_replicate(3, static_cast<std::uint64_t>(r));
      s1.push_back(sample_strong_idt_terms(RadonMeasure::galambos(1.0), rho, 1, rng)[0].scale);
    }
    const auto m = mean_se(s1);
    CHECK(std::abs(m.mean - 1.0) < 3.0 * m.se);
  }
  SUBCASE("mixture indices follow the weights") {
    const std::vector<WeightedDist> two{{1.0, DistFn::unit_exponential()}, {3.0, DistFn::frechet_unit()}};
    RngStream rng(4, 4);
    const auto terms = sample_strong_idt_terms(RadonMeasure::lebesgue(), two, 40000, rng);
    double ones = 0.0;
    for (const auto& t : terms) ones += t.rho_index == 1 ? 1.0 : 0.0;
    const double p = ones / 40000.0;
    CHECK(std::abs(p - 0.75) < 3.0 * testsupport::binomial_se(0.75, 40000.0));
  }
  CHECK_THROWS_AS(sample_strong_idt_terms(RadonMeasure::lebesgue(), rho, 0, *std::make_unique<RngStream>(1, 1)),
                  DomainError);
}

TEST_CASE("integrate_path examples") {
  auto g = make_uniform_grid(0.0, 3.0, 0.25);
  const std::vector<double> ones(g->size(), 1.0);
  SUBCASE("v = 1, Lebesgue") {
    const PathSkeleton v(g, ones, {}, kInf, false, false);
    const auto h = integrate_path(v, RadonMeasure::lebesgue());
    for (std::size_t k = 0; k < h.size(); ++k) CHECK(h.value(k) == doctest::Approx(h.grid()[k]));
    CHECK(h.exact_inversion());
  }
  SUBCASE("v = 1{s >= 1}, Lebesgue") {
    std::vector<double> vals;
    for (double t : g->times) vals.push_back(t >= 1.0 ? 1.0 : 0.0);
    const PathSkeleton v(g, vals, {{1.0, 1.0}}, kInf, true, true);
    const auto h = integrate_path(v, RadonMeasure::lebesgue());
    for (std::size_t k = 0; k < h.size(); ++k) CHECK(h.value(k) == doctest::Approx(std::max(h.grid()[k] - 1.0, 0.0)));
  }
  SUBCASE("jump of 2 at 0.5, atom at 0.75") {
    std::vector<double> vals;
    for (double t : g->times) vals.push_back(t >= 0.5 ? 2.0 : 0.0);
    const PathSkeleton v(g, vals, {{0.5, 2.0}}, kInf, true, true);
    const auto h = integrate_path(v, RadonMeasure(0.0, 1.0, {{0.75, 1.0}}));
    for (std::size_t k = 0; k < h.size(); ++k) CHECK(h.value(k) == (h.grid()[k] >= 0.75 ? 2.0 : 0.0));
    CHECK(h.exact_inversion());
    CHECK(invert_path_at_level(h, 1.0).time == 0.75);
  }
  SUBCASE("jump between grid points is integrated exactly") {
    auto coarse = make_uniform_grid(0.0, 2.0, 1.0);
    const PathSkeleton v(coarse, {0.0, 1.0, 1.0}, {{0.3, 1.0}}, kInf, true, true);
    const auto h = integrate_path(v, RadonMeasure::lebesgue());
    CHECK(h.value(1) == doctest::Approx(0.7));
    CHECK(h.value(2) == doctest::Approx(1.7));
  }
  SUBCASE("negative integrand") {
    std::vector<double> vals(g->size(), 0.0);
    vals[0] = -1.0;
    // negative values never reach integrate_path: the skeleton rejects them
    CHECK_THROWS_AS(PathSkeleton(g, vals, {}, kInf, false, false), InvariantError);
  }
}

TEST_CASE("subordinate_path") {
  RngStream rng(21, 0);
  const auto inner = sample_path(levy_model(BernsteinSpec::gamma(1.0, 1.0)), 0.0, 3.0, 0.01, rng);
  SUBCASE("drift-only outer with unit rate is the identity") {
    const auto y = subordinate_path(BernsteinSpec::drift(1.0), inner, rng);
    for (std::size_t k = 0; k < y.size(); ++k) CHECK(y.value(k) == inner.value(k));
    CHECK(y.kill_time() == inner.kill_time());
  }
  SUBCASE("zero inner gives zero") {
    auto g = make_uniform_grid(0.0, 1.0, 0.1);
    const PathSkeleton zero(g, std::vector<double>(g->size(), 0.0), {}, kInf, true, true);
    const auto y = subordinate_path(BernsteinSpec::gamma(2.0, 1.0), zero, rng);
    for (std::size_t k = 0; k < y.size(); ++k) CHECK(y.value(k) == 0.0);
  }
  SUBCASE("non-monotone inner") {
    auto g = make_uniform_grid(0.0, 1.0, 0.5);
    CHECK_THROWS_AS(PathSkeleton(g, {0.0, 2.0, 1.0}, {}, kInf, false, false), InvariantError);
  }
  SUBCASE("gamma outer over a drift inner: P(X > t) = exp(-psi(1) t)") {
    const auto model = subordinated_model(BernsteinSpec::gamma(1.0, 1.0), drift_model(DriftFn::linear(1.0)));
    PathSampler sampler(model, make_uniform_grid(0.0, 2.0, 0.01));
    std::vector<double> hit;
    for (int r = 0; r < 20000; ++r) {
      auto s = RngStream::for_replicate(8, static_cast<std::uint64_t>(r));
      const auto p = sampler.sample(s);
      hit.push_back(invert_path_at_level(p, s.exponential()).time > 1.0 ? 1.0 : 0.0);
    }
    const auto m = mean_se(hit);
    CHECK(std::abs(m.mean - std::exp(-std::log(2.0))) < 3.0 * m.se);
  }
}

TEST_CASE("sum_paths") {
  RngStream rng(2, 2);
  const auto h = sample_path(levy_model(BernsteinSpec::gamma(1.0, 1.0)), 0.0, 2.0, 0.1, rng);
  const PathSkeleton zero(h.grid_ptr(), std::vector<double>(h.size(), 0.0), {}, kInf, true, true);
  const std::vector<PathSkeleton> two{h, zero};
  const auto s = sum_paths(two);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(s.value(k) == h.value(k));

  const auto a = sample_path(comonotone_model(DistFn::point_mass(1.0)), 0.0, 3.0, 0.5, rng);
  const auto b = sample_path(comonotone_model(DistFn::point_mass(2.0)), 0.0, 3.0, 0.5, rng);
  const std::vector<PathSkeleton> ab{a, b};
  CHECK(sum_paths(ab).kill_time() == 1.0);
  CHECK_THROWS_AS(sum_paths(std::span<const PathSkeleton>{}), DomainError);

  SUBCASE("n gamma(beta/n) paths sum to gamma(beta) at t = 1") {
    const int n = 4;
    const auto piece = levy_model(BernsteinSpec::gamma(2.0 / n, 1.5));
    std::vector<double> summed, direct;
    std::mt19937_64 ref(77);
    std::gamma_distribution<double> oracle(2.0, 1.0 / 1.5);
    PathSampler sampler(piece, make_uniform_grid(0.0, 1.0, 0.25));
    for (int r = 0; r < 4000; ++r) {
      auto st = RngStream::for_replicate(31, static_cast<std::uint64_t>(r));
      std::vector<PathSkeleton> parts;
      for (int i = 0; i < n; ++i) parts.push_back(sampler.sample(st));
      summed.push_back(sum_paths(parts).value_at(1.0));
      direct.push_back(oracle(ref));
    }
    CHECK(testsupport::ks_pvalue(summed, direct) > 0.01);
  }
}

TEST_CASE("jump to infinity probability") {
  const auto killed = levy_model(BernsteinSpec::gamma(1.0, 1.0).with_kill_rate(0.7));
  CHECK(jump_to_infinity_prob(*killed, 2.0) == doctest::Approx(1.0 - std::exp(-1.4)));
  CHECK(jump_to_infinity_prob(*levy_model(BernsteinSpec::gamma(1.0, 1.0)), 2.0) == 0.0);
  CHECK(jump_to_infinity_prob(*comonotone_model(DistFn::unit_exponential()), 1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)));
  SUBCASE("sampled kill frequency") {
    PathSampler sampler(killed, make_uniform_grid(0.0, 2.0, 0.5));
    std::vector<double> dead;
    for (int r = 0; r < 20000; ++r) {
      auto st = RngStream::for_replicate(5, static_cast<std::uint64_t>(r));
      dead.push_back(std::isinf(sampler.sample(st).value_at(2.0)) ? 1.0 : 0.0);
    }
    const auto m = mean_se(dead);
    CHECK(std::abs(m.mean - (1.0 - std::exp(-1.4))) < 3.0 * m.se);
  }
}

TEST_CASE("truncation") {
  const auto gamma = levy_model(BernsteinSpec::gamma(1.0, 1.0));
  SUBCASE("eps = inf leaves nothing") {
    RngStream rng(1, 1);
    const auto p = sample_path(truncate_levy(gamma, 1.0, kInf), 0.0, 2.0, 0.1, rng);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(p.value(k) == 0.0);
  }
  SUBCASE("eps = 0 keeps the law up to s") {
    PathSampler trunc(truncate_levy(gamma, 1.0, 0.0), make_uniform_grid(0.0, 1.0, 0.5));
    PathSampler full(gamma, make_uniform_grid(0.0, 1.0, 0.5));
    std::vector<double> a, b;
    for (int r = 0; r < 3000; ++r) {
      auto s1 = RngStream::for_replicate(1, static_cast<std::uint64_t>(r));
      auto s2 = RngStream::for_replicate(2, static_cast<std::uint64_t>(r));
      a.push_back(trunc.sample(s1).value_at(1.0));
      b.push_back(full.sample(s2).value_at(1.0));
    }
    CHECK(testsupport::ks_pvalue(a, b) > 0.01);
  }
  SUBCASE("survival is ordered in eps") {
    const double t = 0.8;
    std::vector<double> surv;
    for (double eps : {0.5, 0.1, 0.01}) {
      PathSampler s(truncate_levy(gamma, 1.0, eps), make_uniform_grid(0.0, 1.0, 0.1));
      double hits = 0.0;
      const int n = 20000;
      for (int r = 0; r < n; ++r) {
        auto st = RngStream::for_replicate(13, static_cast<std::uint64_t>(r));
        hits += invert_path_at_level(s.sample(st), st.exponential()).time > t ? 1.0 : 0.0;
      }
      surv.push_back(hits / n);
    }
    const double exact = std::exp(-t * std::log(2.0));
    for (std::size_t i = 0; i < surv.size(); ++i) {
      const double se = testsupport::binomial_se(surv[i], 20000.0);
      CHECK(surv[i] >= exact - 3.0 * se);
      if (i > 0) CHECK(surv[i] <= surv[i - 1] + 3.0 * se);
    }
    CHECK(std::abs(surv.back() - exact) < 0.02);
  }
  SUBCASE("truncated strong idt keeps large terms only") {
    const auto m = strong_idt_model(RadonMeasure::lebesgue(), {{1.0, DistFn::frechet_unit()}});
    RngStream rng(6, 0);
    const auto p = sample_path(truncate_levy(m, 1.0, 0.05), 0.0, 1.0, 0.1, rng);
    CHECK(non_decreasing(p));
    CHECK_THROWS_AS(truncate_levy(drift_model(DriftFn::linear(1.0)), 1.0, 0.1), UnsupportedError);
  }
}

TEST_CASE("dirichlet path jumps to infinity at the last location") {
  RngStream rng(3, 3);
  const auto p = sample_path(dirichlet_model(1.0, DistFn::unit_exponential(), 200), 0.0, 50.0, 0.5, rng);
  CHECK(std::isfinite(p.kill_time()));
  CHECK(non_decreasing(p));
  CHECK(p.value(0) == 0.0);
  CHECK(std::isinf(p.value_at(p.kill_time())));
}

TEST_CASE("time change") {
  const auto inner = levy_model(BernsteinSpec::gamma(1.0, 1.0));
  SUBCASE("affine map scales time") {
    RngStream a(4, 0), b(4, 0);
    const auto base = sample_path(inner, make_grid({0.0, 1.0, 2.0, 4.0}, 1.0), a);
    const auto tc = sample_path(time_changed_model(inner, MonotoneMap::affine(2.0, 0.0)),
                                make_grid({0.0, 0.5, 1.0, 2.0}, 0.5), b);
    for (std::size_t k = 0; k < tc.size(); ++k) CHECK(tc.value(k) == base.value(k));
  }
  SUBCASE("floor map is a step path") {
    RngStream rng(4, 1);
    const auto p = sample_path(time_changed_model(drift_model(DriftFn::linear(1.0)), MonotoneMap::floor()), 0.0,
                               3.0, 0.25, rng);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(p.value(k) == std::floor(p.grid()[k]));
    CHECK(invert_path_at_level(p, 1.5).time == 2.0);
  }
  SUBCASE("ceiling is rejected") {
    RngStream rng(4, 2);
    CHECK_THROWS_AS(sample_path(time_changed_model(inner, MonotoneMap::ceiling()), 0.0, 1.0, 0.5, rng), DomainError);
  }
}

TEST_CASE("monotone paths across families and seeds") {
  const std::vector<ModelPtr> models{
      drift_model(DriftFn::table({0.5, 1.0}, {0.2, 1.0}, true)),
      levy_model(BernsteinSpec::sum({BernsteinSpec::gamma(1.0, 2.0), BernsteinSpec::drift(0.5)})),
      levy_model(BernsteinSpec::stable(0.5).with_kill_rate(0.2)),
      levy_model(BernsteinSpec::cp_exponential(2.0, 1.0)),
      additive_model(DriftFn::table({0.0, 1.0, 2.0}, {0.0, 2.0, 2.5}, false), BernsteinSpec::gamma(1.0, 1.0)),
      strong_idt_model(RadonMeasure::galambos(0.5), {{1.0, DistFn::unit_exponential()}}, 200),
      frailty_model(0.1, BernsteinSpec::gamma(2.0, 2.0)),
      dirichlet_model(2.0, DistFn::unit_exponential(), 100),
      compound_poisson_model(1.5, {{1.0, DriftFn::table({0.3}, {1.0}, true)},
                                   {2.0, DriftFn::linear(0.5), 1.5}}),
      comonotone_model(DistFn::unit_exponential()),
      sum_model({drift_model(DriftFn::linear(1.0)), comonotone_model(DistFn::unit_exponential())}),
      subordinated_model(BernsteinSpec::gamma(1.0, 1.0), levy_model(BernsteinSpec::cp_exponential(1.0, 1.0))),
      integrated_model(levy_model(BernsteinSpec::cp_exponential(1.0, 1.0)), RadonMeasure::lebesgue()),
      time_changed_model(levy_model(BernsteinSpec::gamma(1.0, 1.0)), MonotoneMap::affine(0.5, 0.1)),
  };
  for (const auto& m : models) {
    CAPTURE(m->type_name());
    PathSampler sampler(m, make_uniform_grid(-0.5, 3.0, 0.05));
    bool ok = true, starts_at_drift = true;
    for (int seed = 0; seed < 1000; ++seed) {
      auto rng = RngStream::for_replicate(static_cast<std::uint64_t>(seed), 0);
      const auto p = sampler.sample(rng);
      ok = ok && non_decreasing(p);
      starts_at_drift = starts_at_drift && p.value(0) == 0.0;
    }
    CHECK(ok);
    CHECK(starts_at_drift);
  }
}

TEST_CASE("sampling is reproducible") {
  const auto m = levy_model(BernsteinSpec::gamma(1.0, 1.0));
  PathSampler sampler(m, make_uniform_grid(0.0, 1.0, 0.01));
  auto a = RngStream::for_replicate(5, 7), b = RngStream::for_replicate(5, 7);
  const auto pa = sampler.sample(a), pb = sampler.sample(b);
  for (std::size_t k = 0; k < pa.size(); ++k) CHECK(pa.value(k) == pb.value(k));
}

TEST_CASE("lazy gamma bridge matches gamma increments") {
  PathSampler sampler(levy_model(BernsteinSpec::gamma(1.0, 1.0)), make_uniform_grid(0.0, 2.0, 0.01));
  std::vector<double> half, inc;
  std::mt19937_64 ref(3);
  std::gamma_distribution<double> g1(1.0, 1.0);
  std::vector<double> o1, o2;
  for (int r = 0; r < 4000; ++r) {
    auto st = RngStream::for_replicate(17, static_cast<std::uint64_t>(r));
    const auto p = sampler.sample(st);
    half.push_back(p.value_at(0.37));
    inc.push_back(p.value_at(1.5) - p.value_at(0.5));
    o1.push_back(std::gamma_distribution<double>(0.37, 1.0)(ref));
    o2.push_back(g1(ref));
  }
  CHECK(testsupport::ks_pvalue(half, o1) > 0.01);
  CHECK(testsupport::ks_pvalue(inc, o2) > 0.01);
}
