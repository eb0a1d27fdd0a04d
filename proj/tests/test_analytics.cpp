#include <doctest.h>

#include <cmath>
#include <numbers>

#include "minid/analytics.hpp"
#include "minid/batch.hpp"
#include "minid/errors.hpp"
#include "test_support.hpp"

using namespace minid;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
void for_each_permutation(std::vector<double> v, F f) {
  std::sort(v.begin(), v.end());
  do f(v);
  while (std::next_permutation(v.begin(), v.end()));
}
}  // namespace

TEST_CASE("survival_mo") {
  const std::vector<double> t{0.3, 1.2, 0.7};
  CHECK(survival_mo(BernsteinSpec::drift(1.0), t) == doctest::Approx(std::exp(-2.2)).epsilon(1e-14));
  const std::vector<double> ones{1.0, 1.0};
  CHECK(survival_mo(BernsteinSpec::stable(0.5), ones) == doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-14));
  const std::vector<double> single{1.7};
  const auto g = BernsteinSpec::gamma(2.0, 3.0);
  CHECK(survival_mo(g, single) == doctest::Approx(std::exp(-1.7 * eval_bernstein(g, 1.0))).epsilon(1e-14));
  CHECK(survival_mo(BernsteinSpec::gamma(1.0, 1.0), ones) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const std::vector<double> neg{-0.1, 1.0};
  CHECK_THROWS_AS(survival_mo(g, neg), DomainError);
  const double base = survival_mo(g, t);
  for_each_permutation(t, [&](const std::vector<double>& p) { CHECK(survival_mo(g, p) == base); });
}

TEST_CASE("survival_minstable") {
  const std::vector<double> t{0.4, 1.3, 0.9};
  CHECK(survival_minstable(DistFn::point_mass(1.0), t).value == doctest::Approx(std::exp(-1.3)));
  const std::vector<double> one{0.8};
  CHECK(survival_minstable(DistFn::frechet_unit(), one).value == doctest::Approx(std::exp(-0.8)));
  const std::vector<double> pair{1.0, 1.0};
  const double closed = survival_minstable(DistFn::frechet_unit(), pair).value;
  CHECK(closed == doctest::Approx(std::exp(-1.5)).epsilon(1e-14));

  // brute-force 2-d midpoint rule for E max(1/Z1, 1/Z2), Z = -1 / log U
  const int m = 2000;
  double e = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) e += std::max(-std::log((i + 0.5) / m), -std::log((j + 0.5) / m));
  e /= static_cast<double>(m) * m;
  CHECK(std::exp(-e) == doctest::Approx(closed).epsilon(2e-3));

  // same law through a wrapper that forces the Monte Carlo route
  const auto wrapped = DistFn::scaled(DistFn::scaled(DistFn::frechet_unit(), 2.0), 0.5);
  const auto mc = survival_minstable(wrapped, pair, 200000, 3);
  CHECK(mc.error > 0.0);
  CHECK(std::abs(mc.value - closed) < 3.0 * mc.error);

  CHECK_THROWS_AS(survival_minstable(DistFn::point_mass(0.0), pair), DomainError);
}

TEST_CASE("archimedean_copula") {
  const std::vector<double> u{0.3, 0.7};
  CHECK(archimedean_copula(BernsteinSpec::drift(1.0), u) == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(archimedean_copula(BernsteinSpec::stable(1.0), u) == doctest::Approx(0.21).epsilon(1e-14));
  const double alpha = 0.6;
  const std::vector<double> diag{0.4, 0.4, 0.4};
  CHECK(archimedean_copula(BernsteinSpec::stable(alpha), diag) ==
        doctest::Approx(std::pow(0.4, std::pow(3.0, alpha))).epsilon(1e-12));
  const std::vector<double> zero{0.5, 0.0};
  CHECK(archimedean_copula(BernsteinSpec::stable(alpha), zero) == 0.0);
  const std::vector<double> bad{0.5, 1.2};
  CHECK_THROWS_AS(archimedean_copula(BernsteinSpec::stable(alpha), bad), DomainError);

  const std::vector<BernsteinSpec> gens{BernsteinSpec::stable(0.3), BernsteinSpec::gamma(1.0, 2.0),
                                        BernsteinSpec::sum({BernsteinSpec::drift(1.0), BernsteinSpec::gamma(2.0, 1.0)})};
  for (const auto& g : gens) {
    for (double a : {0.2, 0.5, 0.8})
      for (double b : {0.2, 0.5, 0.8})
        for (double c : {0.1, 0.9}) {
          const std::vector<double> v{a, b, c};
          const double val = archimedean_copula(g, v);
          CHECK(val >= a * b * c * (1.0 - 1e-12));
          CHECK(val <= std::min({a, b, c}) * (1.0 + 1e-12));
          for_each_permutation(v, [&](const std::vector<double>& p) {
            CHECK(archimedean_copula(g, p) == doctest::Approx(val).epsilon(1e-13));
          });
        }
    const std::vector<double> margin{0.37, 1.0};
    CHECK(archimedean_copula(g, margin) == doctest::Approx(0.37).epsilon(1e-12));
  }
}

TEST_CASE("reciprocal Archimedean survival: closed form and quadrature") {
  const std::vector<double> one{0.8};
  const auto gal1 = RadonMeasure::galambos(1.0);
  CHECK(reciprocal_archimedean_survival(gal1, one, ReciprocalMode::closed_form).value ==
        doctest::Approx(std::exp(-0.8)).epsilon(1e-14));
  CHECK(reciprocal_archimedean_survival(gal1, one, ReciprocalMode::quadrature).value ==
        doctest::Approx(std::exp(-0.8)).epsilon(1e-9));
  const std::vector<double> pair{1.0, 1.0};
  CHECK(reciprocal_archimedean_survival(gal1, pair, ReciprocalMode::closed_form).value == std::exp(-1.5));

  const std::vector<std::vector<double>> grid2{{0.5, 0.5}, {1.0, 2.0}, {0.3, 1.7}, {2.5, 0.8}, {4.0, 4.0}};
  const std::vector<std::vector<double>> grid3{
      {0.5, 0.5, 0.5}, {1.0, 2.0, 0.7}, {0.3, 1.7, 1.1}, {2.5, 0.8, 1.9}, {4.0, 4.0, 3.0}};
  for (double theta : {0.5, 1.0, 2.0}) {
    const auto k = RadonMeasure::galambos(theta);
    for (const auto* grid : {&grid2, &grid3})
      for (const auto& t : *grid) {
        const double a = reciprocal_archimedean_survival(k, t, ReciprocalMode::closed_form).value;
        const double b = reciprocal_archimedean_survival(k, t, ReciprocalMode::quadrature).value;
        CHECK(std::abs(a - b) < 1e-8);
      }
  }
  // a threshold shrinking to 0 drops its coordinate: phi(inf) = kappa({0}) = 0
  for (double theta : {0.5, 2.0}) {
    const auto k = RadonMeasure::galambos(theta);
    const std::vector<double> tiny{1e-12, 1.3};
    const std::vector<double> rest{1.3};
    CHECK(reciprocal_archimedean_survival(k, tiny, ReciprocalMode::closed_form).value ==
          doctest::Approx(reciprocal_archimedean_survival(k, rest, ReciprocalMode::closed_form).value).epsilon(1e-5));
  }
  const std::vector<double> nonpos{0.0, 1.0};
  CHECK_THROWS_AS(reciprocal_archimedean_survival(gal1, nonpos, ReciprocalMode::quadrature), DomainError);
}

TEST_CASE("reciprocal Archimedean copula") {
  const double theta = 1.7;
  const auto k = RadonMeasure::galambos(theta);
  const std::vector<double> one{0.42};
  CHECK(reciprocal_archimedean_copula(k, one) == 0.42);
  for (double u : {0.01, 0.3, 0.77}) {
    const std::vector<double> v{u, 1.0, 1.0, 1.0};
    CHECK(reciprocal_archimedean_copula(k, v) == u);
  }
  const double u = 0.3, v = 0.6;
  const double want =
      u * v * std::exp(std::pow(std::pow(-std::log(u), -theta) + std::pow(-std::log(v), -theta), -1.0 / theta));
  const std::vector<double> uv{u, v};
  CHECK(reciprocal_archimedean_copula(k, uv) == doctest::Approx(want).epsilon(1e-12));
  // composed with the margins exp(-phi(1 / t)) it reproduces the survival
  const std::vector<double> t{0.7, 1.4, 2.2};
  std::vector<double> marg;
  for (double x : t) marg.push_back(std::exp(-k.laplace(1.0 / x)));
  CHECK(reciprocal_archimedean_copula(k, marg) ==
        doctest::Approx(reciprocal_archimedean_survival(k, t, ReciprocalMode::closed_form).value).epsilon(1e-12));
  const std::vector<double> zero{0.0, 0.5};
  CHECK(reciprocal_archimedean_copula(k, zero) == 0.0);
  for (double a : {0.2, 0.5, 0.8})
    for (double b : {0.2, 0.5, 0.8}) {
      const std::vector<double> ab{a, b};
      CHECK(reciprocal_archimedean_copula(k, ab) >= a * b);
    }
}

TEST_CASE("exponent_mass") {
  const std::vector<double> t{0.5, 1.5};
  CHECK(exponent_mass(ExponentMixture::drift_only(DriftFn::linear(2.0)), t).value == doctest::Approx(4.0));
  const auto g = DistFn::unit_exponential();
  const ExponentMixture finite(DriftFn::zero(), std::vector<WeightedDist>{{1.5, g}});
  const std::vector<double> t1{0.7};
  CHECK(exponent_mass(finite, t1).value == doctest::Approx(1.5 * g(0.7)));
  const ExponentMixture galambos(DriftFn::zero(),
                                 ProductForm{RadonMeasure::galambos(1.0), {{1.0, DistFn::frechet_unit()}}});
  const std::vector<double> ones{1.0, 1.0};
  CHECK(std::abs(exponent_mass(galambos, ones).value - 1.5) < 1e-8);
  const ExponentMixture sub(DriftFn::zero(), SubordinatorForm{DriftFn::linear(1.0), BernsteinSpec::gamma(1.0, 1.0)});
  const std::vector<double> t3{0.3, 0.9, 1.7};
  CHECK(std::exp(-exponent_mass(sub, t3).value) ==
        doctest::Approx(survival_mo(BernsteinSpec::gamma(1.0, 1.0), t3)).epsilon(1e-14));
  const std::vector<double> with_neg_inf{-kInf, 0.9};
  const std::vector<double> just{0.9};
  CHECK(exponent_mass(sub, with_neg_inf).value == exponent_mass(sub, just).value);
}

TEST_CASE("tail rectangle identity matches brute-force inclusion-exclusion") {
  const std::vector<ExponentMixture> mixtures{
      ExponentMixture(DriftFn::linear(0.3), std::vector<WeightedDist>{{0.7, DistFn::unit_exponential()},
                                                                     {1.9, DistFn::exponential(0.4)},
                                                                     {0.2, DistFn::point_mass(1.2)}}),
      ExponentMixture(DriftFn::zero(),
                      std::vector<WeightedDist>{{2.5, DistFn::empirical({{0.5, 0.2}, {1.0, 0.6}, {3.0, 0.9}})}}),
      ExponentMixture(DriftFn::zero(), ProductForm{RadonMeasure::galambos(0.7), {{1.0, DistFn::frechet_unit()}}}),
      ExponentMixture(DriftFn::linear(0.5),
                      SubordinatorForm{DriftFn::linear(1.0), BernsteinSpec::gamma(1.0, 2.0).with_kill_rate(0.1)}),
  };
  const std::vector<double> probes{0.4, 1.1, 2.5};
  for (const auto& m : mixtures) {
    for (std::size_t dp = 2; dp <= 4; ++dp) {
      const auto td = tail_dependence(m, dp, probes);
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const std::vector<double> all(dp, probes[i]);
        std::vector<double> rest(dp, probes[i]);
        rest[0] = -kInf;
        const double brute = exponent_mass(m, all).value - exponent_mass(m, rest).value;
        CHECK(td.masses[i] == doctest::Approx(brute).epsilon(1e-8).scale(1.0));
      }
    }
  }
}

TEST_CASE("tail_dependence examples") {
  const std::vector<double> probes{1.0, 2.0, 5.0, 10.0, 20.0};
  const auto indep = tail_dependence(ExponentMixture::drift_only(DriftFn::linear(1.0)), 2, probes);
  CHECK(indep.trend == Trend::decreasing);
  CHECK(indep.estimate < 1e-8);
  const ExponentMixture minstable(DriftFn::zero(),
                                  ProductForm{RadonMeasure::lebesgue(), {{1.0, DistFn::frechet_unit()}}});
  const auto ms = tail_dependence(minstable, 2, probes);
  CHECK(ms.trend == Trend::decreasing);
  CHECK(ms.estimate < 1e-3);
  const ExponentMixture sub(DriftFn::zero(), SubordinatorForm{DriftFn::linear(1.0), BernsteinSpec::stable(0.5)});
  for (std::size_t dp = 2; dp < 6; ++dp)
    CHECK(tail_dependence(sub, dp, probes).estimate <= tail_dependence(sub, dp + 1, probes).estimate + 1e-12);
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(tail_dependence(sub, 2, two), DomainError);
  CHECK_THROWS_AS(tail_dependence(sub, 1, probes), DomainError);
}

TEST_CASE("mc_survival_from_model") {
  McConfig cfg;
  cfg.n = 20000;
  cfg.t_hi = 3.0;
  const std::vector<double> ones{1.0, 1.0};
  const auto drift = mc_survival_from_model(drift_model(DriftFn::linear(1.0)), ones, cfg);
  CHECK(drift.value == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(drift.error == 0.0);
  const auto como = mc_survival_from_model(comonotone_model(DistFn::unit_exponential()), ones, cfg);
  CHECK(std::abs(como.value - std::exp(-1.0)) < 3.0 * como.error);
  const auto mo = mc_survival_from_model(levy_model(BernsteinSpec::gamma(1.0, 1.0)), ones, cfg);
  CHECK(std::abs(mo.value - 1.0 / 3.0) < 3.0 * mo.error);
  const std::vector<double> outside{4.0};
  CHECK_THROWS_AS(mc_survival_from_model(drift_model(DriftFn::linear(1.0)), outside, cfg), DomainError);
}

TEST_CASE("consistency between sampled paths and exponent masses") {
  McConfig cfg;
  cfg.n = 20000;
  cfg.t_hi = 3.0;
  cfg.grid_step = 0.01;
  const std::vector<ModelPtr> models{
      levy_model(BernsteinSpec::sum({BernsteinSpec::gamma(1.0, 1.0), BernsteinSpec::drift(0.2)})),
      levy_model(BernsteinSpec::cp_exponential(1.0, 2.0).with_kill_rate(0.2)),
      additive_model(DriftFn::table({0.0, 1.0, 3.0}, {0.0, 0.5, 2.0}, false), BernsteinSpec::stable(0.5)),
      strong_idt_model(RadonMeasure::galambos(1.5), {{1.0, DistFn::frechet_unit()}}),
      frailty_model(0.1, BernsteinSpec::stable(0.6)),
      compound_poisson_model(1.2, {{1.0, DriftFn::table({0.5, 1.5}, {0.3, 2.0}, true)},
                                   {2.0, DriftFn::linear(0.4), 2.5}}),
      comonotone_model(DistFn::exponential(0.7)),
      sum_model({drift_model(DriftFn::linear(0.3)), levy_model(BernsteinSpec::gamma(2.0, 3.0))}),
  };
  const std::vector<std::vector<double>> ts{{0.4, 1.1}, {0.9, 0.2, 2.6}};
  for (const auto& m : models) {
    CAPTURE(m->type_name());
    const auto mix = mixture_from_model(*m);
    for (const auto& t : ts) {
      const auto mc = mc_survival_from_model(m, t, cfg);
      const auto em = exponent_mass(mix, t);
      const double want = std::exp(-em.value);
      CHECK(std::abs(mc.value - want) < 3.0 * mc.error + em.error + 1e-9);
    }
  }
}

TEST_CASE("Dirichlet tail dependence is strictly between 0 and 1") {
  const auto b = definetti_sample(dirichlet_model(1.0, DistFn::unit_exponential(), 1000), 2, 20000, 0.0, 40.0, 0.01, 5);
  // threshold with marginal exceedance about 0.05
  auto col = b.column(0);
  std::sort(col.begin(), col.end());
  const double t = col[static_cast<std::size_t>(0.95 * col.size())];
  double both = 0.0, second = 0.0;
  for (std::size_t i = 0; i < b.n(); ++i) {
    second += b.at(i, 1) > t ? 1.0 : 0.0;
    both += (b.at(i, 0) > t && b.at(i, 1) > t) ? 1.0 : 0.0;
  }
  CHECK(second >= 200.0);
  const double rho = both / second;
  CHECK(rho > 0.02);
  CHECK(rho < 0.98);
}
