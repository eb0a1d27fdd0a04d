#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "minid/bernstein.hpp"
#include "minid/distfn.hpp"
#include "minid/drift.hpp"
#include "minid/errors.hpp"
#include "minid/mixture.hpp"
#include "minid/quadrature.hpp"
#include "minid/radon.hpp"
#include "minid/rng.hpp"

using namespace minid;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// composite Simpson rule, used as an independent oracle for smooth integrands
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

struct MeanSe {
  double mean;
  double se;
};

template <class F>
MeanSe mc_mean(F draw, int n) {
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  return {m, std::sqrt(std::max(0.0, s2 / n - m * m) / n)};
}

std::vector<BernsteinSpec> invertible_specs() {
  return {BernsteinSpec::gamma(1.0, 1.0),       BernsteinSpec::gamma(0.3, 5.0),
          BernsteinSpec::stable(0.5),           BernsteinSpec::stable(0.7, 2.0),
          BernsteinSpec::drift(1.5),            BernsteinSpec::cp_exponential(2.0, 0.5),
          BernsteinSpec::sum({BernsteinSpec::gamma(2.0, 1.0), BernsteinSpec::drift(0.1)}),
          BernsteinSpec::sum({BernsteinSpec::stable(0.4), BernsteinSpec::cp_exponential(1.0, 3.0)})};
}

}  // namespace

TEST_CASE("bernstein evaluation examples") {
  CHECK(eval_bernstein(BernsteinSpec::stable(0.5), 4.0) == Approx(2.0).epsilon(1e-15));
  for (const auto& s : invertible_specs()) CHECK(eval_bernstein(s, 0.0) == 0.0);
  CHECK(eval_bernstein(BernsteinSpec::gamma(1.0, 1.0), 1.0) == Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(eval_bernstein(BernsteinSpec::gamma(1.0, 1.0), -1.0), DomainError);
}

TEST_CASE("gamma Laplace exponent agrees with Monte Carlo of E exp(-a G)") {
  RngStream rng(2024, 1);
  const auto est = mc_mean([&] { return std::exp(-rng.gamma(1.0, 1.0)); }, 1000000);
  CHECK(std::abs(est.mean - 0.5) <= 3.0 * est.se);
  const double psi_mc = -std::log(est.mean);
  CHECK(std::abs(psi_mc - eval_bernstein(BernsteinSpec::gamma(1.0, 1.0), 1.0)) <= 3.0 * est.se / est.mean);
}

TEST_CASE("kill rate and sums") {
  const auto g = BernsteinSpec::gamma(2.0, 3.0);
  const auto k = g.with_kill_rate(0.5);
  CHECK(eval_bernstein(k, 0.0) == 0.0);
  CHECK(eval_bernstein(k, 1e-9) == Approx(eval_bernstein(g, 1e-9) + 0.5));
  CHECK(eval_bernstein(k, 2.0) == Approx(eval_bernstein(g, 2.0) + 0.5));
  const auto s = BernsteinSpec::sum({g, BernsteinSpec::stable(0.5), BernsteinSpec::drift(2.0)});
  for (double a : {0.1, 1.0, 7.0})
    CHECK(eval_bernstein(s, a) == Approx(eval_bernstein(g, a) + std::sqrt(a) + 2.0 * a));
  CHECK(s.drift_rate() == 2.0);
  CHECK(BernsteinSpec::stable(1.0, 3.0).drift_rate() == 3.0);
  CHECK(BernsteinSpec::stable(1.0, 3.0).is_drift_only());
}

TEST_CASE("bernstein functions are monotone and concave on a grid") {
  for (auto s : invertible_specs()) {
    for (const double c : {0.0, 0.7}) {
      const auto spec = s.with_kill_rate(c);
      const double h = 0.05;
      double prev = eval_bernstein(spec, 0.0);
      double prev_diff = kInf;
      for (int i = 1; i < 400; ++i) {
        const double v = eval_bernstein(spec, i * h);
        CHECK(v >= prev);
        if (i >= 2) {
          const double diff = v - prev;
          CHECK(diff <= prev_diff * (1 + 1e-12) + 1e-14);
          prev_diff = diff;
        } else {
          prev_diff = kInf;
        }
        prev = v;
      }
    }
  }
}

TEST_CASE("derivative matches finite differences") {
  for (const auto& s : invertible_specs()) {
    for (double a : {0.3, 1.0, 4.0}) {
      const double h = 1e-6 * a;
      const double fd = (eval_bernstein(s, a + h) - eval_bernstein(s, a - h)) / (2 * h);
      CHECK(eval_bernstein_derivative(s, a) == Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("bernstein inversion examples and errors") {
  CHECK(invert_bernstein(BernsteinSpec::stable(0.5), 2.0) == Approx(4.0).epsilon(1e-15));
  CHECK(invert_bernstein(BernsteinSpec::gamma(1.0, 1.0), 0.0) == 0.0);
  CHECK(invert_bernstein(BernsteinSpec::gamma(1.0, 1.0), std::log(2.0)) == Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(invert_bernstein(BernsteinSpec::cp_exponential(2.0, 1.0), 2.5), RangeError);
  CHECK_THROWS_AS(invert_bernstein(BernsteinSpec::gamma(1.0, 1.0).with_kill_rate(1.0), 1.0), UnsupportedError);
  CHECK_THROWS_AS(invert_bernstein(BernsteinSpec::drift(0.0), 1.0), UnsupportedError);
  CHECK_THROWS_AS(invert_bernstein(BernsteinSpec::gamma(1.0, 1.0), -1.0), DomainError);
}

TEST_CASE("inversion round trip on a log-spaced grid") {
  for (const auto& s : invertible_specs()) {
    for (int k = 0; k <= 48; ++k) {
      const double a = std::pow(10.0, -6.0 + 12.0 * k / 48.0);
      const double y = eval_bernstein(s, a);
      if (!(y < s.supremum())) continue;
      // cp_exponential saturates numerically for very large a
      if (s.family() == BernsteinSpec::Family::cp_exponential && a > 1e5) continue;
      const double back = invert_bernstein(s, y);
      CHECK(std::abs(back - a) <= 1e-10 * a);
      CHECK(std::abs(eval_bernstein(s, back) - y) <= 1e-12 * std::max(1.0, y));
    }
  }
}

TEST_CASE("levy tail masses against quadrature") {
  const double eps = 0.1;
  const auto g = BernsteinSpec::gamma(2.0, 1.5);
  const double oracle = simpson([](double u) {
    // x = eps + u / (1 - u)
    if (u >= 1.0) return 0.0;
    const double x = 0.1 + u / (1 - u);
    return 2.0 * std::exp(-1.5 * x) / x / ((1 - u) * (1 - u));
  }, 0.0, 1.0, 200000);
  CHECK(g.levy_tail_mass(eps) == Approx(oracle).epsilon(1e-8));
  const auto st = BernsteinSpec::stable(0.5, 2.0);
  // density scale * alpha / Gamma(1 - alpha) x^(-1 - alpha)
  const double st_oracle = 2.0 * 0.5 / std::tgamma(0.5) * std::pow(eps, -0.5) / 0.5;
  CHECK(st.levy_tail_mass(eps) == Approx(st_oracle));
  CHECK(BernsteinSpec::cp_exponential(3.0, 2.0).levy_tail_mass(0.0) == 3.0);
  CHECK(BernsteinSpec::cp_exponential(3.0, 2.0).levy_tail_mass(0.5) == Approx(3.0 * std::exp(-1.0)));
}

TEST_CASE("jumps above a threshold follow the restricted Levy measure") {
  RngStream rng(11, 0);
  const double eps = 0.05;
  const auto g = BernsteinSpec::gamma(1.0, 2.0);
  // conditional mean: int x nu(dx) / nu((eps, inf)) = exp(-theta eps) / theta / E1(theta eps)
  const double target = std::exp(-2.0 * eps) / 2.0 / exponential_integral_e1(2.0 * eps);
  const auto est = mc_mean([&] { return g.sample_jump_above(eps, rng); }, 200000);
  CHECK(std::abs(est.mean - target) <= 3.0 * est.se);
  const auto st = BernsteinSpec::stable(0.5);
  int above = 0;
  for (int i = 0; i < 100000; ++i) above += st.sample_jump_above(0.1, rng) > 0.4;
  // Pareto tail: P(J > 0.4 | J > 0.1) = (0.4 / 0.1)^(-1/2)
  const double p = above / 1e5;
  CHECK(std::abs(p - 0.5) <= 3.0 * std::sqrt(0.25 / 1e5));
}

TEST_CASE("subordinator increments have the right Laplace transform") {
  RngStream rng(5, 5);
  for (const auto& s : {BernsteinSpec::gamma(1.0, 1.0), BernsteinSpec::stable(0.6),
                        BernsteinSpec::cp_exponential(2.0, 1.0), BernsteinSpec::drift(0.3)}) {
    const double dt = 0.7;
    const auto est = mc_mean([&] { return std::exp(-s.sample_increment(dt, rng)); }, 200000);
    const double target = std::exp(-dt * eval_bernstein(s, 1.0));
    CHECK(std::abs(est.mean - target) <= 3.0 * est.se + 1e-10);
  }
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(1, 2), b(1, 2), c(1, 3);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  RngStream d(1, 2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += d() == c();
  CHECK(same == 0);
  const auto s1 = RngStream(9, 9).substream(4);
  const auto s2 = RngStream(9, 9).substream(4);
  CHECK(RngStream(s1)() == RngStream(s2)());
  RngStream u(3, 3);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    CHECK((x > 0.0 && x < 1.0));
  }
}

TEST_CASE("variate helpers") {
  RngStream rng(77, 1);
  const auto st = mc_mean([&] { return std::exp(-rng.positive_stable(0.4)); }, 200000);
  CHECK(std::abs(st.mean - std::exp(-1.0)) <= 3.0 * st.se);
  const auto be = mc_mean([&] { return rng.beta(2.0, 3.0); }, 100000);
  CHECK(std::abs(be.mean - 0.4) <= 3.0 * be.se);
  // tiny shapes stay finite in log space and the beta stays in [0, 1]
  for (int i = 0; i < 1000; ++i) {
    const double b = rng.beta(1e-3, 1e-3);
    CHECK((b >= 0.0 && b <= 1.0));
    CHECK(std::isfinite(rng.log_gamma(1e-3)));
  }
  const auto bs = mc_mean([&] { return rng.beta(1e-3, 3e-3); }, 100000);
  CHECK(std::abs(bs.mean - 0.25) <= 3.0 * bs.se);
  const auto po = mc_mean([&] { return static_cast<double>(rng.poisson(2.5)); }, 100000);
  CHECK(std::abs(po.mean - 2.5) <= 3.0 * po.se);
}

TEST_CASE("distribution function examples") {
  CHECK(DistFn::frechet_unit()(1.0) == Approx(std::exp(-1.0)));
  CHECK(DistFn::point_mass(kInf)(123.0) == 0.0);
  CHECK(DistFn::scaled(DistFn::frechet_unit(), 2.0)(2.0) == Approx(std::exp(-1.0)));
  CHECK(DistFn::unit_exponential().quantile(1.0 - std::exp(-1.0)) == Approx(1.0).epsilon(1e-14));
  const auto defective = DistFn::exponential(1.0).with_defect(0.3);
  CHECK(defective.quantile(0.71) == kInf);
  CHECK(defective(kInf) == 1.0);
  CHECK(defective(1e9) == Approx(0.7));
  const auto emp = DistFn::empirical({{1.0, 0.5}, {3.0, 1.0}});
  CHECK(emp.quantile(0.6) == 3.0);
  CHECK(emp(2.0) == 0.5);
  CHECK(emp.left_limit(3.0) == 0.5);
  CHECK(DistFn::point_mass(kInf).is_zero());
  CHECK_FALSE(DistFn::point_mass(1.0).is_zero());
  CHECK(DistFn::empirical({{1.0, 0.0}}).is_zero());
}

TEST_CASE("quantile is a generalized inverse") {
  const std::vector<DistFn> laws{DistFn::exponential(2.0),
                                 DistFn::frechet_unit(),
                                 DistFn::unit_exponential().with_defect(0.2),
                                 DistFn::point_mass(0.5),
                                 DistFn::scaled(DistFn::frechet_unit(), 3.0),
                                 DistFn::empirical({{-1.0, 0.1}, {0.0, 0.4}, {2.0, 0.9}}),
                                 DistFn::path_transform(DriftFn::linear(1.0), 2.0)};
  for (const auto& g : laws) {
    for (int k = 1; k < 100; ++k) {
      const double p = k / 100.0;
      const double q = g.quantile(p);
      if (std::isfinite(q)) CHECK(g(q) >= p);
      const double t = -2.0 + 0.05 * k;
      const double gt = g(t);
      if (gt > 0.0 && g.left_limit(t) == gt) CHECK(g.quantile(gt) <= t);
    }
  }
}

TEST_CASE("drift tables") {
  const auto step = DriftFn::table({0.0, 1.0, 2.0}, {1.0, 1.0, 3.0}, true);
  CHECK(step(-0.1) == 0.0);
  CHECK(step(0.0) == 1.0);
  CHECK(step(1.5) == 1.0);
  CHECK(step(2.0) == 3.0);
  CHECK(step(10.0) == 3.0);
  CHECK(step.inverse(2.0) == 2.0);
  CHECK(step.inverse(4.0) == kInf);
  const auto lin = DriftFn::table({0.0, 2.0}, {0.0, 4.0}, false);
  CHECK(lin(1.0) == 2.0);
  CHECK(lin.inverse(3.0) == 1.5);
  CHECK(DriftFn::linear(2.0).inverse(1.0) == 0.5);
  CHECK(DriftFn::linear(2.0)(-3.0) == 0.0);
  CHECK_THROWS_AS(DriftFn::table({0.0, 0.0}, {1.0, 2.0}, true), DomainError);
  CHECK_THROWS_AS(DriftFn::table({0.0, 1.0}, {2.0, 1.0}, true), DomainError);
}

TEST_CASE("monotone maps and left inverses") {
  const auto f = MonotoneMap::affine(2.0, 1.0);
  const auto g = f.left_inverse();
  for (double x : {-3.0, 0.0, 2.5}) CHECK(g(f(x)) == Approx(x));
  CHECK(MonotoneMap::ceiling().left_inverse()(2.5) == 2.0);
  CHECK(MonotoneMap::ceiling()(kInf) == kInf);
  CHECK_THROWS_AS(MonotoneMap::table({0.0, 1.0}, {1.0, 0.0}), DomainError);
  const auto t = MonotoneMap::table({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0});
  CHECK(t.left_inverse()(2.5) == Approx(1.5));
}

TEST_CASE("quadrature on the half line") {
  CHECK(integrate_half_line([](double x) { return std::exp(-x); }).value == Approx(1.0).epsilon(1e-12));
  CHECK(integrate_half_line([](double x) { return 1.0 / (1.0 + x * x); }).value ==
        Approx(std::numbers::pi / 2).epsilon(1e-12));
  CHECK(integrate_interval([](double x) { return x * x; }, 0.0, 3.0).value == Approx(9.0).epsilon(1e-14));
}

TEST_CASE("radon measures") {
  for (double theta : {0.5, 1.0, 2.0}) {
    const auto k = RadonMeasure::galambos(theta);
    for (double t : {0.3, 1.0, 4.0}) {
      CHECK(k.laplace(t) == Approx(std::pow(t, -1.0 / theta)).epsilon(1e-13));
      CHECK(k.laplace_inverse(k.laplace(t)) == Approx(t).epsilon(1e-12));
      CHECK(k.cumulative_inverse(k.cumulative(t)) == Approx(t).epsilon(1e-12));
      const auto q = k.integrate([t](double s) { return std::exp(-s * t); });
      CHECK(q.value == Approx(std::pow(t, -1.0 / theta)).epsilon(1e-9));
    }
  }
  const RadonMeasure mixed(1.0, 1.0, {{0.5, 2.0}});
  CHECK(mixed.cumulative(0.5) == Approx(2.5));
  CHECK(mixed.cumulative_left(0.5) == Approx(0.5));
  CHECK(mixed.cumulative_inverse(1.0) == 0.5);
  CHECK(mixed.cumulative_inverse(3.0) == Approx(1.0));
  const RadonMeasure atoms(0.0, 1.0, {{1.0, 1.0}, {2.0, 0.5}});
  CHECK(atoms.cumulative_inverse(1.2) == 2.0);
  CHECK(atoms.cumulative_inverse(2.0) == kInf);
  CHECK(atoms.laplace_inverse(atoms.laplace(0.7)) == Approx(0.7).epsilon(1e-10));
}

TEST_CASE("mixture validation") {
  const auto lin = ExponentMixture::drift_only(DriftFn::linear(1.0));
  const std::vector<double> probes{-1.0, 0.0, 1.0, 5.0};
  CHECK(validate_mixture(lin, probes).ok);

  const ExponentMixture zero(DriftFn::zero(), std::vector<WeightedDist>{{1.0, DistFn::point_mass(kInf)}});
  const auto rz = validate_mixture(zero, probes);
  CHECK_FALSE(rz.ok);
  REQUIRE(!rz.failures.empty());
  CHECK(rz.failures.front() == "zero atom");

  CHECK_FALSE(validate_mixture(lin, std::vector<double>{}).ok);

  // Galambos product form: independent Simpson oracle of int exp(-s / t) kappa(ds)
  for (double theta : {0.5, 1.0, 2.0}) {
    const ExponentMixture gal(DriftFn::zero(),
                              ProductForm{RadonMeasure::galambos(theta), {{1.0, DistFn::frechet_unit()}}});
    const std::vector<double> t_probe{0.5, 1.0, 2.0};
    const auto rep = validate_mixture(gal, t_probe);
    REQUIRE(rep.ok);
    const double c = 1.0 / (theta * std::tgamma(1.0 + 1.0 / theta));
    for (std::size_t i = 0; i < t_probe.size(); ++i) {
      const double t = t_probe[i];
      // substitute s = v^m with m = max(1, theta) so the integrand is smooth
      const double m = std::max(1.0, theta);
      const double oracle = simpson([&](double v) {
        const double s = std::pow(v, m);
        return std::exp(-s / t) * c * std::pow(v, m / theta - 1.0) * m;
      }, 0.0, std::pow(60.0 * t, 1.0 / m), 200000);
      CHECK(rep.probe_integrals[i] == Approx(oracle).epsilon(1e-8));
      CHECK(rep.probe_integrals[i] == Approx(std::pow(t, 1.0 / theta)).epsilon(1e-9));
    }
  }
}
