#include <doctest.h>

#include <cmath>

#include "minid/batch.hpp"
#include "minid/errors.hpp"
#include "minid/sampler.hpp"
#include "test_support.hpp"

using namespace minid;
using testsupport::binomial_se;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double joint_exceed(const SampleBatch& b, std::span<const double> t) {
  double hits = 0.0;
  for (std::size_t i = 0; i < b.n(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < b.d(); ++j) all = all && b.at(i, j) > t[j];
    hits += all ? 1.0 : 0.0;
  }
  return hits / static_cast<double>(b.n());
}
}  // namespace

TEST_CASE("invert_path_at_level examples on a step path") {
  auto g = make_uniform_grid(0.0, 3.0, 0.5);
  std::vector<double> v;
  for (double t : g->times) v.push_back(t >= 1.0 ? 2.0 : 0.0);
  const PathSkeleton p(g, v, {{1.0, 2.0}}, kInf, true, true);
  CHECK(invert_path_at_level(p, 1.0).time == 1.0);
  CHECK(std::isinf(invert_path_at_level(p, 3.0).time));
  CHECK_FALSE(invert_path_at_level(p, 3.0).censored);
}

TEST_CASE("drift model gives independent unit exponential margins") {
  const auto b = definetti_sample(drift_model(DriftFn::linear(1.0)), 2, 40000, 0.0, 30.0, 0.01, 3);
  const auto x = b.column(0), y = b.column(1);
  double s = 0.0;
  for (double v : x) s += v > 1.0 ? 1.0 : 0.0;
  const double p = s / x.size();
  CHECK(std::abs(p - std::exp(-1.0)) < 3.0 * binomial_se(p, x.size()));
  const auto mx = testsupport::mean_se(x), my = testsupport::mean_se(y);
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx.mean) * (y[i] - my.mean);
  cov /= x.size();
  // correlation estimate with standard error about 1 / sqrt(n)
  CHECK(std::abs(cov) < 3.0 / std::sqrt(static_cast<double>(x.size())) * 1.2);
}

TEST_CASE("comonotone rows are constant") {
  const auto b = definetti_sample(comonotone_model(DistFn::unit_exponential()), 4, 2000, 0.0, 40.0, 0.1, 9);
  for (std::size_t i = 0; i < b.n(); ++i)
    for (std::size_t j = 1; j < b.d(); ++j) CHECK(b.at(i, j) == b.at(i, 0));
}

TEST_CASE("gamma subordinator pair survival is 1/3") {
  const auto b = definetti_sample(levy_model(BernsteinSpec::gamma(1.0, 1.0)), 2, 40000, 0.0, 2.0, 0.001, 12);
  const double t[] = {1.0, 1.0};
  const double p = joint_exceed(b, t);
  CHECK(std::abs(p - 1.0 / 3.0) < 3.0 * binomial_se(1.0 / 3.0, b.n()));
}

TEST_CASE("batches do not depend on the thread count") {
  const auto m = levy_model(BernsteinSpec::sum({BernsteinSpec::gamma(1.0, 1.0), BernsteinSpec::cp_exponential(1, 2)}));
  SampleOptions one, four;
  four.threads = 4;
  const auto a = definetti_sample(m, 3, 500, 0.0, 3.0, 0.01, 77, one);
  const auto b = definetti_sample(m, 3, 500, 0.0, 3.0, 0.01, 77, four);
  CHECK(a.data() == b.data());
  CHECK(a.censored_mask() == b.censored_mask());
}

TEST_CASE("censoring at the window end") {
  const auto b = definetti_sample(drift_model(DriftFn::linear(1.0)), 1, 5000, 0.0, 1.0, 0.01, 1);
  std::size_t over = 0;
  for (std::size_t i = 0; i < b.n(); ++i) {
    if (b.censored(i, 0)) {
      CHECK(b.at(i, 0) == 1.0);
      ++over;
    }
  }
  CHECK(over == b.censored_count());
  CHECK(over > 0);
  // a capped path never censors
  const auto c = definetti_sample(comonotone_model(DistFn::point_mass(0.5)), 2, 100, 0.0, 1.0, 0.1, 1);
  CHECK(c.censored_count() == 0);
}

TEST_CASE("grid bias below one step for a Lipschitz drift") {
  // knots off the grid force grid-rounded inversion
  const auto b = DriftFn::table({0.0, 0.333, 5.0}, {0.0, 0.5, 12.0}, false);
  const double step = 0.05;
  const auto batch = definetti_sample(drift_model(b), 3, 2000, 0.0, 5.0, step, 4);
  for (std::size_t i = 0; i < batch.n(); ++i) {
    auto levels = RngStream::for_replicate(4, i).substream(2);
    for (std::size_t j = 0; j < batch.d(); ++j) {
      const double e = levels.exponential();
      if (batch.censored(i, j)) continue;
      const double exact = b.inverse(e);
      CHECK(batch.at(i, j) >= exact);
      CHECK(batch.at(i, j) - exact < step);
    }
  }
}

TEST_CASE("shared path mode") {
  SampleOptions opt;
  opt.share_path = true;
  const auto b = definetti_sample(comonotone_model(DistFn::unit_exponential()), 2, 100, 0.0, 40.0, 0.1, 5, opt);
  for (std::size_t i = 1; i < b.n(); ++i) CHECK(b.at(i, 0) == b.at(0, 0));
  CHECK(b.meta().shared_path);
}

TEST_CASE("min-stability of a strong idt batch") {
  const auto m = strong_idt_model(RadonMeasure::lebesgue(), {{1.0, DistFn::frechet_unit()}});
  const std::size_t n = 3000;
  const auto one = definetti_sample(m, 2, n, 0.0, 10.0, 1e-3, 100);
  std::vector<SampleBatch> parts;
  for (std::uint64_t k = 0; k < 4; ++k) parts.push_back(definetti_sample(m, 2, n, 0.0, 10.0, 1e-3, 200 + k));
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> scaled;
    for (std::size_t i = 0; i < n; ++i) {
      double mn = kInf;
      for (const auto& p : parts) mn = std::min(mn, p.at(i, j));
      scaled.push_back(4.0 * mn);
    }
    CHECK(testsupport::ks_pvalue(scaled, one.column(j)) > 0.01);
  }
}

TEST_CASE("poisson minimum sampler") {
  const RowSampler unit_exp = [](RngStream& r, std::span<double> row) {
    for (double& x : row) x = r.exponential();
  };
  SUBCASE("all +inf rows occur with probability exp(-c)") {
    const auto b = poisson_min_sample(1.0, unit_exp, 3, 40000, 2);
    double empty = 0.0;
    for (std::size_t i = 0; i < b.n(); ++i) empty += std::isinf(b.at(i, 0)) && std::isinf(b.at(i, 2)) ? 1.0 : 0.0;
    const double p = empty / b.n();
    CHECK(std::abs(p - std::exp(-1.0)) < 3.0 * binomial_se(std::exp(-1.0), b.n()));
  }
  SUBCASE("point-mass rows") {
    const RowSampler one = [](RngStream&, std::span<double> row) { std::fill(row.begin(), row.end(), 1.0); };
    const auto b = poisson_min_sample(20.0, one, 2, 200, 3);
    for (std::size_t i = 0; i < b.n(); ++i) CHECK((b.at(i, 0) == 1.0 || std::isinf(b.at(i, 0))));
  }
  SUBCASE("one margin: P(X > t) = exp(-c (1 - e^-t))") {
    const auto b = poisson_min_sample(1.0, unit_exp, 1, 40000, 4);
    for (double t : {0.2, 0.7, 1.5}) {
      const double want = std::exp(-(1.0 - std::exp(-t)));
      double s = 0.0;
      for (double x : b.column(0)) s += x > t ? 1.0 : 0.0;
      CHECK(std::abs(s / b.n() - want) < 3.0 * binomial_se(want, b.n()));
    }
  }
  CHECK_THROWS_AS(poisson_min_sample(0.0, unit_exp, 1, 1, 1), DomainError);
}

TEST_CASE("margin transforms") {
  const auto mo = definetti_sample(levy_model(BernsteinSpec::gamma(1.0, 1.0)), 2, 30000, 0.0, 8.0, 1e-3, 8);
  SUBCASE("identity") { CHECK(transform_margins(mo, MonotoneMap::identity()).data() == mo.data()); }
  SUBCASE("ceiling gives geometric margins") {
    const auto c = transform_margins(mo, MonotoneMap::ceiling());
    for (double x : c.data()) CHECK((std::isinf(x) || x == std::floor(x)));
    for (int k = 1; k <= 3; ++k) {
      const double want = std::exp(-std::log(2.0) * k);
      double s = 0.0;
      for (double x : c.column(0)) s += x > k ? 1.0 : 0.0;
      CHECK(std::abs(s / c.n() - want) < 3.0 * binomial_se(want, c.n()));
    }
    CHECK(c.meta().transforms.back() == "ceiling");
  }
  SUBCASE("doubling equals the time-changed model") {
    const auto inner = levy_model(BernsteinSpec::gamma(1.0, 1.0));
    const auto a = transform_margins(definetti_sample(inner, 2, 5000, 0.0, 6.0, 1e-3, 21), MonotoneMap::affine(2, 0));
    const auto tc = time_changed_model(inner, MonotoneMap::affine(0.5, 0.0));
    const auto b = definetti_sample(tc, 2, 5000, 0.0, 12.0, 2e-3, 22);
    for (std::size_t j = 0; j < 2; ++j) CHECK(testsupport::ks_pvalue(a.column(j), b.column(j)) > 0.01);
  }
  CHECK_THROWS_AS(MonotoneMap::table({0.0, 1.0}, {1.0, 0.0}), DomainError);
}

TEST_CASE("min to max reflection") {
  const auto b = definetti_sample(levy_model(BernsteinSpec::gamma(1.0, 1.0)), 2, 2000, 0.0, 5.0, 0.01, 1);
  const auto r = min_to_max(b);
  CHECK(r.meta().orientation == Orientation::max);
  CHECK(min_to_max(r).data() == b.data());
  for (double t : {0.3, 1.0, 2.0}) {
    std::size_t ecdf = 0, surv = 0;
    for (std::size_t i = 0; i < b.n(); ++i) {
      ecdf += r.at(i, 0) <= -t ? 1 : 0;
      surv += b.at(i, 0) >= t ? 1 : 0;
    }
    CHECK(ecdf == surv);
  }
  const auto como = min_to_max(definetti_sample(comonotone_model(DistFn::unit_exponential()), 3, 100, 0, 40, 0.1, 1));
  for (std::size_t i = 0; i < como.n(); ++i) CHECK((como.at(i, 1) == como.at(i, 0) && como.at(i, 2) == como.at(i, 0)));

  SUBCASE("reciprocal") {
    const auto pos = SampleBatch(2, 1, {0.5, kInf}, BatchMeta{});
    const auto rr = min_to_max(pos, Reflection::reciprocal);
    CHECK(rr.at(0, 0) == 2.0);
    CHECK(rr.at(1, 0) == 0.0);
    CHECK(min_to_max(rr, Reflection::reciprocal).data() == pos.data());
    CHECK_THROWS_AS(min_to_max(SampleBatch(1, 1, {0.0}, BatchMeta{}), Reflection::reciprocal), DomainError);
  }
}

TEST_CASE("empirical survival is permutation invariant on an exchangeable batch") {
  const auto b = definetti_sample(levy_model(BernsteinSpec::gamma(1.0, 1.0)), 3, 30000, 0.0, 3.0, 1e-3, 44);
  std::array<double, 3> t{0.3, 0.9, 1.7};
  const double base = joint_exceed(b, t);
  std::sort(t.begin(), t.end());
  do {
    const double p = joint_exceed(b, t);
    CHECK(std::abs(p - base) < 3.0 * std::sqrt(2.0) * binomial_se(base, b.n()));
  } while (std::next_permutation(t.begin(), t.end()));
}

TEST_CASE("batch validation") {
  CHECK_THROWS_AS(SampleBatch(1, 1, {-kInf}, BatchMeta{}), DomainError);
  CHECK_THROWS_AS(SampleBatch(2, 1, {1.0}, BatchMeta{}), DomainError);
  CHECK_THROWS_AS(definetti_sample(drift_model(DriftFn::linear(1)), 0, 1, 0, 1, 0.1, 1), DomainError);
}
