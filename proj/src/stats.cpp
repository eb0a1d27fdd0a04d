#include "minid/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "minid/errors.hpp"

namespace minid {

MeanError sample_mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += v;
  double mean = s / n;
  double corr = 0.0, ss = 0.0;
  for (double v : x) {
    corr += v - mean;
    ss += (v - mean) * (v - mean);
  }
  mean += corr / n;
  if (x.size() < 2) return {mean, 0.0};
  const double var = std::max(0.0, (ss - corr * corr / n) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

double binomial_std_error(double p, double n) {
  if (!(n > 0.0)) throw DomainError("binomial standard error needs n > 0");
  return std::sqrt(std::clamp(p, 0.0, 1.0) * (1.0 - std::clamp(p, 0.0, 1.0)) / n);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace minid
