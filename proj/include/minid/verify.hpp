#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "minid/analytics.hpp"
#include "minid/batch.hpp"
#include "minid/model.hpp"

namespace minid {

enum class CheckStatus { pass, fail, inconclusive };
std::string to_string(CheckStatus s);

// One check outcome. For two-sided checks pass <=> |statistic - target| <=
// tolerance; one-sided checks compare statistic - target <= tolerance.
struct CheckReport {
  std::string name;
  double statistic = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::inconclusive;
  bool one_sided = false;
  double std_error = 0.0;  // NaN when not applicable
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::string detail;
  std::vector<CheckReport> parts;

  bool passed() const noexcept { return status == CheckStatus::pass; }
  // Single-line JSON object.
  std::string to_json() const;
};

// Fraction of rows with x_j > t_j for all j (-inf entries impose nothing).
// Censored entries count at their stored value (the window end).
Estimate mc_survival_estimate(const SampleBatch& batch, std::span<const double> t);

struct KsResult {
  double statistic;
  double p_value;
};
// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Distance D with asymptotic p-value equal to `level` for samples of sizes
// na and nb.
double ks_critical_distance(double level, std::size_t na, std::size_t nb);

// Critical value in standard errors for m simultaneous two-sided comparisons
// at family level `level`, never below 3.
double bonferroni_z(double level, std::size_t m);

// |estimate - target| <= z * (estimate error) + slack.
CheckReport point_check(std::string name, Estimate estimate, double target, double z = 3.0, double slack = 0.0);

CheckReport exchangeability_check(const SampleBatch& batch, const std::vector<std::vector<double>>& probes,
                                  double level = 0.05, std::size_t permutations = 5, std::uint64_t seed = 1);

struct SamplingConfig {
  std::size_t d = 2;
  std::size_t n = 20000;
  double t_lo = 0.0;
  double t_hi = 10.0;
  double grid_step = 0.01;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// (a) min of n_split batches of the 1/n_split model vs one full batch, scaled
// KS per margin; (b) sum of n_split divided paths vs one full path at
// t_probe. With `adversarial` the full model replaces the divided one.
CheckReport divisibility_check(const ModelPtr& model, std::size_t n_split, double t_probe, const SamplingConfig& cfg,
                               bool adversarial = false, double level = 0.01);

// Ratios P(X_1 > t | X_2..X_d' > t) for d' = 2..d_max must not decrease
// beyond Monte Carlo error. Fewer than min_exceedances conditioning rows make
// the check inconclusive.
CheckReport taildep_monotonicity_check(const SampleBatch& batch, std::size_t d_max, double threshold,
                                       double level = 0.05, std::size_t min_exceedances = 100);

// Survival of truncate_levy(model, s, eps) over decreasing eps must dominate
// the eps = 0 truncation, which dominates (and for t <= s equals) the full
// model; the gap to the full model must shrink along eps.
CheckReport truncation_convergence_check(const ModelPtr& model, double s, std::span<const double> eps,
                                         const std::vector<std::vector<double>>& t_grid, const McConfig& cfg,
                                         double level = 0.05);

}  // namespace minid
