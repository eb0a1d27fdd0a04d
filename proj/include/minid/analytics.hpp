#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "minid/bernstein.hpp"
#include "minid/distfn.hpp"
#include "minid/mixture.hpp"
#include "minid/model.hpp"
#include "minid/radon.hpp"

namespace minid {

// value with an absolute error: quadrature error for numeric results, the
// Monte Carlo standard error for sampled ones, 0 for closed forms.
struct Estimate {
  double value;
  double error;
};

// Subset enumerations are exact and therefore limited to this dimension.
inline constexpr std::size_t kMaxSubsetDim = 20;

// exp(-sum_i t_(i) (psi(d - i + 1) - psi(d - i))) with t sorted ascending.
double survival_mo(const BernsteinSpec& psi, std::span<const double> t);

// exp(-E[max_i t_i / Z_i]) for Z_i i.i.d. from z_law. Closed form for point
// masses and (scaled) unit Frechet laws, Monte Carlo otherwise.
Estimate survival_minstable(const DistFn& z_law, std::span<const double> t, std::size_t mc_n = 100000,
                            std::uint64_t seed = 1);

// psi_gen(sum_i psi_gen^-1(u_i)) with psi_gen = exp(-g), g the Bernstein
// function of the frailty.
double archimedean_copula(const BernsteinSpec& g, std::span<const double> u);

enum class ReciprocalMode { quadrature, closed_form };
// Survival of the reciprocal Archimedean family driven by kappa; the closed
// form uses phi = Laplace transform of kappa.
Estimate reciprocal_archimedean_survival(const RadonMeasure& kappa, std::span<const double> t, ReciprocalMode mode);
double reciprocal_archimedean_copula(const RadonMeasure& kappa, std::span<const double> u);

// mu_d(([t, inf])^c) = sum_i b(t_i) + int (1 - prod_i (1 - G(t_i))) gamma(dG).
// Entries may be -inf (no constraint on that coordinate).
Estimate exponent_mass(const ExponentMixture& m, std::span<const double> t);

enum class Trend { increasing, decreasing, flat, mixed };
std::string to_string(Trend t);

struct TailDependence {
  std::vector<double> probes;
  // mu_{d'}([-inf, t] x (t, inf]^{d'-1}) at each probe
  std::vector<double> masses;
  std::vector<double> rho;  // exp(-mass)
  double estimate;          // rho at the largest probe
  Trend trend;
};

TailDependence tail_dependence(const ExponentMixture& m, std::size_t d_prime, std::span<const double> probes);

struct McConfig {
  std::size_t n = 100000;
  double t_lo = 0.0;
  double t_hi = 1.0;
  double grid_step = 0.01;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// Mean of exp(-sum_i H_{t_i}) over sampled paths.
Estimate mc_survival_from_model(const ModelPtr& model, std::span<const double> t, const McConfig& cfg);

}  // namespace minid
