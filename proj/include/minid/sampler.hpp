#pragma once

#include <memory>
#include <span>
#include <vector>

#include "minid/model.hpp"
#include "minid/path.hpp"
#include "minid/rng.hpp"

namespace minid {

// A model prepared for repeated sampling on a fixed grid. Preparation does
// the per-window work (series cut-offs, refined grids) once; sample() is
// const and may be called concurrently with distinct streams.
class PathSampler {
 public:
  class Plan;

  PathSampler(const ModelPtr& model, GridPtr grid);
  ~PathSampler();
  PathSampler(PathSampler&&) noexcept;
  PathSampler& operator=(PathSampler&&) noexcept;

  PathSkeleton sample(RngStream& rng) const;
  const GridPtr& grid() const noexcept { return grid_; }

 private:
  GridPtr grid_;
  std::unique_ptr<Plan> plan_;
};

PathSkeleton sample_path(const ModelPtr& model, double t_lo, double t_hi, double grid_step, RngStream& rng);
PathSkeleton sample_path(const ModelPtr& model, GridPtr grid, RngStream& rng);

struct StrongIdtTerm {
  double scale;           // S_k
  std::size_t rho_index;  // G_k = rho[rho_index].dist
};

// First `count` points S_1 <= S_2 <= ... of a Poisson process with intensity
// kappa, each marked with an independent draw from rho.
std::vector<StrongIdtTerm> sample_strong_idt_terms(const RadonMeasure& kappa, std::span<const WeightedDist> rho,
                                                   std::size_t count, RngStream& rng);

// H(t) = int_[0, t] v(s) kappa(ds), v taken right-continuous and piecewise
// constant between its grid points and listed jumps.
PathSkeleton integrate_path(const PathSkeleton& v, const RadonMeasure& kappa);

// Y(t_k) = L(H(t_k)) with L an independent subordinator with exponent outer.
PathSkeleton subordinate_path(const BernsteinSpec& outer, const PathSkeleton& inner, RngStream& rng);

// Pointwise sum; grids that differ are merged and the summands read off by
// right-continuous step interpolation.
PathSkeleton sum_paths(std::span<const PathSkeleton> paths);

}  // namespace minid
