#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "minid/drift.hpp"
#include "minid/model.hpp"
#include "minid/rng.hpp"

namespace minid {

enum class Orientation { min, max };

struct BatchMeta {
  std::string model_digest;
  std::uint64_t seed = 0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double grid_step = 0.0;
  Orientation orientation = Orientation::min;
  bool shared_path = false;
  std::vector<std::string> transforms;
  std::vector<std::string> warnings;
  // Largest reported series tail bound over rows (0 when none).
  double tail_bound = 0.0;
};

// Row-major n x d sample of extended reals. Censored entries hold the value
// at which observation stopped (a lower bound for min orientation).
class SampleBatch {
 public:
  SampleBatch(std::size_t n, std::size_t d, std::vector<double> data, std::vector<std::uint8_t> censored,
              BatchMeta meta);
  SampleBatch(std::size_t n, std::size_t d, std::vector<double> data, BatchMeta meta);

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  double at(std::size_t i, std::size_t j) const { return data_[i * d_ + j]; }
  bool censored(std::size_t i, std::size_t j) const { return censored_[i * d_ + j] != 0; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }
  std::vector<double> column(std::size_t j) const;
  const std::vector<double>& data() const noexcept { return data_; }
  const std::vector<std::uint8_t>& censored_mask() const noexcept { return censored_; }
  std::size_t censored_count() const noexcept { return censored_count_; }
  const BatchMeta& meta() const noexcept { return meta_; }
  BatchMeta& meta() noexcept { return meta_; }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> data_;
  std::vector<std::uint8_t> censored_;
  std::size_t censored_count_ = 0;
  BatchMeta meta_;
};

struct SampleOptions {
  unsigned threads = 1;
  // One path shared by all rows: rows are then i.i.d. only given the path.
  bool share_path = false;
  std::string model_digest;
};

// Row i draws its path and its d unit-exponential levels from substreams of
// RngStream::for_replicate(seed, i), so the batch does not depend on the
// thread count.
SampleBatch definetti_sample(const ModelPtr& model, std::size_t d, std::size_t n, double t_lo, double t_hi,
                             double grid_step, std::uint64_t seed, const SampleOptions& options = {});

// Fills one exchangeable row of the given length.
using RowSampler = std::function<void(RngStream&, std::span<double>)>;

// Rows are componentwise minima of N ~ Poisson(c) independent Z-rows.
SampleBatch poisson_min_sample(double c, const RowSampler& z, std::size_t d, std::size_t n, std::uint64_t seed,
                               unsigned threads = 1);

SampleBatch transform_margins(const SampleBatch& batch, const MonotoneMap& f);

enum class Reflection { negate, reciprocal };
SampleBatch min_to_max(const SampleBatch& batch, Reflection how = Reflection::negate);

// Runs body(i) for i in [0, n) over `threads` workers; exceptions are
// rethrown on the calling thread.
void parallel_rows(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace minid
