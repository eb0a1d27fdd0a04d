#pragma once

#include <array>
#include <cstdint>

namespace minid {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Counter-based stream (Philox4x32-10). Every draw is a pure function of
// (seed, stream id, position), so replicate r of a run can be regenerated
// without touching other replicates and results do not depend on how rows
// are distributed across workers. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  static RngStream for_replicate(std::uint64_t seed, std::uint64_t replicate) noexcept;

  // Independent child keyed by id; does not advance *this.
  RngStream substream(std::uint64_t id) const noexcept;
  // Child keyed by the next draw of *this.
  RngStream split() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() noexcept;

  double uniform() noexcept;  // open interval (0, 1)
  double exponential() noexcept;
  double normal() noexcept;
  double gamma(double shape, double rate = 1.0);
  // log of a Gamma(shape, 1) variate; stays finite for shapes where the
  // variate itself underflows.
  double log_gamma(double shape);
  double beta(double a, double b);
  std::uint64_t poisson(double mean);
  // Positive stable variate with Laplace transform exp(-s^alpha).
  double positive_stable(double alpha);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

}  // namespace minid
