#include "minid/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "minid/errors.hpp"

namespace minid {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_(stream_id) {}

RngStream RngStream::for_replicate(std::uint64_t seed, std::uint64_t replicate) noexcept {
  return RngStream(seed, splitmix64(replicate ^ 0x6A09E667F3BCC908ull));
}

RngStream RngStream::substream(std::uint64_t id) const noexcept {
  return RngStream(seed_, splitmix64(stream_ ^ splitmix64(id + 0x3C6EF372FE94F82Bull)));
}

RngStream RngStream::split() noexcept { return substream((*this)()); }

void RngStream::refill() noexcept {
  const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_),
                                         static_cast<std::uint32_t>(block_ >> 32),
                                         static_cast<std::uint32_t>(stream_),
                                         static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  const auto out = philox10(ctr, key);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  ++block_;
  available_ = 2;
}

RngStream::result_type RngStream::operator()() noexcept {
  if (available_ == 0) refill();
  return buffer_[2 - available_--];
}

double RngStream::uniform() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() noexcept { return -std::log(uniform()); }

double RngStream::normal() noexcept {
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

double RngStream::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma variate needs shape > 0 and rate > 0");
  if (shape < 1.0) return gamma(shape + 1.0, rate) * std::pow(uniform(), 1.0 / shape);
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
  }
}

double RngStream::log_gamma(double shape) {
  if (shape >= 1.0) return std::log(gamma(shape));
  const double base = std::log(gamma(shape + 1.0));
  return base + std::log(uniform()) / shape;
}

double RngStream::beta(double a, double b) {
  if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0)) throw DomainError("beta variate needs a, b >= 0, not both zero");
  if (a == 0.0) return 0.0;
  if (b == 0.0) return 1.0;
  const double la = log_gamma(a);
  const double lb = log_gamma(b);
  return 1.0 / (1.0 + std::exp(lb - la));
}

std::uint64_t RngStream::poisson(double mean) {
  if (mean < 0.0) throw DomainError("poisson mean must be non-negative");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(*this);
}

double RngStream::positive_stable(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("stable index must lie in (0, 1]");
  if (alpha == 1.0) return 1.0;
  // Kanter's representation
  const double u = std::numbers::pi * uniform();
  const double e = exponential();
  const double a = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
  return a * b;
}

}  // namespace minid
