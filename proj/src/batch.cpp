#include "minid/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "minid/errors.hpp"
#include "minid/sampler.hpp"

namespace minid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kPathStream = 1;
constexpr std::uint64_t kLevelStream = 2;

std::string describe_map(const MonotoneMap& f) {
  using K = MonotoneMap::Kind;
  std::ostringstream os;
  os.precision(17);
  switch (f.kind()) {
    case K::affine: os << "affine(" << f.scale() << "," << f.shift() << ")"; break;
    case K::ceiling: os << "ceiling"; break;
    case K::floor: os << "floor"; break;
    case K::table: os << "table(" << f.knots().size() << " knots)"; break;
  }
  return os.str();
}
}  // namespace

SampleBatch::SampleBatch(std::size_t n, std::size_t d, std::vector<double> data, std::vector<std::uint8_t> censored,
                         BatchMeta meta)
    : n_(n), d_(d), data_(std::move(data)), censored_(std::move(censored)), meta_(std::move(meta)) {
  if (d_ == 0) throw DomainError("batch dimension must be >= 1");
  if (data_.size() != n_ * d_) throw DomainError("batch data size must be n * d");
  if (censored_.empty()) censored_.assign(data_.size(), 0);
  if (censored_.size() != data_.size()) throw DomainError("censoring mask size must be n * d");
  for (double x : data_) {
    if (std::isnan(x)) throw DomainError("batch entries must not be NaN");
    if (meta_.orientation == Orientation::min && x == -kInf) throw DomainError("min-oriented batch holds -inf");
  }
  censored_count_ = static_cast<std::size_t>(std::count(censored_.begin(), censored_.end(), std::uint8_t{1}));
}

SampleBatch::SampleBatch(std::size_t n, std::size_t d, std::vector<double> data, BatchMeta meta)
    : SampleBatch(n, d, std::move(data), {}, std::move(meta)) {}

std::vector<double> SampleBatch::column(std::size_t j) const {
  std::vector<double> c(n_);
  for (std::size_t i = 0; i < n_; ++i) c[i] = at(i, j);
  return c;
}

void parallel_rows(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  constexpr std::size_t chunk = 64;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (;;) {
      const std::size_t start = next.fetch_add(chunk);
      if (start >= n || failed.load()) return;
      try {
        for (std::size_t i = start; i < std::min(n, start + chunk); ++i) body(i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, (n + chunk - 1) / chunk));
  for (unsigned k = 1; k < count; ++k) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

SampleBatch definetti_sample(const ModelPtr& model, std::size_t d, std::size_t n, double t_lo, double t_hi,
                             double grid_step, std::uint64_t seed, const SampleOptions& options) {
  if (d == 0) throw DomainError("dimension d must be >= 1");
  PathSampler sampler(model, make_uniform_grid(t_lo, t_hi, grid_step));
  std::vector<double> data(n * d);
  std::vector<std::uint8_t> cens(n * d, 0);
  std::vector<double> tails(n, 0.0);
  std::vector<std::string> warnings;
  std::mutex warn_mutex;

  const auto record = [&](const PathSkeleton& p) {
    if (p.warnings().empty()) return;
    const std::lock_guard lock(warn_mutex);
    for (const auto& w : p.warnings())
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
  };
  const auto fill_row = [&](std::size_t i, const PathSkeleton& path) {
    auto levels = RngStream::for_replicate(seed, i).substream(kLevelStream);
    for (std::size_t j = 0; j < d; ++j) {
      const auto fp = invert_path_at_level(path, levels.exponential());
      data[i * d + j] = fp.time;
      cens[i * d + j] = fp.censored ? 1 : 0;
    }
  };

  if (options.share_path) {
    auto rng = RngStream::for_replicate(seed, 0).substream(kPathStream);
    const auto path = sampler.sample(rng);
    record(path);
    const double tb = path.tail_bound();
    parallel_rows(n, options.threads, [&](std::size_t i) {
      fill_row(i, path);
      tails[i] = std::isnan(tb) ? 0.0 : tb;
    });
  } else {
    parallel_rows(n, options.threads, [&](std::size_t i) {
      auto rng = RngStream::for_replicate(seed, i).substream(kPathStream);
      const auto path = sampler.sample(rng);
      record(path);
      fill_row(i, path);
      tails[i] = std::isnan(path.tail_bound()) ? 0.0 : path.tail_bound();
    });
  }

  BatchMeta meta;
  meta.model_digest = options.model_digest;
  meta.seed = seed;
  meta.t_lo = t_lo;
  meta.t_hi = t_hi;
  meta.grid_step = grid_step;
  meta.shared_path = options.share_path;
  meta.warnings = std::move(warnings);
  std::sort(meta.warnings.begin(), meta.warnings.end());
  for (double t : tails) meta.tail_bound = std::max(meta.tail_bound, t);
  return SampleBatch(n, d, std::move(data), std::move(cens), std::move(meta));
}

SampleBatch poisson_min_sample(double c, const RowSampler& z, std::size_t d, std::size_t n, std::uint64_t seed,
                               unsigned threads) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("total mass c must be finite and > 0");
  if (d == 0) throw DomainError("dimension d must be >= 1");
  std::vector<double> data(n * d, kInf);
  parallel_rows(n, threads, [&](std::size_t i) {
    auto rng = RngStream::for_replicate(seed, i);
    const auto count = rng.poisson(c);
    std::vector<double> draw(d);
    std::span<double> row(data.data() + i * d, d);
    for (std::uint64_t k = 0; k < count; ++k) {
      z(rng, draw);
      for (std::size_t j = 0; j < d; ++j) row[j] = std::min(row[j], draw[j]);
    }
  });
  BatchMeta meta;
  meta.seed = seed;
  return SampleBatch(n, d, std::move(data), std::move(meta));
}

SampleBatch transform_margins(const SampleBatch& batch, const MonotoneMap& f) {
  std::vector<double> out(batch.data().size());
  std::transform(batch.data().begin(), batch.data().end(), out.begin(), [&](double x) { return f(x); });
  BatchMeta meta = batch.meta();
  if (!f.is_identity()) meta.transforms.push_back(describe_map(f));
  return SampleBatch(batch.n(), batch.d(), std::move(out), batch.censored_mask(), std::move(meta));
}

SampleBatch min_to_max(const SampleBatch& batch, Reflection how) {
  const bool from_min = batch.meta().orientation == Orientation::min;
  std::vector<double> out(batch.data().size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double x = batch.data()[k];
    if (how == Reflection::negate) {
      out[k] = -x;
      continue;
    }
    if (from_min && !(x > 0.0)) throw DomainError("reciprocal reflection needs a strictly positive batch");
    if (!from_min && x < 0.0) throw DomainError("reciprocal reflection needs a non-negative batch");
    out[k] = x == 0.0 ? kInf : 1.0 / x;
  }
  BatchMeta meta = batch.meta();
  meta.orientation = from_min ? Orientation::max : Orientation::min;
  meta.transforms.push_back(how == Reflection::negate ? "reflect:negate" : "reflect:reciprocal");
  return SampleBatch(batch.n(), batch.d(), std::move(out), batch.censored_mask(), std::move(meta));
}

}  // namespace minid
