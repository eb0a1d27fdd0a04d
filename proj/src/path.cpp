#include "minid/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minid/errors.hpp"

namespace minid {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void insert_zero(std::vector<double>& t) {
  if (t.front() < 0.0 && t.back() > 0.0 && !std::binary_search(t.begin(), t.end(), 0.0))
    t.insert(std::lower_bound(t.begin(), t.end(), 0.0), 0.0);
}
}  // namespace

GridPtr make_uniform_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw DomainError("window must satisfy lo < hi, both finite");
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("grid step must be finite and > 0");
  const double span = (hi - lo) / step;
  if (span > 5e7) throw DomainError("grid too fine for the window (more than 5e7 points)");
  auto g = std::make_shared<Grid>();
  g->resolution = step;
  const auto n = static_cast<std::size_t>(std::floor(span));
  g->times.reserve(n + 3);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = lo + static_cast<double>(k) * step;
    if (t >= hi) break;
    g->times.push_back(t);
  }
  // drop a point that would sit within rounding distance of hi
  if (g->times.size() > 1 && hi - g->times.back() < 1e-9 * step) g->times.pop_back();
  g->times.push_back(hi);
  insert_zero(g->times);
  return g;
}

GridPtr make_grid(std::vector<double> times, double resolution) {
  if (times.empty()) throw DomainError("grid needs at least one point");
  for (double t : times)
    if (!std::isfinite(t)) throw DomainError("grid times must be finite");
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  insert_zero(times);
  auto g = std::make_shared<Grid>();
  g->times = std::move(times);
  g->resolution = resolution > 0.0 ? resolution : (g->times.back() - g->times.front());
  return g;
}

std::size_t GridEvaluator::first_at_least(double level) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (at(mid) >= level) hi = mid; else lo = mid + 1;
  }
  return lo;
}

std::vector<double> GridEvaluator::materialize() const {
  std::vector<double> v(size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = at(k);
  return v;
}

PathSkeleton::PathSkeleton(GridPtr grid, std::vector<double> values, std::vector<Jump> jumps, double kill_time,
                           bool exact_inversion, bool complete_beyond_window)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      jumps_(std::move(jumps)),
      kill_(kill_time),
      exact_(exact_inversion),
      complete_(complete_beyond_window),
      tail_bound_(kNaN) {
  if (!grid_ || grid_->times.empty()) throw DomainError("path needs a non-empty grid");
  if (values_.size() != grid_->times.size()) throw DomainError("path values must match the grid");
  if (std::isnan(kill_)) throw DomainError("kill time must not be NaN");
  // an infinite value marks the kill
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double v = values_[k];
    if (std::isnan(v) || v < 0.0) throw InvariantError("path values must be >= 0");
    if (k > 0 && v < values_[k - 1]) throw InvariantError("path values must be non-decreasing");
    if (std::isinf(v)) {
      kill_ = std::min(kill_, grid_->times[k]);
      break;
    }
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (std::isinf(values_[k])) values_[k] = k > 0 ? values_[k - 1] : 0.0;
  }
  for (const auto& j : jumps_)
    if (std::isnan(j.time) || std::isnan(j.size) || j.size < 0.0) throw InvariantError("jump sizes must be >= 0");
  std::vector<Jump> kept;
  kept.reserve(jumps_.size());
  for (const auto& j : jumps_) {
    if (std::isinf(j.size)) kill_ = std::min(kill_, j.time);
    else if (j.size > 0.0) kept.push_back(j);
  }
  jumps_ = std::move(kept);
  build_jump_index();
  if (exact_) {
    cont_.resize(values_.size());
    double prev = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      const double c = values_[k] - jump_mass_through(grid_->times[k]);
      prev = k == 0 ? std::max(0.0, c) : std::max(prev, c);
      cont_[k] = prev;
    }
  }
}

PathSkeleton::PathSkeleton(GridPtr grid, std::shared_ptr<const GridEvaluator> lazy, double kill_time,
                           bool complete_beyond_window)
    : grid_(std::move(grid)), lazy_(std::move(lazy)), kill_(kill_time), complete_(complete_beyond_window), tail_bound_(kNaN) {
  if (!grid_ || grid_->times.empty()) throw DomainError("path needs a non-empty grid");
  if (!lazy_ || lazy_->size() != grid_->times.size()) throw DomainError("lazy evaluator must match the grid");
  build_jump_index();
}

void PathSkeleton::build_jump_index() {
  std::stable_sort(jumps_.begin(), jumps_.end(), [](const Jump& a, const Jump& b) { return a.time < b.time; });
  jump_prefix_.resize(jumps_.size());
  double s = 0.0;
  for (std::size_t i = 0; i < jumps_.size(); ++i) jump_prefix_[i] = (s += jumps_[i].size);
}

double PathSkeleton::jump_mass_through(double t) const {
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t, [](double x, const Jump& j) { return x < j.time; });
  const auto n = static_cast<std::size_t>(it - jumps_.begin());
  return n == 0 ? 0.0 : jump_prefix_[n - 1];
}

void PathSkeleton::add_warning(std::string w) {
  if (std::find(warnings_.begin(), warnings_.end(), w) == warnings_.end()) warnings_.push_back(std::move(w));
}

void PathSkeleton::downgrade_exactness(const std::string& reason) {
  if (!exact_) return;
  exact_ = false;
  cont_.clear();
  add_warning("exact inversion downgraded: " + reason);
}

double PathSkeleton::raw_value(std::size_t k) const { return lazy_ ? lazy_->at(k) : values_[k]; }

double PathSkeleton::value(std::size_t k) const {
  if (grid_->times[k] >= kill_) return kInf;
  return raw_value(k);
}

std::vector<double> PathSkeleton::values() const {
  std::vector<double> v = lazy_ ? lazy_->materialize() : values_;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (grid_->times[k] >= kill_) v[k] = kInf;
  return v;
}

double PathSkeleton::value_at(double t) const {
  if (t >= kill_) return kInf;
  const auto& g = grid_->times;
  if (t < g.front()) return 0.0;
  const std::size_t m = g.size();
  if (t >= g.back()) {
    const double last = raw_value(m - 1);
    if (complete_) return last + (jump_mass_through(t) - jump_mass_through(g.back()));
    return last;
  }
  const auto it = std::upper_bound(g.begin(), g.end(), t);
  const auto k = static_cast<std::size_t>(it - g.begin()) - 1;
  if (!exact_) return raw_value(k);
  const double w = (t - g[k]) / (g[k + 1] - g[k]);
  return cont_[k] + w * (cont_[k + 1] - cont_[k]) + jump_mass_through(t);
}

std::size_t PathSkeleton::first_index_at_least(double level) const {
  const auto& g = grid_->times;
  const auto kill_idx = static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), kill_) - g.begin());
  std::size_t k;
  if (lazy_) {
    k = lazy_->first_at_least(level);
  } else {
    k = static_cast<std::size_t>(std::lower_bound(values_.begin(), values_.end(), level) - values_.begin());
  }
  return std::min(k, kill_idx);
}

namespace {

// Growth after t_hi of a complete path: listed jumps and the kill.
FirstPassage passage_beyond(const PathSkeleton& p, double level) {
  const double base = p.value(p.size() - 1) - p.jump_mass_through(p.t_hi());
  for (const auto& j : p.jumps()) {
    if (j.time <= p.t_hi()) continue;
    if (j.time >= p.kill_time()) break;
    if (base + p.jump_mass_through(j.time) >= level) return {j.time, false};
  }
  return {p.kill_time(), false};
}

double passage_in_cell(const PathSkeleton& p, std::size_t a, double level) {
  const auto g = p.grid();
  const double ta = g[a], tb = g[a + 1];
  const double ca = p.continuous_part(a), cb = p.continuous_part(a + 1);
  const double slope = (cb - ca) / (tb - ta);
  double jumps_before = p.jump_mass_through(ta);
  double cur = ta;
  const auto solve = [&](double upto) {
    const double need = level - ca - jumps_before;
    const double t = slope > 0.0 ? ta + need / slope : upto;
    return std::clamp(t, cur, upto);
  };
  const auto& js = p.jumps();
  auto it = std::upper_bound(js.begin(), js.end(), ta, [](double x, const Jump& j) { return x < j.time; });
  for (; it != js.end() && it->time <= tb; ++it) {
    const double tau = it->time;
    if (tau >= p.kill_time()) break;
    if (ca + slope * (tau - ta) + jumps_before >= level) return solve(tau);
    jumps_before += it->size;
    if (ca + slope * (tau - ta) + jumps_before >= level) return tau;
    cur = tau;
  }
  const double kill = p.kill_time();
  if (kill > ta && kill <= tb) {
    if (ca + slope * (kill - ta) + jumps_before >= level) return solve(kill);
    return kill;
  }
  return solve(tb);
}

}  // namespace

FirstPassage invert_path_at_level(const PathSkeleton& path, double level) {
  if (!(level > 0.0)) throw DomainError("first-passage level must be > 0");
  const std::size_t m = path.size();
  const std::size_t k = path.first_index_at_least(level);
  const auto g = path.grid();
  if (k < m) {
    if (!path.exact_inversion() || k == 0) return {g[k], false};
    return {passage_in_cell(path, k - 1, level), false};
  }
  if (path.complete_beyond_window()) return passage_beyond(path, level);
  return {path.t_hi(), true};
}

}  // namespace minid
