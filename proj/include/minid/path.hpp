#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace minid {

// Strictly increasing evaluation times. `resolution` is the spacing hint
// used by nodes that need a fine grid internally (path integration).
struct Grid {
  std::vector<double> times;
  double resolution = 0.0;

  double lo() const { return times.front(); }
  double hi() const { return times.back(); }
  std::size_t size() const { return times.size(); }
};
using GridPtr = std::shared_ptr<const Grid>;

// lo + k * step (never accumulated), with hi appended and 0 inserted when it
// falls strictly inside the window.
GridPtr make_uniform_grid(double lo, double hi, double step);
// Sorted, de-duplicated copy of arbitrary finite times (0 inserted as above).
GridPtr make_grid(std::vector<double> times, double resolution);

struct Jump {
  double time;
  double size;
};

// Values of an unkilled path at grid indices, computed on demand.
class GridEvaluator {
 public:
  virtual ~GridEvaluator() = default;
  virtual std::size_t size() const = 0;
  virtual double at(std::size_t k) const = 0;
  // Smallest k with at(k) >= level, size() if none.
  virtual std::size_t first_at_least(double level) const;
  virtual std::vector<double> materialize() const;
};

struct FirstPassage {
  double time;
  bool censored;
};

// One realization of an nnnd process on a grid. Values are stored without
// the kill; value(k) reports +inf from kill_time on. Exact paths are linear
// between grid points apart from the listed jumps; when a path is complete
// beyond the window, its only growth after the last grid point consists of
// listed jumps and the kill.
class PathSkeleton {
 public:
  PathSkeleton(GridPtr grid, std::vector<double> values, std::vector<Jump> jumps, double kill_time,
               bool exact_inversion, bool complete_beyond_window);
  PathSkeleton(GridPtr grid, std::shared_ptr<const GridEvaluator> lazy, double kill_time,
               bool complete_beyond_window);

  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> grid() const noexcept { return grid_->times; }
  std::size_t size() const noexcept { return grid_->times.size(); }
  double t_lo() const noexcept { return grid_->times.front(); }
  double t_hi() const noexcept { return grid_->times.back(); }

  double value(std::size_t k) const;
  double value_at(double t) const;
  std::vector<double> values() const;
  // Index of the first grid value >= level (size() if none).
  std::size_t first_index_at_least(double level) const;

  const std::vector<Jump>& jumps() const noexcept { return jumps_; }
  // Sum of listed jump sizes at times <= t.
  double jump_mass_through(double t) const;
  double kill_time() const noexcept { return kill_; }
  bool exact_inversion() const noexcept { return exact_; }
  bool complete_beyond_window() const noexcept { return complete_; }
  bool is_lazy() const noexcept { return static_cast<bool>(lazy_); }
  const std::shared_ptr<const GridEvaluator>& lazy_evaluator() const noexcept { return lazy_; }

  double tail_bound() const noexcept { return tail_bound_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void set_tail_bound(double b) { tail_bound_ = b; }
  void add_warning(std::string w);
  void downgrade_exactness(const std::string& reason);

  // Continuous part (value minus listed jumps) at grid index k, exact paths.
  double continuous_part(std::size_t k) const { return cont_[k]; }

 private:
  double raw_value(std::size_t k) const;
  void build_jump_index();

  GridPtr grid_;
  std::vector<double> values_;
  std::vector<double> cont_;
  std::vector<Jump> jumps_;
  std::vector<double> jump_prefix_;
  std::shared_ptr<const GridEvaluator> lazy_;
  double kill_;
  bool exact_ = false;
  bool complete_ = false;
  double tail_bound_;
  std::vector<std::string> warnings_;
};

// First passage inf{t : H_t >= level}. Exact on exact paths, otherwise the
// smallest grid point with value >= level. A level not reached inside the
// window yields +inf when the path is complete (or the kill time when that
// comes first), else a censored result at t_hi.
FirstPassage invert_path_at_level(const PathSkeleton& path, double level);

}  // namespace minid
