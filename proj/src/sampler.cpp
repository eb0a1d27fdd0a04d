#include "minid/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "minid/errors.hpp"

namespace minid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSeriesTailTol = 1e-10;

// ---------------------------------------------------------------------------
// Gamma subordinator on a grid of clock values tau_k, drawn lazily by
// recursive bisection of the gamma bridge. Node draws come from substreams
// keyed by the node's position in the bisection tree, so any subset of grid
// values is a deterministic function of the stream; the joint law at the grid
// equals that of independent gamma increments.
class GammaBridge final : public GridEvaluator {
 public:
  GammaBridge(std::shared_ptr<const std::vector<double>> tau, std::shared_ptr<const std::vector<double>> drift,
              double shape, double rate, RngStream rng)
      : tau_(std::move(tau)), drift_(std::move(drift)), shape_(shape), rate_(rate), rng_(rng) {
    const auto& t = *tau_;
    RngStream ends = rng_.substream(0);
    g_first_ = t.front() > 0.0 ? ends.gamma(shape_ * t.front(), rate_) : 0.0;
    const double span = t.back() - t.front();
    g_last_ = g_first_ + (span > 0.0 ? ends.gamma(shape_ * span, rate_) : 0.0);
  }

  std::size_t size() const override { return tau_->size(); }

  double at(std::size_t k) const override {
    const std::size_t m = size();
    if (k == 0) return total(0, g_first_);
    if (k == m - 1) return total(m - 1, g_last_);
    std::size_t l = 0, r = m - 1, id = 1;
    double gl = g_first_, gr = g_last_;
    for (;;) {
      const std::size_t mid = l + (r - l) / 2;
      const double gm = split(l, mid, r, gl, gr, id);
      if (k == mid) return total(mid, gm);
      if (k < mid) {
        r = mid;
        gr = gm;
        id = 2 * id;
      } else {
        l = mid;
        gl = gm;
        id = 2 * id + 1;
      }
    }
  }

  std::size_t first_at_least(double level) const override {
    const std::size_t m = size();
    if (total(0, g_first_) >= level) return 0;
    if (total(m - 1, g_last_) < level) return m;
    std::size_t l = 0, r = m - 1, id = 1;
    double gl = g_first_, gr = g_last_;
    while (r - l > 1) {
      const std::size_t mid = l + (r - l) / 2;
      const double gm = split(l, mid, r, gl, gr, id);
      if (total(mid, gm) >= level) {
        r = mid;
        gr = gm;
        id = 2 * id;
      } else {
        l = mid;
        gl = gm;
        id = 2 * id + 1;
      }
    }
    return r;
  }

  std::vector<double> materialize() const override {
    const std::size_t m = size();
    std::vector<double> g(m);
    g[0] = g_first_;
    g[m - 1] = g_last_;
    fill(g, 0, m - 1, 1);
    for (std::size_t k = 0; k < m; ++k) g[k] = total(k, g[k]);
    return g;
  }

 private:
  double total(std::size_t k, double g) const { return drift_ ? (*drift_)[k] + g : g; }

  double split(std::size_t l, std::size_t mid, std::size_t r, double gl, double gr, std::size_t id) const {
    if (!(gr > gl)) return gl;
    const auto& t = *tau_;
    const double a = shape_ * (t[mid] - t[l]);
    const double b = shape_ * (t[r] - t[mid]);
    if (a <= 0.0) return gl;
    if (b <= 0.0) return gr;
    RngStream node = rng_.substream(id);
    const double frac = node.beta(a, b);
    return std::clamp(gl + (gr - gl) * frac, gl, gr);
  }

  void fill(std::vector<double>& g, std::size_t l, std::size_t r, std::size_t id) const {
    if (r - l <= 1) return;
    const std::size_t mid = l + (r - l) / 2;
    g[mid] = split(l, mid, r, g[l], g[r], id);
    fill(g, l, mid, 2 * id);
    fill(g, mid, r, 2 * id + 1);
  }

  std::shared_ptr<const std::vector<double>> tau_;
  std::shared_ptr<const std::vector<double>> drift_;
  double shape_;
  double rate_;
  RngStream rng_;
  double g_first_;
  double g_last_;
};

// ---------------------------------------------------------------------------
// Strong-idt series evaluated at grid points on demand.
struct SeriesCutoffs {
  std::vector<double> times;  // increasing probe times
  std::vector<double> cutoff; // terms with S > cutoff contribute < tol at times <= probe

  double for_time(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) return cutoff.back();
    return cutoff[static_cast<std::size_t>(it - times.begin())];
  }
};

double series_term(const DistFn& g, double t, double s) {
  const double v = g(t / s);
  if (v >= 1.0) return kInf;
  return v <= 0.0 ? 0.0 : -std::log1p(-v);
}

class SeriesEvaluator final : public GridEvaluator {
 public:
  SeriesEvaluator(GridPtr grid, std::shared_ptr<const std::vector<WeightedDist>> rho,
                  std::vector<StrongIdtTerm> terms, std::shared_ptr<const SeriesCutoffs> cutoffs)
      : grid_(std::move(grid)), rho_(std::move(rho)), terms_(std::move(terms)), cutoffs_(std::move(cutoffs)) {}

  std::size_t size() const override { return grid_->size(); }

  double at(std::size_t k) const override {
    const double t = grid_->times[k];
    const double limit = cutoffs_ ? cutoffs_->for_time(t) : kInf;
    double h = 0.0;
    for (const auto& term : terms_) {
      if (term.scale > limit) break;
      h += series_term((*rho_)[term.rho_index].dist, t, term.scale);
      if (std::isinf(h)) return h;
    }
    return h;
  }

 private:
  GridPtr grid_;
  std::shared_ptr<const std::vector<WeightedDist>> rho_;
  std::vector<StrongIdtTerm> terms_;
  std::shared_ptr<const SeriesCutoffs> cutoffs_;
};

std::size_t pick_index(std::span<const double> cumulative, RngStream& rng) {
  if (cumulative.size() == 1) return 0;
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulative_weights(std::span<const WeightedDist> rho) {
  std::vector<double> c(rho.size());
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) c[i] = (s += rho[i].weight);
  return c;
}

bool on_grid(const Grid& g, double t) { return std::binary_search(g.times.begin(), g.times.end(), t); }

std::vector<Jump> drift_jumps(const DriftFn& b) {
  std::vector<Jump> jumps;
  if (b.kind() != DriftFn::Kind::table) return jumps;
  const auto& k = b.knots();
  const auto& v = b.values();
  jumps.push_back({k[0], v[0]});
  if (b.is_step())
    for (std::size_t i = 1; i < k.size(); ++i) jumps.push_back({k[i], v[i] - v[i - 1]});
  return jumps;
}

// A drift-like deterministic path on the grid: values, jumps, exactness.
struct DeterministicPath {
  std::vector<double> values;
  std::vector<Jump> jumps;
  bool exact;
};

DeterministicPath deterministic_path(const DriftFn& b, const Grid& grid) {
  DeterministicPath p;
  p.values.reserve(grid.size());
  for (double t : grid.times) p.values.push_back(b(t));
  p.jumps = drift_jumps(b);
  p.exact = true;
  if (b.kind() == DriftFn::Kind::table && !b.is_step()) {
    for (double k : b.knots())
      if (k > grid.lo() && k < grid.hi() && !on_grid(grid, k)) p.exact = false;
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------

class PathSampler::Plan {
 public:
  explicit Plan(GridPtr grid) : grid_(std::move(grid)) {}
  virtual ~Plan() = default;
  virtual PathSkeleton sample(RngStream& rng) const = 0;

 protected:
  GridPtr grid_;
};

namespace {

using Plan = PathSampler::Plan;
std::unique_ptr<Plan> make_plan(const ModelPtr& model, const GridPtr& grid);

class DriftPlan final : public Plan {
 public:
  DriftPlan(const node::Drift& m, GridPtr grid) : Plan(std::move(grid)), path_(build(m.b, grid_)) {}
  PathSkeleton sample(RngStream&) const override { return path_; }

 private:
  static PathSkeleton build(const DriftFn& b, const GridPtr& grid) {
    auto d = deterministic_path(b, *grid);
    PathSkeleton p(grid, std::move(d.values), std::move(d.jumps), kInf, d.exact, b.constant_after(grid->hi()));
    if (!d.exact) p.add_warning("drift table knots off the grid: first passage is grid-rounded");
    return p;
  }
  PathSkeleton path_;
};

// H_t = L_{clock(t)}; the Levy case uses clock(t) = max(t, 0).
class SubordinatorPlan final : public Plan {
 public:
  SubordinatorPlan(BernsteinSpec psi, std::optional<DriftFn> clock, std::optional<Truncation> tr, GridPtr grid)
      : Plan(std::move(grid)), psi_(std::move(psi)), clock_(std::move(clock)), tr_(tr) {
    drift_ = psi_.drift_rate();
    kill_ = psi_.total_kill_rate();
    collect(psi_);
    auto tau = std::make_shared<std::vector<double>>();
    tau->reserve(grid_->size());
    for (double t : grid_->times) tau->push_back(clock_time(t));
    if (tr_) {
      span_ = std::max(0.0, clock_time(tr_->horizon));
      for (double& x : *tau) x = std::min(x, span_);
    }
    tau_ = tau;
    auto drift = std::make_shared<std::vector<double>>();
    drift->reserve(grid_->size());
    for (double t : grid_->times) drift->push_back(drift_ == 0.0 ? 0.0 : drift_ * clock_time(t));
    drift_values_ = drift;
    linear_clock_ = !clock_ || clock_->kind() != DriftFn::Kind::table;
  }

  PathSkeleton sample(RngStream& rng) const override {
    // kill: independent exponential clock time at rate c
    double kill_time = kInf;
    if (kill_ > 0.0) {
      const double zeta = rng.exponential() / kill_;
      kill_time = real_time(zeta);
      if (tr_ && (std::isinf(tr_->eps) || kill_time > tr_->horizon)) kill_time = kInf;
    }
    if (tr_ && tr_->eps > 0.0) return sample_truncated(rng, kill_time);

    const bool only_gamma = gamma_.size() == 1 && stable_.empty() && cp_.empty();
    if (only_gamma) {
      auto lazy = std::make_shared<GammaBridge>(tau_, drift_ == 0.0 ? nullptr : drift_values_, gamma_[0]->p1(),
                                                gamma_[0]->p2(), rng.split());
      const bool frozen = tr_ && drift_ == 0.0 && clock_time(grid_->hi()) >= span_;
      return PathSkeleton(grid_, std::move(lazy), kill_time, frozen);
    }

    const std::size_t m = grid_->size();
    std::vector<double> values(*drift_values_);
    std::vector<Jump> jumps;
    // infinite-activity components: independent increments per cell
    if (!gamma_.empty() || !stable_.empty()) {
      double level = 0.0;
      double prev = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double dt = (*tau_)[k] - prev;
        prev = (*tau_)[k];
        for (const auto* g : gamma_) level += g->sample_increment(dt, rng);
        for (const auto* s : stable_) level += s->sample_increment(dt, rng);
        values[k] += level;
      }
    }
    // compound Poisson components: explicit jumps
    const double span = tau_->back();
    for (const auto* c : cp_) {
      const auto n = rng.poisson(c->p1() * span);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double r = rng.uniform() * span;
        const double size = rng.exponential() / c->p2();
        jumps.push_back({real_time(r), size});
      }
    }
    add_jumps_to_values(values, jumps);
    const bool exact = gamma_.empty() && stable_.empty() && (linear_clock_ || drift_ == 0.0);
    const bool complete = tr_ && drift_ == 0.0 && clock_time(grid_->hi()) >= span_;
    PathSkeleton p(grid_, std::move(values), std::move(jumps), kill_time, exact, complete);
    return p;
  }

 private:
  double clock_time(double t) const { return clock_ ? (*clock_)(t) : std::max(t, 0.0); }
  double real_time(double r) const { return clock_ ? clock_->inverse(r) : r; }

  void collect(const BernsteinSpec& s) {
    using F = BernsteinSpec::Family;
    switch (s.family()) {
      case F::gamma: gamma_.push_back(&s); break;
      case F::stable:
        if (s.p1() < 1.0) stable_.push_back(&s);
        break;
      case F::cp_exponential: cp_.push_back(&s); break;
      case F::sum:
        for (const auto& t : s.terms()) collect(t);
        break;
      case F::drift: break;
    }
  }

  void add_jumps_to_values(std::vector<double>& values, const std::vector<Jump>& jumps) const {
    if (jumps.empty()) return;
    std::vector<Jump> sorted = jumps;
    std::sort(sorted.begin(), sorted.end(), [](const Jump& a, const Jump& b) { return a.time < b.time; });
    double acc = 0.0;
    std::size_t j = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      while (j < sorted.size() && sorted[j].time <= grid_->times[k]) acc += sorted[j++].size;
      values[k] += acc;
    }
  }

  PathSkeleton sample_truncated(RngStream& rng, double kill_time) const {
    std::vector<Jump> jumps;
    if (std::isfinite(tr_->eps)) {
      const double rate = psi_.levy_tail_mass(tr_->eps);
      const auto n = rng.poisson(rate * span_);
      jumps.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double r = rng.uniform() * span_;
        jumps.push_back({real_time(r), psi_.sample_jump_above(tr_->eps, rng)});
      }
    }
    std::vector<double> values(*drift_values_);
    add_jumps_to_values(values, jumps);
    const bool exact = linear_clock_ || drift_ == 0.0;
    return PathSkeleton(grid_, std::move(values), std::move(jumps), kill_time, exact, drift_ == 0.0);
  }

  BernsteinSpec psi_;
  std::optional<DriftFn> clock_;
  std::optional<Truncation> tr_;
  double drift_ = 0.0;
  double kill_ = 0.0;
  double span_ = kInf;
  bool linear_clock_ = true;
  std::vector<const BernsteinSpec*> gamma_, stable_, cp_;
  std::shared_ptr<const std::vector<double>> tau_;
  std::shared_ptr<const std::vector<double>> drift_values_;
};

class StrongIdtPlan final : public Plan {
 public:
  StrongIdtPlan(const node::StrongIdt& m, GridPtr grid)
      : Plan(std::move(grid)), kappa_(m.kappa), max_terms_(m.max_terms), tr_(m.truncation) {
    double total = 0.0;
    for (const auto& r : m.rho) total += r.weight;
    auto rho = std::make_shared<std::vector<WeightedDist>>();
    for (const auto& r : m.rho) rho->push_back({r.weight / total, r.dist});
    rho_ = rho;
    cumulative_ = cumulative_weights(*rho_);
    if (tr_ && tr_->eps > 0.0) {
      prepare_truncated();
    } else {
      prepare_cutoffs();
    }
  }

  PathSkeleton sample(RngStream& rng) const override {
    std::vector<StrongIdtTerm> terms;
    double arrivals = 0.0;
    double tail = 0.0;
    if (truncated_) {
      if (std::isfinite(max_scale_)) {
        for (;;) {
          arrivals += rng.exponential();
          const double s = kappa_.cumulative_inverse(arrivals);
          if (!(s <= max_scale_)) break;
          const std::size_t idx = pick_index(cumulative_, rng);
          if (series_term((*rho_)[idx].dist, tr_->horizon, s) > tr_->eps) terms.push_back({s, idx});
          if (terms.size() > 10'000'000) throw UnsupportedError("truncated series has too many terms");
        }
      }
      return PathSkeleton(grid_, std::make_shared<SeriesEvaluator>(grid_, rho_, std::move(terms), nullptr), kInf, false);
    }
    const double limit = cutoffs_->cutoff.back();
    while (terms.size() < max_terms_) {
      arrivals += rng.exponential();
      const double s = kappa_.cumulative_inverse(arrivals);
      if (!(s <= limit)) break;
      terms.push_back({s, pick_index(cumulative_, rng)});
    }
    bool capped = terms.size() == max_terms_;
    if (capped) tail = tail_mass(terms.back().scale, grid_->hi());
    PathSkeleton p(grid_, std::make_shared<SeriesEvaluator>(grid_, rho_, std::move(terms), cutoffs_), kInf, false);
    p.set_tail_bound(capped ? tail : kSeriesTailTol);
    if (capped && tail > kSeriesTailTol) p.add_warning("series truncated at the term limit before reaching the tail tolerance");
    return p;
  }

 private:
  // int_(s, inf) E_rho[-log(1 - G(t / u))] kappa(du)
  double tail_mass(double s, double t) const {
    double total = 0.0;
    for (const auto& r : *rho_) {
      const auto h = [&](double u) { return series_term(r.dist, t, u); };
      if (kappa_.has_density()) {
        const double c = kappa_.coef(), p = kappa_.power();
        try {
          total += r.weight *
                   integrate_half_line([&](double v) {
                     const double u = s + v;
                     const double x = h(u);
                     return x == 0.0 ? 0.0 : x * c * std::pow(u, p - 1.0);
                   }).value;
        } catch (const RangeError&) {
          return kInf;
        }
      }
      for (const auto& a : kappa_.atoms())
        if (a.at > s) total += r.weight * a.weight * h(a.at);
    }
    return total;
  }

  double cutoff_for(double t) const {
    if (t <= 0.0) return 0.0;
    double hi = t;
    int guard = 0;
    while (!(tail_mass(hi, t) <= kSeriesTailTol)) {
      hi *= 2.0;
      if (++guard > 80) return kInf;
    }
    double lo = hi / 2.0;
    if (guard == 0) lo = 0.0;
    for (int i = 0; i < 30; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (tail_mass(mid, t) <= kSeriesTailTol) hi = mid; else lo = mid;
      if (hi - lo <= 1e-3 * hi) break;
    }
    return hi;
  }

  void prepare_cutoffs() {
    auto c = std::make_shared<SeriesCutoffs>();
    const double hi = grid_->hi();
    if (hi <= 0.0) {
      c->times = {hi};
      c->cutoff = {0.0};
    } else {
      const int n = 40;
      const double lo = hi * 1e-4;
      for (int i = 0; i <= n; ++i) {
        const double t = i == n ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / n);
        c->times.push_back(t);
      }
      for (double t : c->times) c->cutoff.push_back(cutoff_for(t));
      // cut-offs must not decrease in t
      for (std::size_t i = 1; i < c->cutoff.size(); ++i) c->cutoff[i] = std::max(c->cutoff[i], c->cutoff[i - 1]);
      c->times.insert(c->times.begin(), 0.0);
      c->cutoff.insert(c->cutoff.begin(), c->cutoff.front());
    }
    cutoffs_ = c;
  }

  void prepare_truncated() {
    truncated_ = true;
    const double s = tr_->horizon;
    if (std::isinf(tr_->eps) || s <= 0.0) {
      max_scale_ = -kInf;
      return;
    }
    // keep -log(1 - G(s / S)) > eps, i.e. G(s / S) > p
    const double p = -std::expm1(-tr_->eps);
    double q_min = kInf;
    for (const auto& r : *rho_) q_min = std::min(q_min, r.dist.quantile(p));
    if (!(q_min > 0.0)) throw UnsupportedError("truncated series keeps infinitely many terms");
    max_scale_ = s / q_min;
  }

  RadonMeasure kappa_;
  std::shared_ptr<const std::vector<WeightedDist>> rho_;
  std::vector<double> cumulative_;
  std::size_t max_terms_;
  std::optional<Truncation> tr_;
  bool truncated_ = false;
  double max_scale_ = kInf;
  std::shared_ptr<const SeriesCutoffs> cutoffs_;
};

class FrailtyPlan final : public Plan {
 public:
  FrailtyPlan(const node::Frailty& m, GridPtr grid) : Plan(std::move(grid)), m_(m) {}
  PathSkeleton sample(RngStream& rng) const override {
    const double rate = m_.drift_rate + m_.mixing.sample_increment(1.0, rng);
    std::vector<double> values;
    values.reserve(grid_->size());
    for (double t : grid_->times) values.push_back(t > 0.0 ? rate * t : 0.0);
    return PathSkeleton(grid_, std::move(values), {}, kInf, true, rate == 0.0);
  }

 private:
  node::Frailty m_;
};

class DirichletPlan final : public Plan {
 public:
  DirichletPlan(const node::Dirichlet& m, GridPtr grid) : Plan(std::move(grid)), m_(m) {}
  PathSkeleton sample(RngStream& rng) const override {
    struct Stick {
      double at;
      double weight;
    };
    std::vector<Stick> sticks;
    sticks.reserve(m_.sticks);
    double remaining = 1.0;
    double total = 0.0;
    const double inv_alpha = 1.0 / m_.concentration;
    for (std::size_t k = 0; k < m_.sticks && remaining > 0.0; ++k) {
      // V ~ Beta(1, alpha)
      const double v = -std::expm1(inv_alpha * std::log(rng.uniform()));
      const double w = remaining * v;
      remaining *= 1.0 - v;
      if (w <= 0.0) continue;
      sticks.push_back({m_.base.sample(rng), w});
      total += w;
    }
    // renormalize; locations at +inf keep their mass forever
    std::sort(sticks.begin(), sticks.end(), [](const Stick& a, const Stick& b) { return a.at < b.at; });
    std::vector<double> rest(sticks.size() + 1, 0.0);  // mass strictly after position i
    for (std::size_t i = sticks.size(); i-- > 0;) rest[i] = rest[i + 1] + (std::isinf(sticks[i].at) ? 0.0 : 0.0);
    double at_inf = 0.0;
    for (const auto& s : sticks)
      if (std::isinf(s.at)) at_inf += s.weight / total;
    std::vector<Jump> jumps;
    double kill = kInf;
    // suffix sums over finite locations, from the right for accuracy
    std::vector<double> finite_after;
    std::vector<double> locs;
    std::vector<double> weights;
    for (const auto& s : sticks) {
      if (std::isinf(s.at)) continue;
      if (!locs.empty() && locs.back() == s.at) {
        weights.back() += s.weight / total;
      } else {
        locs.push_back(s.at);
        weights.push_back(s.weight / total);
      }
    }
    finite_after.assign(locs.size() + 1, 0.0);
    for (std::size_t i = locs.size(); i-- > 0;) finite_after[i] = finite_after[i + 1] + weights[i];
    // remaining mass after the i-th location: finite_after[i + 1] + at_inf
    double h_prev = 0.0;
    std::vector<double> level(locs.size());
    for (std::size_t i = 0; i < locs.size(); ++i) {
      const double r = finite_after[i + 1] + at_inf;
      if (r <= 0.0) {
        kill = locs[i];
        level.resize(i);
        break;
      }
      const double h = -std::log(r);
      level[i] = std::max(h, h_prev);
      jumps.push_back({locs[i], level[i] - h_prev});
      h_prev = level[i];
    }
    std::vector<double> values(grid_->size());
    std::size_t j = 0;
    double h = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      while (j < level.size() && locs[j] <= grid_->times[k]) h = level[j++];
      values[k] = h;
    }
    return PathSkeleton(grid_, std::move(values), std::move(jumps), kill, true, true);
  }

 private:
  node::Dirichlet m_;
};

class CompoundPoissonPlan final : public Plan {
 public:
  CompoundPoissonPlan(const node::CompoundPoissonPaths& m, GridPtr grid) : Plan(std::move(grid)), m_(m) {
    double s = 0.0;
    for (const auto& a : m_.atoms) cumulative_.push_back(s += a.weight);
  }
  PathSkeleton sample(RngStream& rng) const override {
    const auto n = rng.poisson(m_.mass);
    std::vector<double> values(grid_->size(), 0.0);
    std::vector<Jump> jumps;
    double kill = kInf;
    bool exact = true;
    bool complete = true;
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto& atom = m_.atoms[pick_index(cumulative_, rng)];
      auto d = deterministic_path(atom.shape, *grid_);
      for (std::size_t k = 0; k < values.size(); ++k) values[k] += d.values[k];
      jumps.insert(jumps.end(), d.jumps.begin(), d.jumps.end());
      exact = exact && d.exact;
      complete = complete && atom.shape.constant_after(grid_->hi());
      kill = std::min(kill, atom.infinite_from);
    }
    return PathSkeleton(grid_, std::move(values), std::move(jumps), kill, exact, complete);
  }

 private:
  node::CompoundPoissonPaths m_;
  std::vector<double> cumulative_;
};

class ComonotonePlan final : public Plan {
 public:
  ComonotonePlan(const node::Comonotone& m, GridPtr grid) : Plan(std::move(grid)), law_(m.law) {}
  PathSkeleton sample(RngStream& rng) const override {
    return PathSkeleton(grid_, std::vector<double>(grid_->size(), 0.0), {}, law_.sample(rng), true, true);
  }

 private:
  DistFn law_;
};

class SumPlan final : public Plan {
 public:
  SumPlan(const node::Sum& m, GridPtr grid) : Plan(std::move(grid)) {
    for (const auto& t : m.terms) parts_.push_back(make_plan(t, grid_));
  }
  PathSkeleton sample(RngStream& rng) const override {
    std::vector<PathSkeleton> paths;
    paths.reserve(parts_.size());
    for (const auto& p : parts_) paths.push_back(p->sample(rng));
    return sum_paths(paths);
  }

 private:
  std::vector<std::unique_ptr<Plan>> parts_;
};

class SubordinatedPlan final : public Plan {
 public:
  SubordinatedPlan(const node::Subordinated& m, GridPtr grid)
      : Plan(std::move(grid)), outer_(m.outer), inner_(make_plan(m.inner, grid_)) {}
  PathSkeleton sample(RngStream& rng) const override {
    const auto inner = inner_->sample(rng);
    return subordinate_path(outer_, inner, rng);
  }

 private:
  BernsteinSpec outer_;
  std::unique_ptr<Plan> inner_;
};

class IntegratedPlan final : public Plan {
 public:
  IntegratedPlan(const node::Integrated& m, GridPtr grid) : Plan(std::move(grid)), kappa_(m.kappa) {
    // the integral runs from 0: cover [min(lo, 0), hi] at the grid resolution
    const double lo = std::min(grid_->lo(), 0.0);
    const double hi = grid_->hi();
    std::vector<double> times = grid_->times;
    if (hi > lo) {
      const auto fine = make_uniform_grid(lo, hi, std::min(grid_->resolution, hi - lo));
      times.insert(times.end(), fine->times.begin(), fine->times.end());
    }
    inner_grid_ = make_grid(std::move(times), grid_->resolution);
    same_grid_ = inner_grid_->times == grid_->times;
    inner_ = make_plan(m.inner, inner_grid_);
  }
  PathSkeleton sample(RngStream& rng) const override {
    const auto v = inner_->sample(rng);
    auto h = integrate_path(v, kappa_);
    if (same_grid_) return h;
    std::vector<double> values;
    values.reserve(grid_->size());
    for (double t : grid_->times) {
      const double x = h.value_at(t);
      values.push_back(std::isinf(x) ? (values.empty() ? 0.0 : values.back()) : x);
    }
    return PathSkeleton(grid_, std::move(values), {}, h.kill_time(), false, false);
  }

 private:
  RadonMeasure kappa_;
  GridPtr inner_grid_;
  bool same_grid_ = false;
  std::unique_ptr<Plan> inner_;
};

class TimeChangedPlan final : public Plan {
 public:
  TimeChangedPlan(const node::TimeChanged& m, GridPtr grid) : Plan(std::move(grid)), map_(m.map) {
    using K = MonotoneMap::Kind;
    if (map_.kind() == K::ceiling) throw DomainError("time-change map must be right-continuous (use floor, not ceiling)");
    std::vector<double> inner_times;
    if (map_.kind() == K::floor) {
      const double a = std::floor(grid_->lo()), b = std::floor(grid_->hi());
      if (b - a > 5e6) throw DomainError("floor time change over too many integers");
      for (double x = a; x <= b; x += 1.0) inner_times.push_back(x);
    } else {
      for (double t : grid_->times) inner_times.push_back(map_(t));
    }
    const double res = map_.kind() == K::affine ? grid_->resolution * map_.scale() : grid_->resolution;
    if (map_.kind() == K::affine) {
      auto g = std::make_shared<Grid>();
      g->times = std::move(inner_times);
      g->resolution = res;
      for (std::size_t i = 1; i < g->times.size(); ++i)
        if (!(g->times[i] > g->times[i - 1])) throw DomainError("affine time change collapsed grid points");
      inner_grid_ = g;
    } else {
      inner_grid_ = make_grid(std::move(inner_times), res);
    }
    inner_ = make_plan(m.inner, inner_grid_);
  }

  PathSkeleton sample(RngStream& rng) const override {
    const auto inner = inner_->sample(rng);
    using K = MonotoneMap::Kind;
    if (map_.kind() == K::affine) return affine(inner);
    if (map_.kind() == K::floor) return floored(inner);
    std::vector<double> values;
    values.reserve(grid_->size());
    double kill = kInf;
    for (double t : grid_->times) {
      const double x = inner.value_at(map_(t));
      if (std::isinf(x)) {
        kill = std::min(kill, t);
        values.push_back(values.empty() ? 0.0 : values.back());
      } else {
        values.push_back(x);
      }
    }
    PathSkeleton p(grid_, std::move(values), {}, kill, false, false);
    if (inner.exact_inversion()) p.add_warning("exact inversion downgraded: table time change");
    return p;
  }

 private:
  PathSkeleton affine(const PathSkeleton& inner) const {
    const auto back = [this](double r) { return (r - map_.shift()) / map_.scale(); };
    const double kill = std::isinf(inner.kill_time()) ? inner.kill_time() : back(inner.kill_time());
    if (inner.is_lazy()) {
      PathSkeleton p(grid_, inner.lazy_evaluator(), kill, inner.complete_beyond_window());
      p.set_tail_bound(inner.tail_bound());
      return p;
    }
    std::vector<double> values;
    values.reserve(grid_->size());
    for (std::size_t k = 0; k < inner.size(); ++k) {
      const double x = inner.value(k);
      values.push_back(std::isinf(x) ? (values.empty() ? 0.0 : values.back()) : x);
    }
    std::vector<Jump> jumps = inner.jumps();
    for (auto& j : jumps) j.time = back(j.time);
    PathSkeleton p(grid_, std::move(values), std::move(jumps), kill, inner.exact_inversion(),
                   inner.complete_beyond_window());
    p.set_tail_bound(inner.tail_bound());
    return p;
  }

  PathSkeleton floored(const PathSkeleton& inner) const {
    const auto ig = inner.grid();
    const auto index_of = [&](double x) {
      return static_cast<std::size_t>(std::lower_bound(ig.begin(), ig.end(), x) - ig.begin());
    };
    std::vector<double> values;
    values.reserve(grid_->size());
    for (double t : grid_->times) values.push_back(inner.value(index_of(std::floor(t))));
    std::vector<Jump> jumps;
    double kill = kInf;
    for (std::size_t i = 1; i < ig.size(); ++i) {
      const double prev = inner.value(i - 1), cur = inner.value(i);
      if (std::isinf(cur)) {
        kill = ig[i];
        break;
      }
      if (cur > prev) jumps.push_back({ig[i], cur - prev});
    }
    for (double& v : values)
      if (std::isinf(v)) v = 0.0;  // replaced by the kill below
    // restore monotone values before the kill
    for (std::size_t k = 1; k < values.size(); ++k) values[k] = std::max(values[k], values[k - 1]);
    return PathSkeleton(grid_, std::move(values), std::move(jumps), kill, true, false);
  }

  MonotoneMap map_;
  GridPtr inner_grid_;
  std::unique_ptr<Plan> inner_;
};

std::unique_ptr<Plan> make_plan(const ModelPtr& model, const GridPtr& grid) {
  if (!model) throw DomainError("missing model");
  const auto& n = model->node();
  if (const auto* m = std::get_if<node::Drift>(&n)) return std::make_unique<DriftPlan>(*m, grid);
  if (const auto* m = std::get_if<node::LevySubordinator>(&n))
    return std::make_unique<SubordinatorPlan>(m->psi, std::nullopt, m->truncation, grid);
  if (const auto* m = std::get_if<node::AdditiveSubordinator>(&n))
    return std::make_unique<SubordinatorPlan>(m->psi, m->clock, m->truncation, grid);
  if (const auto* m = std::get_if<node::StrongIdt>(&n)) return std::make_unique<StrongIdtPlan>(*m, grid);
  if (const auto* m = std::get_if<node::Frailty>(&n)) return std::make_unique<FrailtyPlan>(*m, grid);
  if (const auto* m = std::get_if<node::Dirichlet>(&n)) return std::make_unique<DirichletPlan>(*m, grid);
  if (const auto* m = std::get_if<node::CompoundPoissonPaths>(&n)) return std::make_unique<CompoundPoissonPlan>(*m, grid);
  if (const auto* m = std::get_if<node::Comonotone>(&n)) return std::make_unique<ComonotonePlan>(*m, grid);
  if (const auto* m = std::get_if<node::Sum>(&n)) return std::make_unique<SumPlan>(*m, grid);
  if (const auto* m = std::get_if<node::Subordinated>(&n)) return std::make_unique<SubordinatedPlan>(*m, grid);
  if (const auto* m = std::get_if<node::Integrated>(&n)) return std::make_unique<IntegratedPlan>(*m, grid);
  if (const auto* m = std::get_if<node::TimeChanged>(&n)) return std::make_unique<TimeChangedPlan>(*m, grid);
  throw UnsupportedError("no sampler for model type " + model->type_name());
}

}  // namespace

PathSampler::PathSampler(const ModelPtr& model, GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_ || grid_->times.empty()) throw DomainError("sampler needs a non-empty grid");
  plan_ = make_plan(model, grid_);
}
PathSampler::~PathSampler() = default;
PathSampler::PathSampler(PathSampler&&) noexcept = default;
PathSampler& PathSampler::operator=(PathSampler&&) noexcept = default;

PathSkeleton PathSampler::sample(RngStream& rng) const { return plan_->sample(rng); }

PathSkeleton sample_path(const ModelPtr& model, double t_lo, double t_hi, double grid_step, RngStream& rng) {
  return sample_path(model, make_uniform_grid(t_lo, t_hi, grid_step), rng);
}

PathSkeleton sample_path(const ModelPtr& model, GridPtr grid, RngStream& rng) {
  return PathSampler(model, std::move(grid)).sample(rng);
}

std::vector<StrongIdtTerm> sample_strong_idt_terms(const RadonMeasure& kappa, std::span<const WeightedDist> rho,
                                                   std::size_t count, RngStream& rng) {
  if (count == 0) throw DomainError("term count must be >= 1");
  if (rho.empty()) throw DomainError("mixing law rho must not be empty");
  if (!kappa.has_density() && kappa.atoms().empty()) throw UnsupportedError("kappa is the zero measure");
  const auto cum = cumulative_weights(rho);
  std::vector<StrongIdtTerm> terms;
  terms.reserve(count);
  double arrivals = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    arrivals += rng.exponential();
    const double s = kappa.cumulative_inverse(arrivals);
    if (std::isinf(s)) break;  // finite kappa: no further points
    terms.push_back({s, pick_index(cum, rng)});
  }
  return terms;
}

PathSkeleton integrate_path(const PathSkeleton& v, const RadonMeasure& kappa) {
  const auto g = v.grid();
  const auto vals = v.values();
  for (double x : vals)
    if (x < 0.0) throw DomainError("integrand path must be non-negative");
  // breakpoints of the step integrand: grid points and jump times inside
  std::vector<double> bps(g.begin(), g.end());
  bool jumps_inside = false;
  for (const auto& j : v.jumps()) {
    if (j.time > g.front() && j.time < g.back() && !std::binary_search(g.begin(), g.end(), j.time)) {
      bps.push_back(j.time);
      jumps_inside = true;
    }
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  const auto step_value = [&](double s) {
    if (s >= v.kill_time()) return kInf;
    if (v.exact_inversion()) return v.value_at(s);
    const auto it = std::upper_bound(g.begin(), g.end(), s);
    return it == g.begin() ? 0.0 : vals[static_cast<std::size_t>(it - g.begin()) - 1];
  };
  const auto times_mass = [](double x, double mass) { return mass == 0.0 ? 0.0 : x * mass; };

  std::vector<double> out(g.size());
  double acc = 0.0;  // integral over [0, bps[i]) after processing segment i - 1
  std::size_t gi = 0;
  for (std::size_t i = 0; i < bps.size(); ++i) {
    const double a = bps[i];
    const double va = step_value(a);
    if (gi < g.size() && g[gi] == a) out[gi++] = acc + times_mass(va, kappa.cumulative(a) - kappa.cumulative_left(a));
    if (i + 1 < bps.size()) acc += times_mass(va, kappa.cumulative_left(bps[i + 1]) - kappa.cumulative_left(a));
  }
  double kill = kInf;
  for (std::size_t k = 0; k < out.size(); ++k)
    if (std::isinf(out[k])) {
      kill = g[k];
      break;
    }
  if (std::isfinite(v.kill_time())) {
    const double tau = v.kill_time();
    double first = kInf;
    if (kappa.has_density()) first = std::max(tau, 0.0);
    for (const auto& at : kappa.atoms())
      if (at.at >= tau) {
        first = std::min(first, at.at);
        break;
      }
    kill = std::min(kill, first);
  }
  std::vector<Jump> jumps;
  for (const auto& at : kappa.atoms()) {
    if (at.at < g.front() || at.at > g.back() || at.at >= kill) continue;
    jumps.push_back({at.at, times_mass(step_value(at.at), at.weight)});
  }
  // a Lebesgue-type density on a step integrand stays linear between breakpoints
  const bool exact = !kappa.has_density() || (kappa.power() == 1.0 && !jumps_inside);
  for (double& x : out)
    if (std::isinf(x)) x = 0.0;
  for (std::size_t k = 1; k < out.size(); ++k) out[k] = std::max(out[k], out[k - 1]);
  return PathSkeleton(v.grid_ptr(), std::move(out), std::move(jumps), kill, exact, false);
}

PathSkeleton subordinate_path(const BernsteinSpec& outer, const PathSkeleton& inner, RngStream& rng) {
  const auto vals = inner.values();
  for (std::size_t k = 1; k < vals.size(); ++k)
    if (vals[k] < vals[k - 1]) throw InvariantError("inner path must be non-decreasing");
  const double c = outer.total_kill_rate();
  if (c == 0.0 && outer.is_drift_only()) {
    const double b = outer.drift_rate();
    std::vector<double> v(vals.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::isinf(vals[k]) ? kInf : (b == 0.0 ? 0.0 : b * vals[k]);
    if (b == 0.0) return PathSkeleton(inner.grid_ptr(), std::vector<double>(vals.size(), 0.0), {}, kInf, true, true);
    std::vector<Jump> jumps = inner.jumps();
    for (auto& j : jumps) j.size *= b;
    PathSkeleton p(inner.grid_ptr(), std::move(v), std::move(jumps), inner.kill_time(), inner.exact_inversion(),
                   inner.complete_beyond_window());
    p.set_tail_bound(inner.tail_bound());
    return p;
  }
  const double zeta = c > 0.0 ? rng.exponential() / c : kInf;
  const auto g = inner.grid();
  std::vector<double> out(vals.size(), 0.0);
  double kill = inner.kill_time();
  double level = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const double h = vals[k];
    if (std::isinf(h) || h >= zeta) {
      kill = std::min(kill, g[k]);
      for (std::size_t j = k; j < out.size(); ++j) out[j] = level;
      break;
    }
    level += outer.sample_increment(h - prev, rng);
    prev = h;
    out[k] = level;
  }
  return PathSkeleton(inner.grid_ptr(), std::move(out), {}, kill, false, false);
}

PathSkeleton sum_paths(std::span<const PathSkeleton> paths) {
  if (paths.empty()) throw DomainError("sum of paths needs at least one path");
  if (paths.size() == 1) return paths[0];
  const auto& first = paths[0];
  bool same = true;
  for (const auto& p : paths)
    if (p.grid_ptr() != first.grid_ptr() && p.grid_ptr()->times != first.grid_ptr()->times) same = false;
  double kill = kInf;
  bool exact = true, complete = true;
  double tail = 0.0;
  bool tail_known = true;
  std::vector<Jump> jumps;
  for (const auto& p : paths) {
    kill = std::min(kill, p.kill_time());
    exact = exact && p.exact_inversion();
    complete = complete && p.complete_beyond_window();
    jumps.insert(jumps.end(), p.jumps().begin(), p.jumps().end());
    if (std::isnan(p.tail_bound())) tail_known = tail_known && p.is_lazy() == false;
    else tail += p.tail_bound();
  }
  GridPtr grid = first.grid_ptr();
  if (!same) {
    std::vector<double> times;
    for (const auto& p : paths) times.insert(times.end(), p.grid().begin(), p.grid().end());
    double res = kInf;
    for (const auto& p : paths) res = std::min(res, p.grid_ptr()->resolution);
    grid = make_grid(std::move(times), res);
  }
  std::vector<double> values(grid->size(), 0.0);
  for (const auto& p : paths) {
    if (same) {
      const auto v = p.values();
      for (std::size_t k = 0; k < values.size(); ++k) values[k] += std::isinf(v[k]) ? 0.0 : v[k];
    } else {
      for (std::size_t k = 0; k < values.size(); ++k) {
        const double x = p.value_at(grid->times[k]);
        values[k] += std::isinf(x) ? 0.0 : x;
      }
    }
  }
  for (std::size_t k = 1; k < values.size(); ++k) values[k] = std::max(values[k], values[k - 1]);
  PathSkeleton out(grid, std::move(values), std::move(jumps), kill, exact && same, complete);
  if (!same && exact) out.add_warning("exact inversion downgraded: summands on different grids");
  if (tail > 0.0 && tail_known) out.set_tail_bound(tail);
  for (const auto& p : paths)
    for (const auto& w : p.warnings()) out.add_warning(w);
  return out;
}

}  // namespace minid
