#include "minid/cli/spec_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "minid/errors.hpp"

namespace minid::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void schema(const std::string& path, const std::string& msg) {
  throw SpecError(SpecErrorKind::schema, path, msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema(path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) schema(join(path, k), "unknown key");
}

const json& field(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) schema(join(path, key), "missing required key");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "+inf" || s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  schema(path, "expected a number");
}

double number(const json& j, const std::string& path, const char* key) {
  return as_number(field(j, path, key), join(path, key));
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  return j.contains(key) ? number(j, path, key) : fallback;
}

std::string string_field(const json& j, const std::string& path, const char* key) {
  const auto& v = field(j, path, key);
  if (!v.is_string()) schema(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& path, const char* key) {
  const auto& v = field(j, path, key);
  const auto p = join(path, key);
  if (!v.is_array()) schema(p, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], index(p, i)));
  return out;
}

std::size_t count_field(const json& j, const std::string& path, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    schema(join(path, key), "expected a non-negative integer");
  return v.get<std::size_t>();
}

json num(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  return x;
}

// Runs a factory and turns its validation errors into parameter errors at
// `path`.
template <class F>
auto guarded(const std::string& path, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    throw SpecError(SpecErrorKind::parameter, path, e.what());
  }
}

DriftFn drift_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  const auto kind = string_field(j, path, "kind");
  return guarded(path, [&] {
    if (kind == "zero") {
      allow_keys(j, path, {"kind"});
      return DriftFn::zero();
    }
    if (kind == "linear") {
      allow_keys(j, path, {"kind", "rate"});
      return DriftFn::linear(number(j, path, "rate"));
    }
    if (kind == "table") {
      allow_keys(j, path, {"kind", "knots", "values", "interpolation"});
      const auto interp = j.contains("interpolation") ? string_field(j, path, "interpolation") : "step";
      if (interp != "step" && interp != "linear") schema(join(path, "interpolation"), "expected \"step\" or \"linear\"");
      return DriftFn::table(number_list(j, path, "knots"), number_list(j, path, "values"), interp == "step");
    }
    schema(join(path, "kind"), "unknown drift kind \"" + kind + "\"");
  });
}

json drift_to_json(const DriftFn& b) {
  switch (b.kind()) {
    case DriftFn::Kind::zero: return {{"kind", "zero"}};
    case DriftFn::Kind::linear: return {{"kind", "linear"}, {"rate", b.rate()}};
    case DriftFn::Kind::table: {
      json k = json::array(), v = json::array();
      for (double x : b.knots()) k.push_back(num(x));
      for (double x : b.values()) v.push_back(num(x));
      return {{"kind", "table"}, {"knots", k}, {"values", v}, {"interpolation", b.is_step() ? "step" : "linear"}};
    }
  }
  return {};
}

MonotoneMap map_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  const auto kind = string_field(j, path, "kind");
  return guarded(path, [&] {
    if (kind == "affine") {
      allow_keys(j, path, {"kind", "scale", "shift"});
      return MonotoneMap::affine(number(j, path, "scale"), number_or(j, path, "shift", 0.0));
    }
    if (kind == "ceiling") {
      allow_keys(j, path, {"kind"});
      return MonotoneMap::ceiling();
    }
    if (kind == "floor") {
      allow_keys(j, path, {"kind"});
      return MonotoneMap::floor();
    }
    if (kind == "table") {
      allow_keys(j, path, {"kind", "knots", "values"});
      return MonotoneMap::table(number_list(j, path, "knots"), number_list(j, path, "values"));
    }
    schema(join(path, "kind"), "unknown map kind \"" + kind + "\"");
  });
}

json map_to_json(const MonotoneMap& f) {
  using K = MonotoneMap::Kind;
  switch (f.kind()) {
    case K::affine: return {{"kind", "affine"}, {"scale", f.scale()}, {"shift", f.shift()}};
    case K::ceiling: return {{"kind", "ceiling"}};
    case K::floor: return {{"kind", "floor"}};
    case K::table: {
      json k = json::array(), v = json::array();
      for (double x : f.knots()) k.push_back(num(x));
      for (double x : f.values()) v.push_back(num(x));
      return {{"kind", "table"}, {"knots", k}, {"values", v}};
    }
  }
  return {};
}

std::optional<Truncation> truncation_from_json(const json& j, const std::string& path) {
  if (!j.contains("truncation")) return std::nullopt;
  const auto p = join(path, "truncation");
  const auto& t = j["truncation"];
  require_object(t, p);
  allow_keys(t, p, {"s", "eps"});
  return Truncation{number(t, p, "s"), number(t, p, "eps")};
}

ModelPtr apply_truncation(ModelPtr m, const std::optional<Truncation>& t, const std::string& path) {
  if (!t) return m;
  return guarded(join(path, "truncation"), [&] { return truncate_levy(m, t->horizon, t->eps); });
}

void add_truncation(json& out, const std::optional<Truncation>& t) {
  if (t) out["truncation"] = {{"s", num(t->horizon)}, {"eps", num(t->eps)}};
}

void tree(const ChronometerModel& m, int depth, std::ostringstream& os);

}  // namespace

SpecError::SpecError(SpecErrorKind kind, std::string where, const std::string& message)
    : std::runtime_error(message), kind_(kind), where_(std::move(where)) {}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

BernsteinSpec bernstein_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  const auto family = string_field(j, path, "family");
  return guarded(path, [&] {
    BernsteinSpec b = BernsteinSpec::drift(0.0);
    if (family == "drift") {
      allow_keys(j, path, {"family", "rate", "kill_rate"});
      b = BernsteinSpec::drift(number(j, path, "rate"));
    } else if (family == "gamma") {
      allow_keys(j, path, {"family", "shape", "rate", "kill_rate"});
      b = BernsteinSpec::gamma(number(j, path, "shape"), number(j, path, "rate"));
    } else if (family == "stable") {
      allow_keys(j, path, {"family", "alpha", "scale", "kill_rate"});
      b = BernsteinSpec::stable(number(j, path, "alpha"), number_or(j, path, "scale", 1.0));
    } else if (family == "cp_exponential") {
      allow_keys(j, path, {"family", "intensity", "jump_rate", "kill_rate"});
      b = BernsteinSpec::cp_exponential(number(j, path, "intensity"), number(j, path, "jump_rate"));
    } else if (family == "sum") {
      allow_keys(j, path, {"family", "terms", "kill_rate"});
      const auto& t = field(j, path, "terms");
      if (!t.is_array()) schema(join(path, "terms"), "expected an array");
      std::vector<BernsteinSpec> terms;
      for (std::size_t i = 0; i < t.size(); ++i) terms.push_back(bernstein_from_json(t[i], index(join(path, "terms"), i)));
      b = BernsteinSpec::sum(std::move(terms));
    } else {
      schema(join(path, "family"), "unknown Bernstein family \"" + family + "\"");
    }
    if (j.contains("kill_rate")) b = b.with_kill_rate(number(j, path, "kill_rate"));
    return b;
  });
}

json bernstein_to_json(const BernsteinSpec& b) {
  using F = BernsteinSpec::Family;
  json j;
  switch (b.family()) {
    case F::drift: j = {{"family", "drift"}, {"rate", b.p1()}}; break;
    case F::gamma: j = {{"family", "gamma"}, {"shape", b.p1()}, {"rate", b.p2()}}; break;
    case F::stable: j = {{"family", "stable"}, {"alpha", b.p1()}, {"scale", b.p2()}}; break;
    case F::cp_exponential: j = {{"family", "cp_exponential"}, {"intensity", b.p1()}, {"jump_rate", b.p2()}}; break;
    case F::sum: {
      json t = json::array();
      for (const auto& x : b.terms()) t.push_back(bernstein_to_json(x));
      j = {{"family", "sum"}, {"terms", t}};
      break;
    }
  }
  if (b.kill_rate() != 0.0) j["kill_rate"] = b.kill_rate();
  return j;
}

BernsteinSpec parse_bernstein_short(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        args.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw SpecError(SpecErrorKind::schema, text, "malformed number \"" + item + "\"");
      }
    }
  }
  const auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw SpecError(SpecErrorKind::schema, text, "wrong number of parameters for \"" + name + "\"");
  };
  return guarded(text, [&] {
    if (name == "gamma") {
      need(2, 2);
      return BernsteinSpec::gamma(args[0], args[1]);
    }
    if (name == "stable") {
      need(1, 2);
      return BernsteinSpec::stable(args[0], args.size() > 1 ? args[1] : 1.0);
    }
    if (name == "drift") {
      need(1, 1);
      return BernsteinSpec::drift(args[0]);
    }
    if (name == "cp" || name == "cp_exponential") {
      need(2, 2);
      return BernsteinSpec::cp_exponential(args[0], args[1]);
    }
    throw SpecError(SpecErrorKind::schema, text, "unknown Bernstein family \"" + name + "\"");
  });
}

DistFn distfn_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  const auto family = string_field(j, path, "family");
  return guarded(path, [&] {
    DistFn g = DistFn::unit_exponential();
    if (family == "exponential") {
      allow_keys(j, path, {"family", "rate", "defect"});
      g = DistFn::exponential(number(j, path, "rate"));
    } else if (family == "unit_exponential") {
      allow_keys(j, path, {"family", "defect"});
    } else if (family == "frechet_unit") {
      allow_keys(j, path, {"family", "defect"});
      g = DistFn::frechet_unit();
    } else if (family == "point_mass") {
      allow_keys(j, path, {"family", "at", "defect"});
      g = DistFn::point_mass(number(j, path, "at"));
    } else if (family == "scaled") {
      allow_keys(j, path, {"family", "base", "scale", "defect"});
      g = DistFn::scaled(distfn_from_json(field(j, path, "base"), join(path, "base")), number(j, path, "scale"));
    } else if (family == "empirical") {
      allow_keys(j, path, {"family", "steps", "defect"});
      const auto& s = field(j, path, "steps");
      const auto p = join(path, "steps");
      if (!s.is_array()) schema(p, "expected an array of [t, G(t)] pairs");
      std::vector<std::pair<double, double>> steps;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_array() || s[i].size() != 2) schema(index(p, i), "expected a [t, G(t)] pair");
        steps.emplace_back(as_number(s[i][0], index(p, i)), as_number(s[i][1], index(p, i)));
      }
      g = DistFn::empirical(std::move(steps));
    } else if (family == "path_transform") {
      allow_keys(j, path, {"family", "path", "infinite_from", "defect"});
      g = DistFn::path_transform(drift_from_json(field(j, path, "path"), join(path, "path")),
                                 number_or(j, path, "infinite_from", kInf));
    } else {
      schema(join(path, "family"), "unknown distribution family \"" + family + "\"");
    }
    if (j.contains("defect")) g = g.with_defect(number(j, path, "defect"));
    return g;
  });
}

json distfn_to_json(const DistFn& g) {
  using F = DistFn::Family;
  json j;
  switch (g.family()) {
    case F::exponential: j = {{"family", "exponential"}, {"rate", g.param()}}; break;
    case F::frechet_unit: j = {{"family", "frechet_unit"}}; break;
    case F::unit_exponential: j = {{"family", "unit_exponential"}}; break;
    case F::point_mass: j = {{"family", "point_mass"}, {"at", num(g.param())}}; break;
    case F::scaled: j = {{"family", "scaled"}, {"base", distfn_to_json(g.base())}, {"scale", g.param()}}; break;
    case F::empirical: {
      json s = json::array();
      for (const auto& [t, p] : g.steps()) s.push_back(json::array({num(t), p}));
      j = {{"family", "empirical"}, {"steps", s}};
      break;
    }
    case F::path_transform:
      j = {{"family", "path_transform"}, {"path", drift_to_json(g.path())}, {"infinite_from", num(g.param())}};
      break;
  }
  if (g.explicit_defect() != 0.0) j["defect"] = g.explicit_defect();
  return j;
}

RadonMeasure radon_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  const auto kind = string_field(j, path, "kind");
  return guarded(path, [&] {
    if (kind == "lebesgue") {
      allow_keys(j, path, {"kind", "scale"});
      return RadonMeasure::lebesgue(number_or(j, path, "scale", 1.0));
    }
    if (kind == "galambos") {
      allow_keys(j, path, {"kind", "theta"});
      return RadonMeasure::galambos(number(j, path, "theta"));
    }
    if (kind == "power" || kind == "atoms") {
      allow_keys(j, path, {"kind", "coef", "power", "atoms"});
      std::vector<RadonMeasure::Atom> atoms;
      if (j.contains("atoms")) {
        const auto& a = j["atoms"];
        const auto p = join(path, "atoms");
        if (!a.is_array()) schema(p, "expected an array of [at, weight] pairs");
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (!a[i].is_array() || a[i].size() != 2) schema(index(p, i), "expected an [at, weight] pair");
          atoms.push_back({as_number(a[i][0], index(p, i)), as_number(a[i][1], index(p, i))});
        }
      }
      const double coef = kind == "atoms" ? 0.0 : number(j, path, "coef");
      const double power = kind == "atoms" ? 1.0 : number(j, path, "power");
      return RadonMeasure(coef, power, std::move(atoms));
    }
    schema(join(path, "kind"), "unknown measure kind \"" + kind + "\"");
  });
}

json radon_to_json(const RadonMeasure& k) {
  json atoms = json::array();
  for (const auto& a : k.atoms()) atoms.push_back(json::array({a.at, a.weight}));
  return {{"kind", "power"}, {"coef", k.coef()}, {"power", k.power()}, {"atoms", atoms}};
}

RadonMeasure parse_radon_short(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  double arg = 1.0;
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      const auto s = text.substr(colon + 1);
      arg = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw SpecError(SpecErrorKind::schema, text, "malformed number");
    }
  }
  return guarded(text, [&] {
    if (name == "galambos") return RadonMeasure::galambos(arg);
    if (name == "lebesgue") return RadonMeasure::lebesgue(arg);
    throw SpecError(SpecErrorKind::schema, text, "unknown measure \"" + name + "\"");
  });
}

ModelPtr model_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  const auto type = string_field(j, path, "type");
  const auto p = [&](const char* key) { return join(path, key); };
  if (type == "drift") {
    allow_keys(j, path, {"type", "drift"});
    const auto b = drift_from_json(field(j, path, "drift"), p("drift"));
    return guarded(path, [&] { return drift_model(b); });
  }
  if (type == "levy_subordinator" || type == "additive_subordinator") {
    const bool additive = type == "additive_subordinator";
    if (additive) allow_keys(j, path, {"type", "clock", "psi", "kill_rate", "truncation"});
    else allow_keys(j, path, {"type", "psi", "kill_rate", "truncation"});
    auto psi = bernstein_from_json(field(j, path, "psi"), p("psi"));
    if (j.contains("kill_rate")) {
      const double c = number(j, path, "kill_rate");
      psi = guarded(p("kill_rate"), [&] { return psi.with_kill_rate(psi.kill_rate() + c); });
    }
    const auto tr = truncation_from_json(j, path);
    ModelPtr m = additive ? guarded(path, [&] {
      return additive_model(drift_from_json(field(j, path, "clock"), p("clock")), psi);
    })
                          : guarded(path, [&] { return levy_model(psi); });
    return apply_truncation(m, tr, path);
  }
  if (type == "strong_idt") {
    allow_keys(j, path, {"type", "kappa", "rho", "max_terms", "truncation"});
    const auto kappa = radon_from_json(field(j, path, "kappa"), p("kappa"));
    const auto& r = field(j, path, "rho");
    std::vector<WeightedDist> rho;
    if (r.is_object()) {
      rho.push_back({1.0, distfn_from_json(r, p("rho"))});
    } else if (r.is_array()) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        const auto ip = index(p("rho"), i);
        require_object(r[i], ip);
        allow_keys(r[i], ip, {"weight", "dist"});
        rho.push_back({number(r[i], ip, "weight"), distfn_from_json(field(r[i], ip, "dist"), join(ip, "dist"))});
      }
    } else {
      schema(p("rho"), "expected a distribution or a list of {weight, dist}");
    }
    const auto k = count_field(j, path, "max_terms", 1000);
    const auto tr = truncation_from_json(j, path);
    return apply_truncation(guarded(path, [&] { return strong_idt_model(kappa, rho, k); }), tr, path);
  }
  if (type == "frailty") {
    allow_keys(j, path, {"type", "drift_rate", "mixing"});
    const auto mix = bernstein_from_json(field(j, path, "mixing"), p("mixing"));
    const double b = number_or(j, path, "drift_rate", 0.0);
    return guarded(path, [&] { return frailty_model(b, mix); });
  }
  if (type == "dirichlet") {
    allow_keys(j, path, {"type", "concentration", "base", "sticks"});
    const auto base = distfn_from_json(field(j, path, "base"), p("base"));
    const double a = number(j, path, "concentration");
    const auto k = count_field(j, path, "sticks", 1000);
    return guarded(path, [&] { return dirichlet_model(a, base, k); });
  }
  if (type == "compound_poisson_paths") {
    allow_keys(j, path, {"type", "mass", "atoms", "truncation"});
    const auto& a = field(j, path, "atoms");
    if (!a.is_array()) schema(p("atoms"), "expected an array");
    std::vector<node::PathAtom> atoms;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto ip = index(p("atoms"), i);
      require_object(a[i], ip);
      allow_keys(a[i], ip, {"weight", "path", "infinite_from"});
      atoms.push_back({number(a[i], ip, "weight"), drift_from_json(field(a[i], ip, "path"), join(ip, "path")),
                       number_or(a[i], ip, "infinite_from", kInf)});
    }
    const double mass = number(j, path, "mass");
    const auto tr = truncation_from_json(j, path);
    return apply_truncation(guarded(path, [&] { return compound_poisson_model(mass, atoms); }), tr, path);
  }
  if (type == "comonotone") {
    allow_keys(j, path, {"type", "law"});
    const auto law = distfn_from_json(field(j, path, "law"), p("law"));
    return guarded(path, [&] { return comonotone_model(law); });
  }
  if (type == "sum") {
    allow_keys(j, path, {"type", "terms"});
    const auto& t = field(j, path, "terms");
    if (!t.is_array()) schema(p("terms"), "expected an array");
    std::vector<ModelPtr> terms;
    for (std::size_t i = 0; i < t.size(); ++i) terms.push_back(model_from_json(t[i], index(p("terms"), i)));
    return guarded(path, [&] { return sum_model(terms); });
  }
  if (type == "subordinated") {
    allow_keys(j, path, {"type", "outer", "inner"});
    const auto outer = bernstein_from_json(field(j, path, "outer"), p("outer"));
    const auto inner = model_from_json(field(j, path, "inner"), p("inner"));
    return guarded(path, [&] { return subordinated_model(outer, inner); });
  }
  if (type == "integrated") {
    allow_keys(j, path, {"type", "inner", "kappa"});
    const auto inner = model_from_json(field(j, path, "inner"), p("inner"));
    const auto kappa = radon_from_json(field(j, path, "kappa"), p("kappa"));
    return guarded(path, [&] { return integrated_model(inner, kappa); });
  }
  if (type == "time_changed") {
    allow_keys(j, path, {"type", "inner", "map"});
    const auto inner = model_from_json(field(j, path, "inner"), p("inner"));
    const auto map = map_from_json(field(j, path, "map"), p("map"));
    return guarded(path, [&] { return time_changed_model(inner, map); });
  }
  schema(p("type"), "unknown model type \"" + type + "\"");
}

json model_to_json(const ChronometerModel& m) {
  return std::visit(
      [&](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Drift>) {
          return {{"type", "drift"}, {"drift", drift_to_json(n.b)}};
        } else if constexpr (std::is_same_v<T, node::LevySubordinator>) {
          json j = {{"type", "levy_subordinator"}, {"psi", bernstein_to_json(n.psi)}};
          add_truncation(j, n.truncation);
          return j;
        } else if constexpr (std::is_same_v<T, node::AdditiveSubordinator>) {
          json j = {{"type", "additive_subordinator"}, {"clock", drift_to_json(n.clock)}, {"psi", bernstein_to_json(n.psi)}};
          add_truncation(j, n.truncation);
          return j;
        } else if constexpr (std::is_same_v<T, node::StrongIdt>) {
          json rho = json::array();
          for (const auto& r : n.rho) rho.push_back({{"weight", r.weight}, {"dist", distfn_to_json(r.dist)}});
          json j = {{"type", "strong_idt"}, {"kappa", radon_to_json(n.kappa)}, {"rho", rho}, {"max_terms", n.max_terms}};
          add_truncation(j, n.truncation);
          return j;
        } else if constexpr (std::is_same_v<T, node::Frailty>) {
          return {{"type", "frailty"}, {"drift_rate", n.drift_rate}, {"mixing", bernstein_to_json(n.mixing)}};
        } else if constexpr (std::is_same_v<T, node::Dirichlet>) {
          return {{"type", "dirichlet"},
                  {"concentration", n.concentration},
                  {"base", distfn_to_json(n.base)},
                  {"sticks", n.sticks}};
        } else if constexpr (std::is_same_v<T, node::CompoundPoissonPaths>) {
          json atoms = json::array();
          for (const auto& a : n.atoms)
            atoms.push_back({{"weight", a.weight}, {"path", drift_to_json(a.shape)}, {"infinite_from", num(a.infinite_from)}});
          return {{"type", "compound_poisson_paths"}, {"mass", n.mass}, {"atoms", atoms}};
        } else if constexpr (std::is_same_v<T, node::Comonotone>) {
          return {{"type", "comonotone"}, {"law", distfn_to_json(n.law)}};
        } else if constexpr (std::is_same_v<T, node::Sum>) {
          json t = json::array();
          for (const auto& x : n.terms) t.push_back(model_to_json(*x));
          return {{"type", "sum"}, {"terms", t}};
        } else if constexpr (std::is_same_v<T, node::Subordinated>) {
          return {{"type", "subordinated"}, {"outer", bernstein_to_json(n.outer)}, {"inner", model_to_json(*n.inner)}};
        } else if constexpr (std::is_same_v<T, node::Integrated>) {
          return {{"type", "integrated"}, {"inner", model_to_json(*n.inner)}, {"kappa", radon_to_json(n.kappa)}};
        } else {
          return {{"type", "time_changed"}, {"inner", model_to_json(*n.inner)}, {"map", map_to_json(n.map)}};
        }
      },
      m.node());
}

LoadedSpec parse_model_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // translate the byte offset into line:column
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SpecError(SpecErrorKind::parse, std::to_string(line) + ":" + std::to_string(col), e.what());
  }
  require_object(doc, "");
  allow_keys(doc, "", {"model", "window", "grid_step", "seed", "digest", "resolved"});
  LoadedSpec out;
  out.model = model_from_json(field(doc, "", "model"), "model");
  if (doc.contains("window")) {
    const auto w = number_list(doc, "", "window");
    if (w.size() != 2) schema("window", "expected [lo, hi]");
    if (!(std::isfinite(w[0]) && std::isfinite(w[1]) && w[0] < w[1]))
      throw SpecError(SpecErrorKind::parameter, "window", "window must satisfy lo < hi, both finite");
    out.run.t_lo = w[0];
    out.run.t_hi = w[1];
  }
  if (doc.contains("grid_step")) {
    const double s = number(doc, "", "grid_step");
    if (!(s > 0.0) || !std::isfinite(s)) throw SpecError(SpecErrorKind::parameter, "grid_step", "grid_step must be > 0");
    out.run.grid_step = s;
  }
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      schema("seed", "expected a non-negative integer");
    out.run.seed = s.get<std::uint64_t>();
  }
  out.canonical = model_to_json(*out.model);
  out.digest = fnv1a_hex(out.canonical.dump());
  return out;
}

LoadedSpec load_model_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError(SpecErrorKind::io, path, "cannot open model spec file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_spec(ss.str());
}

json spec_document(const LoadedSpec& spec) {
  json doc;
  doc["model"] = spec.canonical;
  if (spec.run.t_lo && spec.run.t_hi) doc["window"] = {*spec.run.t_lo, *spec.run.t_hi};
  if (spec.run.grid_step) doc["grid_step"] = *spec.run.grid_step;
  if (spec.run.seed) doc["seed"] = *spec.run.seed;
  doc["digest"] = spec.digest;
  return doc;
}

namespace {

void tree(const ChronometerModel& m, int depth, std::ostringstream& os) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        os << pad << m.type_name();
        if constexpr (std::is_same_v<T, node::LevySubordinator> || std::is_same_v<T, node::AdditiveSubordinator>) {
          os << " psi=" << n.psi.describe();
          if (n.truncation) os << " truncated(s=" << n.truncation->horizon << ", eps=" << n.truncation->eps << ")";
        } else if constexpr (std::is_same_v<T, node::StrongIdt>) {
          os << " kappa(coef=" << n.kappa.coef() << ", power=" << n.kappa.power() << ", atoms=" << n.kappa.atoms().size()
             << ") rho=" << n.rho.size() << " law(s) max_terms=" << n.max_terms;
          if (n.truncation) os << " truncated(s=" << n.truncation->horizon << ", eps=" << n.truncation->eps << ")";
        } else if constexpr (std::is_same_v<T, node::Frailty>) {
          os << " b=" << n.drift_rate << " M~" << n.mixing.describe();
        } else if constexpr (std::is_same_v<T, node::Dirichlet>) {
          os << " alpha=" << n.concentration << " base=" << n.base.describe() << " sticks=" << n.sticks;
        } else if constexpr (std::is_same_v<T, node::CompoundPoissonPaths>) {
          os << " mass=" << n.mass << " atoms=" << n.atoms.size();
        } else if constexpr (std::is_same_v<T, node::Comonotone>) {
          os << " law=" << n.law.describe();
        } else if constexpr (std::is_same_v<T, node::Subordinated>) {
          os << " outer=" << n.outer.describe();
        }
        os << "\n";
        if constexpr (std::is_same_v<T, node::Sum>) {
          for (const auto& t : n.terms) tree(*t, depth + 1, os);
        } else if constexpr (std::is_same_v<T, node::Subordinated> || std::is_same_v<T, node::Integrated> ||
                             std::is_same_v<T, node::TimeChanged>) {
          tree(*n.inner, depth + 1, os);
        }
      },
      m.node());
}

}  // namespace

std::string describe_tree(const ChronometerModel& m) {
  std::ostringstream os;
  tree(m, 0, os);
  return os.str();
}

}  // namespace minid::cli
