#include "minid/cli/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <random>
#include <sstream>

#include "minid/analytics.hpp"
#include "minid/batch.hpp"
#include "minid/cli/acceptance.hpp"
#include "minid/cli/batch_io.hpp"
#include "minid/cli/spec_io.hpp"
#include "minid/errors.hpp"

namespace minid::cli {

namespace {

constexpr double kDefaultLo = 0.0;
constexpr double kDefaultHi = 10.0;
constexpr double kDefaultStep = 0.01;

// Usage problems detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num10(double x) {
  if (std::isinf(x)) return x > 0 ? "\"+inf\"" : "\"-inf\"";
  if (std::isnan(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "+inf" || item == "inf" || item == "-inf") {
      out.push_back(item == "-inf" ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": malformed number \"" + item + "\"");
    }
  }
  if (out.empty()) throw UsageError(std::string(what) + ": empty list");
  return out;
}

unsigned effective_threads(unsigned flag) {
  if (const char* env = std::getenv("MINID_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw UsageError("MINID_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, flag);
}

DistFn parse_z_law(const std::string& text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto arg = [&] {
    if (colon == std::string::npos) throw UsageError("--z " + name + " needs a parameter");
    return parse_list(text.substr(colon + 1), "--z").at(0);
  };
  if (name == "frechet_unit" || name == "frechet") return DistFn::frechet_unit();
  if (name == "unit_exponential") return DistFn::unit_exponential();
  if (name == "exponential") return DistFn::exponential(arg());
  if (name == "point_mass") return DistFn::point_mass(arg());
  throw UsageError("--z: unknown law \"" + name + "\"");
}

struct SampleArgs {
  std::string model, out, format = "csv";
  std::size_t dim = 0, n = 0;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool shared_path = false;
};

int do_sample(const SampleArgs& a, std::ostream& out, std::ostream& err) {
  if (a.n == 0) throw UsageError("--n must be >= 1");
  if (a.dim == 0) throw UsageError("--dim must be >= 1");
  const auto format = parse_format(a.format);
  const auto spec = load_model_spec(a.model);
  std::uint64_t seed = 0;
  if (a.seed) seed = *a.seed;
  else if (spec.run.seed) seed = *spec.run.seed;
  else seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  SampleOptions opt;
  opt.threads = effective_threads(a.threads);
  opt.share_path = a.shared_path;
  opt.model_digest = spec.digest;
  const auto batch = definetti_sample(spec.model, a.dim, a.n, spec.run.t_lo.value_or(kDefaultLo),
                                      spec.run.t_hi.value_or(kDefaultHi), spec.run.grid_step.value_or(kDefaultStep),
                                      seed, opt);
  write_batch(batch, a.out, format);
  for (const auto& w : batch.meta().warnings) err << "warning: " << w << "\n";
  out << "wrote " << batch.n() << " rows x " << batch.d() << " to " << a.out << " (seed " << seed << ", "
      << batch.censored_count() << " censored)\n";
  return kExitOk;
}

struct SurvivalArgs {
  std::string model, family, psi, z, kappa, t;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

int do_survival(const SurvivalArgs& a, std::ostream& out, std::ostream& err) {
  if (a.model.empty() == a.family.empty()) throw UsageError("give exactly one of --model and --family");
  const auto t = parse_list(a.t, "--t");
  if (!a.family.empty()) {
    Estimate e{0.0, 0.0};
    if (a.family == "mo") {
      if (a.psi.empty()) throw UsageError("--family mo needs --psi");
      e.value = survival_mo(parse_bernstein_short(a.psi), t);
    } else if (a.family == "minstable") {
      e = survival_minstable(parse_z_law(a.z.empty() ? "frechet_unit" : a.z), t, a.n, a.seed);
    } else if (a.family == "reciprocal") {
      if (a.kappa.empty()) throw UsageError("--family reciprocal needs --kappa");
      e = reciprocal_archimedean_survival(parse_radon_short(a.kappa), t, ReciprocalMode::closed_form);
    } else {
      throw UsageError("--family must be mo, minstable or reciprocal");
    }
    out << "{\"value\":" << num10(e.value);
    if (e.error != 0.0) out << ",\"std_error\":" << num10(e.error);
    out << "}\n";
    return kExitOk;
  }
  const auto spec = load_model_spec(a.model);
  std::string closed;
  try {
    closed = num10(std::exp(-exponent_mass(mixture_from_model(*spec.model), t).value));
  } catch (const UnsupportedError& e) {
    err << "note: no closed form for this model (" << e.what() << ")\n";
  }
  double hi = spec.run.t_hi.value_or(kDefaultHi);
  for (double x : t)
    if (std::isfinite(x)) hi = std::max(hi, x);
  const McConfig cfg{a.n, spec.run.t_lo.value_or(kDefaultLo), hi, spec.run.grid_step.value_or(kDefaultStep),
                     spec.run.seed.value_or(a.seed), effective_threads(a.threads)};
  const auto mc = mc_survival_from_model(spec.model, t, cfg);
  out << "{";
  if (!closed.empty()) out << "\"closed_form\":" << closed << ",";
  out << "\"mc\":" << num10(mc.value) << ",\"mc_std_error\":" << num10(mc.error) << "}\n";
  return kExitOk;
}

int do_copula(const std::string& family, const std::string& gen, const std::string& u_text, std::ostream& out) {
  const auto u = parse_list(u_text, "--u");
  double v = 0.0;
  if (family == "archimedean") v = archimedean_copula(parse_bernstein_short(gen), u);
  else if (family == "reciprocal") v = reciprocal_archimedean_copula(parse_radon_short(gen), u);
  else throw UsageError("--family must be archimedean or reciprocal");
  out << "{\"value\":" << num10(v) << "}\n";
  return kExitOk;
}

int do_taildep(const std::string& model, std::size_t dprime, const std::string& probes_text, std::ostream& out) {
  const auto spec = load_model_spec(model);
  const auto probes = parse_list(probes_text, "--probes");
  const auto td = tail_dependence(mixture_from_model(*spec.model), dprime, probes);
  nlohmann::json j = {{"d_prime", dprime},   {"probes", td.probes},     {"masses", td.masses},
                      {"rho", td.rho},       {"estimate", td.estimate}, {"trend", to_string(td.trend)}};
  out << j.dump() << "\n";
  return kExitOk;
}

struct VerifyArgs {
  std::string suite = "core", report = "verify-core.jsonl", only;
  std::uint64_t seed = SuiteOptions{}.seed;
  unsigned threads = 1;
};

int do_verify(const VerifyArgs& a, const std::string& self_path, std::ostream& out, std::ostream& err) {
  if (a.suite != "core") throw UsageError("--suite: only \"core\" is available");
  SuiteOptions opt;
  opt.seed = a.seed;
  opt.threads = effective_threads(a.threads);
  opt.cli_path = self_path;
  if (!a.only.empty())
    for (double x : parse_list(a.only, "--only")) opt.only.push_back(static_cast<int>(x));
  std::ofstream report;
  if (!a.report.empty()) {
    report.open(a.report, std::ios::trunc);
    if (!report) throw Error("cannot open report \"" + a.report + "\"");
  }
  bool all = true;
  run_core_suite(opt, [&](const CriterionResult& r) {
    out << r.summary_line() << std::endl;
    if (report) report << r.to_json() << "\n";
    all = all && r.passed();
  });
  if (!a.report.empty()) err << "report written to " << a.report << "\n";
  return all ? kExitOk : kExitCheckFailed;
}

int do_describe(const std::string& model, std::ostream& out) {
  const auto spec = load_model_spec(model);
  auto doc = spec_document(spec);
  nlohmann::json lines = nlohmann::json::array();
  std::stringstream ss(describe_tree(*spec.model));
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  doc["resolved"] = lines;
  out << doc.dump(2) << "\n";
  return kExitOk;
}

std::string spec_error_text(const SpecError& e) {
  switch (e.kind()) {
    case SpecErrorKind::parse: return "parse error at " + e.where() + ": " + e.what();
    case SpecErrorKind::schema: return "schema error at " + e.where() + ": " + e.what();
    case SpecErrorKind::parameter: return "parameter error at " + e.where() + ": " + e.what();
    case SpecErrorKind::io: return "cannot read " + e.where() + ": " + e.what();
  }
  return e.what();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                const std::string& self_path) {
  CLI::App app{"minid: exchangeable min-id sequences from chronometer models", "minid"};
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "sample a batch by first passage");
  sample->add_option("--model", sa.model, "model spec JSON")->required();
  sample->add_option("--dim", sa.dim, "sequence length d")->required();
  sample->add_option("--n", sa.n, "number of rows")->required();
  sample->add_option("--out", sa.out, "output path")->required();
  sample->add_option("--format", sa.format, "csv or jsonl");
  sample->add_option("--seed", sa.seed, "overrides the spec seed");
  sample->add_option("--threads", sa.threads, "worker threads (MINID_THREADS wins)");
  sample->add_flag("--shared-path", sa.shared_path, "one path for all rows");

  SurvivalArgs su;
  auto* survival = app.add_subcommand("survival", "joint survival P(X > t)");
  survival->add_option("--model", su.model, "model spec JSON (Monte Carlo plus closed form when available)");
  survival->add_option("--family", su.family, "mo, minstable or reciprocal");
  survival->add_option("--psi", su.psi, "Bernstein function, e.g. gamma:1,1");
  survival->add_option("--z", su.z, "min-stable law: frechet_unit, unit_exponential, exponential:r, point_mass:x");
  survival->add_option("--kappa", su.kappa, "galambos:theta or lebesgue[:scale]");
  survival->add_option("--t", su.t, "thresholds t1,t2,...")->required();
  survival->add_option("--n", su.n, "Monte Carlo size");
  survival->add_option("--seed", su.seed, "Monte Carlo seed");
  survival->add_option("--threads", su.threads, "worker threads");

  std::string cfam, cgen, cu;
  auto* copula = app.add_subcommand("copula", "evaluate a survival copula");
  copula->add_option("--family", cfam, "archimedean or reciprocal")->required();
  copula->add_option("--gen", cgen, "generator, e.g. stable:0.7 or galambos:2")->required();
  copula->add_option("--u", cu, "u1,u2,...")->required();

  std::string tmodel, tprobes = "1,2,5,10,20";
  std::size_t tdprime = 2;
  auto* taildep = app.add_subcommand("taildep", "upper tail dependence along probes");
  taildep->add_option("--model", tmodel, "model spec JSON")->required();
  taildep->add_option("--dprime", tdprime, "block size d' >= 2");
  taildep->add_option("--probes", tprobes, "increasing probe thresholds");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  verify->add_option("--suite", va.suite, "suite name")->required();
  verify->add_option("--report", va.report, "JSON-lines report path (empty disables)");
  verify->add_option("--seed", va.seed, "suite seed");
  verify->add_option("--only", va.only, "criterion ids, e.g. 1,3");
  verify->add_option("--threads", va.threads, "worker threads");

  std::string dmodel;
  auto* describe = app.add_subcommand("describe", "print the resolved model spec");
  describe->add_option("--model", dmodel, "model spec JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sample) return do_sample(sa, out, err);
    if (*survival) return do_survival(su, out, err);
    if (*copula) return do_copula(cfam, cgen, cu, out);
    if (*taildep) return do_taildep(tmodel, tdprime, tprobes, out);
    if (*verify) return do_verify(va, self_path, out, err);
    if (*describe) return do_describe(dmodel, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SpecError& e) {
    err << spec_error_text(e) << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}

}  // namespace minid::cli
