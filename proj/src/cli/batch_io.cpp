#include "minid/cli/batch_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "minid/errors.hpp"

namespace minid::cli {

namespace {

constexpr const char* kCensoredPrefix = "cens@";

double parse_double(const std::string& s, std::size_t line) {
  if (s == "+inf" || s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DomainError("line " + std::to_string(line) + ": malformed value \"" + s + "\"");
  return x;
}

std::string cell(const SampleBatch& b, std::size_t i, std::size_t j) {
  const auto v = format_double(b.at(i, j));
  return b.censored(i, j) ? kCensoredPrefix + v : v;
}

}  // namespace

BatchFormat parse_format(const std::string& name) {
  if (name == "csv") return BatchFormat::csv;
  if (name == "jsonl") return BatchFormat::jsonl;
  throw DomainError("unknown batch format \"" + name + "\" (expected csv or jsonl)");
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_csv(const SampleBatch& batch, std::ostream& out) {
  for (std::size_t j = 0; j < batch.d(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < batch.n(); ++i) {
    for (std::size_t j = 0; j < batch.d(); ++j) out << (j ? "," : "") << cell(batch, i, j);
    out << '\n';
  }
}

void write_jsonl(const SampleBatch& batch, std::ostream& out) {
  // Values are written as strings so infinities and censoring survive.
  for (std::size_t i = 0; i < batch.n(); ++i) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t j = 0; j < batch.d(); ++j) {
      const double v = batch.at(i, j);
      const auto key = "x" + std::to_string(j + 1);
      if (batch.censored(i, j) || !std::isfinite(v)) row[key] = cell(batch, i, j);
      else row[key] = v;
    }
    out << row.dump() << '\n';
  }
}

std::string batch_meta_json(const SampleBatch& batch) {
  const auto& m = batch.meta();
  nlohmann::json j = {
      {"model_digest", m.model_digest},
      {"seed", m.seed},
      {"window", {m.t_lo, m.t_hi}},
      {"grid_step", m.grid_step},
      {"n", batch.n()},
      {"d", batch.d()},
      {"orientation", m.orientation == Orientation::min ? "min" : "max"},
      {"shared_path", m.shared_path},
      {"transforms", m.transforms},
      {"censored", batch.censored_count()},
      {"warnings", m.warnings},
      {"tail_bound", m.tail_bound},
  };
  return j.dump(2) + "\n";
}

void write_batch(const SampleBatch& batch, const std::string& path, BatchFormat format) {
  const auto write_file = [](const std::string& p, const auto& fill) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open \"" + p + "\" for writing");
    fill(out);
    out.flush();
    if (!out) throw Error("write to \"" + p + "\" failed");
  };
  write_file(path, [&](std::ostream& o) {
    if (format == BatchFormat::csv) write_csv(batch, o);
    else write_jsonl(batch, o);
  });
  write_file(path + ".meta.json", [&](std::ostream& o) { o << batch_meta_json(batch); });
}

SampleBatch read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty CSV input");
  std::size_t d = 0;
  {
    std::stringstream ss(line);
    std::string h;
    while (std::getline(ss, h, ',')) {
      if (h != "x" + std::to_string(d + 1)) throw DomainError("unexpected CSV header column \"" + h + "\"");
      ++d;
    }
  }
  std::vector<double> data;
  std::vector<std::uint8_t> cens;
  std::size_t n = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string c;
    std::size_t k = 0;
    while (std::getline(ss, c, ',')) {
      const bool is_cens = c.rfind(kCensoredPrefix, 0) == 0;
      data.push_back(parse_double(is_cens ? c.substr(5) : c, lineno));
      cens.push_back(is_cens ? 1 : 0);
      ++k;
    }
    if (k != d) throw DomainError("line " + std::to_string(lineno) + ": expected " + std::to_string(d) + " fields");
    ++n;
  }
  return SampleBatch(n, d, std::move(data), std::move(cens), BatchMeta{});
}

SampleBatch read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open \"" + path + "\"");
  return read_csv(in);
}

}  // namespace minid::cli
