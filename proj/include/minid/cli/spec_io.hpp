#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>

#include "minid/model.hpp"

namespace minid::cli {

enum class SpecErrorKind { parse, schema, parameter, io };

// Structured failure while loading a model specification. `where` is a
// "line:column" position for parse errors and a dotted key path otherwise.
class SpecError : public std::runtime_error {
 public:
  SpecError(SpecErrorKind kind, std::string where, const std::string& message);
  SpecErrorKind kind() const noexcept { return kind_; }
  const std::string& where() const noexcept { return where_; }

 private:
  SpecErrorKind kind_;
  std::string where_;
};

struct RunConfig {
  std::optional<double> t_lo;
  std::optional<double> t_hi;
  std::optional<double> grid_step;
  std::optional<std::uint64_t> seed;
};

struct LoadedSpec {
  ModelPtr model;
  RunConfig run;
  // Canonical JSON of the resolved model; the digest is taken over its dump.
  nlohmann::json canonical;
  std::string digest;
};

LoadedSpec parse_model_spec(const std::string& text);
LoadedSpec load_model_spec(const std::string& path);

// Model document <-> model. model_from_json reports key paths relative to
// `path`.
ModelPtr model_from_json(const nlohmann::json& j, const std::string& path = "model");
nlohmann::json model_to_json(const ChronometerModel& m);

nlohmann::json bernstein_to_json(const BernsteinSpec& b);
BernsteinSpec bernstein_from_json(const nlohmann::json& j, const std::string& path);
// Compact form "gamma:1,1", "stable:0.7", "drift:1", "cp:2,1".
BernsteinSpec parse_bernstein_short(const std::string& text);
nlohmann::json distfn_to_json(const DistFn& g);
DistFn distfn_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json radon_to_json(const RadonMeasure& k);
RadonMeasure radon_from_json(const nlohmann::json& j, const std::string& path);
// Compact form "galambos:theta" or "lebesgue[:scale]".
RadonMeasure parse_radon_short(const std::string& text);

// Full spec document for the resolved model and run configuration.
nlohmann::json spec_document(const LoadedSpec& spec);
// Indented one-line-per-node description.
std::string describe_tree(const ChronometerModel& m);

// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace minid::cli
