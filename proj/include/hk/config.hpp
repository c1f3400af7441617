#pragma once

// Experiment configuration: JSON with a versioned schema field, optional
// named preset underneath the user's fields, validation with JSON-pointer
// error locations.

#include "hk/corrector.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hk {

inline constexpr int kConfigSchemaVersion = 1;

/// Bad configuration; `pointer` names the offending field ("/operator/p").
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string pointer, const std::string& msg)
      : InvalidArgument(pointer + ": " + msg), pointer_(std::move(pointer))
  {
  }
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct SourceSpec {
  std::string kind = "constant";  // constant | sine
  double value = 1.0;
  double evaluate(const Vec2& x) const;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string preset;
  OperatorSpec spec;
  std::optional<ElasticTensorField> B, C;
  int n = 4;  // cell grid
  int m = 4;  // fine elements per eps-cell and side
  std::vector<double> ladder;
  SolverOptions cell;
  DomainSolveOptions fine;
  HomogenizedOptions hom;
  ChomVariant variant = ChomVariant::CApplied;
  SourceSpec f;
  Vec2 g{0.0, -1.0};
  std::uint64_t seed = 1;
  Vec2 xi{1.0, 0.0};  // loading for the `cell` subcommand
  int samples = 100;  // property-suite sample count
  int threads = 1;
  std::string output_dir = "out";

  nlohmann::ordered_json resolved;  // preset merged with user fields
  std::string hash;                 // sha256 of resolved.dump()
};

/// Built-in preset names.
std::vector<std::string> preset_names();
/// Preset document (fields only, no schema_version).
nlohmann::ordered_json preset(const std::string& name);

/// Validates and resolves a config document.
ExperimentConfig parse_config(const nlohmann::ordered_json& doc);
ExperimentConfig load_config(const std::string& path);

StudyConfig study_config(const ExperimentConfig& c);

/// Lowercase hex sha256.
std::string sha256_hex(const std::string& data);

}  // namespace hk
