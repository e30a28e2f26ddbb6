#pragma once

// Experiment configuration documents.
//
//   {
//     "schema_version": 1,
//     "experiment": "heisenberg-scaling",
//     "seed": 42,
//     "output": "out/heisenberg",
//     "params": { ... }
//   }
//
// Parsing is strict: unknown keys anywhere are rejected, and stochastic
// experiments must carry a seed (in the file or via --seed).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qsense::runner {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { sql_scaling, heisenberg_scaling, angular, spiral, doppler, dispersion, ramsey };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(const std::string& name);
bool is_stochastic(ExperimentKind kind);
std::vector<ExperimentKind> all_kinds();

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ExperimentKind kind = ExperimentKind::angular;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
  json params = json::object();
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Typed access to one parameter block. Every key read is recorded, with its
// resolved value, in `echo()`; finish() rejects keys that were never read.
class Params {
 public:
  Params(const json& block, std::string context);

  double number(const std::string& key, double fallback);
  double positive(const std::string& key, double fallback);
  int integer(const std::string& key, int fallback, int min_value);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback, int min_value);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  // Nested block; empty object when absent.
  Params block(const std::string& key);
  bool has(const std::string& key) const;

  // Throws ConfigError naming every unread key.
  void finish();
  const json& echo() const { return echo_; }
  void adopt(const std::string& key, const Params& nested);

 private:
  const json* find(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  json block_;
  std::string context_;
  std::set<std::string> used_;
  json echo_ = json::object();
};

}  // namespace qsense::runner
