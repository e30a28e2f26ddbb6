#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace qsense::runner {

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::sql_scaling, "sql-scaling"},
    {ExperimentKind::heisenberg_scaling, "heisenberg-scaling"},
    {ExperimentKind::angular, "angular"},
    {ExperimentKind::spiral, "spiral"},
    {ExperimentKind::doppler, "doppler"},
    {ExperimentKind::dispersion, "dispersion"},
    {ExperimentKind::ramsey, "ramsey"},
};

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "?";
}

std::optional<ExperimentKind> parse_kind(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  return std::nullopt;
}

bool is_stochastic(ExperimentKind kind) {
  return kind == ExperimentKind::sql_scaling || kind == ExperimentKind::heisenberg_scaling;
}

std::vector<ExperimentKind> all_kinds() {
  std::vector<ExperimentKind> out;
  for (const auto& k : kKinds) out.push_back(k.kind);
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "schema_version") {
      if (!value.is_number_integer()) throw ConfigError("schema_version must be an integer");
      cfg.schema_version = value.get<int>();
    } else if (key == "experiment") {
      if (!value.is_string()) throw ConfigError("experiment must be a string");
      const auto kind = parse_kind(value.get<std::string>());
      if (!kind) throw ConfigError("unknown experiment '" + value.get<std::string>() + "'");
      cfg.kind = *kind;
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "output") {
      if (!value.is_string() || value.get<std::string>().empty())
        throw ConfigError("output must be a non-empty path string");
      cfg.output = value.get<std::string>();
    } else if (key == "params") {
      if (!value.is_object()) throw ConfigError("params must be an object");
      cfg.params = value;
    } else {
      throw ConfigError("unknown top-level key '" + key + "'");
    }
  }
  if (!doc.contains("schema_version")) throw ConfigError("missing schema_version");
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version) +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
  if (!doc.contains("experiment")) throw ConfigError("missing experiment");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

// ---------------------------------------------------------------------------

Params::Params(const json& block, std::string context) : block_(block), context_(std::move(context)) {
  if (!block_.is_object()) throw ConfigError(context_ + " must be an object");
}

const json* Params::find(const std::string& key) {
  used_.insert(key);
  const auto it = block_.find(key);
  return it == block_.end() ? nullptr : &*it;
}

bool Params::has(const std::string& key) const { return block_.contains(key); }

void Params::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(context_ + "." + key + ": " + message);
}

double Params::number(const std::string& key, double fallback) {
  double v = fallback;
  if (const json* j = find(key)) {
    if (!j->is_number()) fail(key, "expected a number");
    v = j->get<double>();
    if (!std::isfinite(v)) fail(key, "must be finite");
  }
  echo_[key] = v;
  return v;
}

double Params::positive(const std::string& key, double fallback) {
  const double v = number(key, fallback);
  if (!(v > 0.0)) fail(key, "must be positive");
  return v;
}

int Params::integer(const std::string& key, int fallback, int min_value) {
  int v = fallback;
  if (const json* j = find(key)) {
    if (!j->is_number_integer()) fail(key, "expected an integer");
    const auto wide = j->get<long long>();
    if (wide > std::numeric_limits<int>::max() || wide < std::numeric_limits<int>::min())
      fail(key, "out of range");
    v = static_cast<int>(wide);
  }
  if (v < min_value) fail(key, "must be >= " + std::to_string(min_value));
  echo_[key] = v;
  return v;
}

bool Params::boolean(const std::string& key, bool fallback) {
  bool v = fallback;
  if (const json* j = find(key)) {
    if (!j->is_boolean()) fail(key, "expected true or false");
    v = j->get<bool>();
  }
  echo_[key] = v;
  return v;
}

std::string Params::text(const std::string& key, const std::string& fallback,
                         const std::vector<std::string>& allowed) {
  std::string v = fallback;
  if (const json* j = find(key)) {
    if (!j->is_string()) fail(key, "expected a string");
    v = j->get<std::string>();
  }
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail(key, "'" + v + "' is not one of: " + list);
  }
  echo_[key] = v;
  return v;
}

std::vector<int> Params::integers(const std::string& key, const std::vector<int>& fallback,
                                  int min_value) {
  std::vector<int> v = fallback;
  if (const json* j = find(key)) {
    if (!j->is_array() || j->empty()) fail(key, "expected a non-empty integer array");
    v.clear();
    for (const auto& e : *j) {
      if (!e.is_number_integer()) fail(key, "expected integers");
      v.push_back(e.get<int>());
    }
  }
  for (int x : v)
    if (x < min_value) fail(key, "values must be >= " + std::to_string(min_value));
  echo_[key] = v;
  return v;
}

std::vector<double> Params::numbers(const std::string& key, const std::vector<double>& fallback) {
  std::vector<double> v = fallback;
  if (const json* j = find(key)) {
    if (!j->is_array() || j->empty()) fail(key, "expected a non-empty number array");
    v.clear();
    for (const auto& e : *j) {
      if (!e.is_number()) fail(key, "expected numbers");
      v.push_back(e.get<double>());
    }
  }
  for (double x : v)
    if (!std::isfinite(x)) fail(key, "values must be finite");
  echo_[key] = v;
  return v;
}

Params Params::block(const std::string& key) {
  const json* j = find(key);
  if (j && !j->is_object()) fail(key, "expected an object");
  return Params(j ? *j : json::object(), context_ + "." + key);
}

void Params::adopt(const std::string& key, const Params& nested) { echo_[key] = nested.echo(); }

void Params::finish() {
  std::string unknown;
  for (const auto& [key, value] : block_.items())
    if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError(context_ + ": unknown key(s) " + unknown);
}

}  // namespace qsense::runner
