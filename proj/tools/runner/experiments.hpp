#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "table.hpp"

namespace qsense::runner {

struct ParamDoc {
  std::string name;
  std::string fallback;
  std::string description;
};

struct CatalogEntry {
  ExperimentKind kind;
  std::string topic;  // short topic tag, e.g. "[phase estimation]"
  std::string summary;
  std::vector<ParamDoc> params;
};

const std::vector<CatalogEntry>& catalog();
std::string catalog_text();

// Validates the parameter block and runs the experiment. Throws ConfigError
// for bad parameters and qsense::Error subclasses for numerical failures.
ResultBundle run_experiment(const ExperimentConfig& config);

}  // namespace qsense::runner
