#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"

namespace qsense::runner {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
  std::string header() const { return name + "[" + unit + "]"; }
};

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

// Shortest decimal form that reads back to the same double.
std::string format_number(double value);
// RFC 4180 quoting: fields containing a comma, quote, CR or LF are quoted and
// embedded quotes doubled.
std::string quote_field(const std::string& field);
std::string to_csv(const Table& table);

struct ResultBundle {
  ExperimentConfig config;
  json resolved_params = json::object();
  std::vector<Table> tables;
  json metrics = json::object();
};

// Deterministic summary document: config echo, table index and metrics.
json summary_document(const ResultBundle& bundle);

// Writes <table>.csv files, summary.json and provenance.json into a staging
// directory next to `out_dir`, then renames it into place. An existing
// `out_dir` is replaced only after staging succeeds.
void write_bundle(const ResultBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace qsense::runner
