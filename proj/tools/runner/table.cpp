#include "table.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

#include "qsense/version.hpp"

namespace qsense::runner {

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::logic_error("table " + name + ": row has " + std::to_string(row.size()) +
                           " cells for " + std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

std::string quote_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string cell_text(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return quote_field(std::get<std::string>(cell));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create " + path.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += quote_field(table.columns[c].header());
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += cell_text(row[c]);
    }
    out += '\n';
  }
  return out;
}

json summary_document(const ResultBundle& bundle) {
  json doc;
  doc["schema_version"] = bundle.config.schema_version;
  doc["experiment"] = to_string(bundle.config.kind);
  doc["seed"] = bundle.config.seed ? json(*bundle.config.seed) : json(nullptr);
  doc["params"] = bundle.resolved_params;
  json tables = json::array();
  for (const auto& t : bundle.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    tables.push_back({{"name", t.name}, {"file", t.name + ".csv"}, {"rows", t.rows.size()},
                      {"columns", cols}});
  }
  doc["tables"] = tables;
  doc["metrics"] = bundle.metrics;
  doc["versions"] = {{"qsense", kVersion}};
  return doc;
}

void write_bundle(const ResultBundle& bundle, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(out_dir).lexically_normal();
  const fs::path parent = target.parent_path();
  fs::create_directories(parent);
  const fs::path staging = parent / ("." + target.filename().string() + ".staging-" +
                                     std::to_string(::getpid()));
  fs::remove_all(staging);
  fs::create_directory(staging);
  try {
    for (const auto& t : bundle.tables) write_file(staging / (t.name + ".csv"), to_csv(t));
    write_file(staging / "summary.json", summary_document(bundle).dump(2) + "\n");
    json prov;
    prov["generated_at"] = utc_timestamp();
    prov["qsense_version"] = kVersion;
    write_file(staging / "provenance.json", prov.dump(2) + "\n");

    if (fs::exists(target)) {
      const fs::path old = parent / ("." + target.filename().string() + ".old-" +
                                     std::to_string(::getpid()));
      fs::remove_all(old);
      fs::rename(target, old);
      fs::rename(staging, target);
      fs::remove_all(old);
    } else {
      fs::rename(staging, target);
    }
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

}  // namespace qsense::runner
