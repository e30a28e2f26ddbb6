#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "experiments.hpp"
#include "qsense/error.hpp"
#include "qsense/version.hpp"

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::filesystem::path output_dir(const std::string& flag, const qsense::runner::ExperimentConfig& cfg) {
  if (!flag.empty()) return flag;
  if (cfg.output) return *cfg.output;
  if (const char* env = std::getenv("QSENSE_OUTPUT_DIR"); env && *env) return env;
  return "qsense-out";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qsense::runner;
  CLI::App app{"qsense: quantum metrology simulations"};
  app.set_version_flag("--version", std::string(qsense::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::optional<std::uint64_t> seed_flag;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--seed", seed_flag, "override the config seed");
  run->add_option("--out", out_flag, "output directory");
  run->add_flag("-q,--quiet", quiet, "print nothing on success");
  auto* list = app.add_subcommand("list", "list experiments and their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (list->parsed()) {
    std::cout << catalog_text();
    return 0;
  }

  try {
    auto cfg = load_config(config_path);
    if (seed_flag) cfg.seed = seed_flag;
    const auto dir = output_dir(out_flag, cfg);
    const auto bundle = run_experiment(cfg);
    write_bundle(bundle, dir);
    if (!quiet) {
      std::cout << to_string(cfg.kind) << " -> " << dir.string() << "\n";
      for (const auto& [key, value] : bundle.metrics.items())
        std::cout << "  " << key << " = " << value.dump() << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qsense::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
