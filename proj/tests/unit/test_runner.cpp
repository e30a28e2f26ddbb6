#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "experiments.hpp"

using namespace qsense::runner;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("qsense-test-" + std::to_string(::getpid()) + "-" +
                                                   std::to_string(counter_++))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QSENSE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesMinimal) {
  const auto c = parse_config(R"({"schema_version": 1, "experiment": "angular"})");
  EXPECT_EQ(c.kind, ExperimentKind::angular);
  EXPECT_FALSE(c.seed.has_value());
}

TEST(Config, StrictTopLevel) {
  EXPECT_THROW(parse_config(R"({"schema_version": 1, "experiment": "angular", "extra": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"schema_version": 2, "experiment": "angular"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": "angular"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"schema_version": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"schema_version": 1, "experiment": "bogus"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"schema_version": 1, "experiment": "angular", "seed": -3})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(Config, StrictParams) {
  auto c = parse_config(R"({"schema_version": 1, "experiment": "angular", "params": {"ll": 2}})");
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = parse_config(R"({"schema_version": 1, "experiment": "angular", "params": {"l": "two"}})");
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = parse_config(R"({"schema_version": 1, "experiment": "angular", "params": {"l": 0}})");
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Config, SeedRequiredForStochasticKinds) {
  const auto c = parse_config(R"({"schema_version": 1, "experiment": "sql-scaling"})");
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1e300), "1e+300");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Csv, QuotingAndUnits) {
  EXPECT_EQ(quote_field("plain"), "plain");
  EXPECT_EQ(quote_field("a,b"), "\"a,b\"");
  EXPECT_EQ(quote_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  Table t{"t", {{"delta_phi", "rad"}, {"label", "1"}}, {}};
  t.add({0.5, std::string("x,y")});
  EXPECT_EQ(to_csv(t), "delta_phi[rad],label[1]\n0.5,\"x,y\"\n");
  EXPECT_THROW(t.add({1.0}), std::logic_error);
}

TEST(Run, HeisenbergTableHasAnalyticColumn) {
  const auto c = parse_config(
      R"({"schema_version": 1, "experiment": "heisenberg-scaling", "seed": 3,
          "params": {"repetitions": 20, "trials_per_repetition": 10}})");
  const auto b = run_experiment(c);
  ASSERT_EQ(b.tables.size(), 1u);
  const auto& t = b.tables[0];
  EXPECT_EQ(t.columns[1].header(), "delta_phi_analytic[rad]");
  ASSERT_EQ(t.rows.size(), 5u);
  for (const auto& row : t.rows) {
    const double n = static_cast<double>(std::get<std::int64_t>(row[0]));
    EXPECT_NEAR(std::get<double>(row[1]), 1.0 / n, 1e-12);
  }
}

TEST(Run, AngularFringeIsCosSquaredFourTheta) {
  const auto b = run_experiment(parse_config(R"({"schema_version": 1, "experiment": "angular", "params": {"l": 2}})"));
  for (const auto& row : b.tables[0].rows) {
    const double theta = std::get<double>(row[0]);
    EXPECT_NEAR(std::get<double>(row[1]), std::pow(std::cos(4 * theta), 2), 1e-12);
  }
  for (const auto& col : b.tables[0].columns) EXPECT_FALSE(col.unit.empty());
}

TEST(Catalog, CoversEveryKindWithTopicTag) {
  EXPECT_GE(catalog().size(), 7u);
  for (auto kind : all_kinds()) {
    const auto it = std::find_if(catalog().begin(), catalog().end(), [&](const auto& e) { return e.kind == kind; });
    ASSERT_NE(it, catalog().end());
    EXPECT_EQ(it->topic.front(), '[');
    EXPECT_EQ(it->topic.back(), ']');
  }
  EXPECT_EQ(catalog_text(), catalog_text());
}

TEST(Bundle, WritesAtomically) {
  TempDir dir;
  const auto out = dir.path() / "run";
  auto b = run_experiment(parse_config(R"({"schema_version": 1, "experiment": "ramsey"})"));
  write_bundle(b, out);
  EXPECT_TRUE(fs::exists(out / "ramsey.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  EXPECT_TRUE(fs::exists(out / "provenance.json"));
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  write(dir.path() / "bad.json", R"({"schema_version": 1, "experiment": "angular", "oops": true})");
  EXPECT_EQ(run_cli("run " + (dir.path() / "bad.json").string() + " --out " + (dir.path() / "o").string()), 2);
  EXPECT_FALSE(fs::exists(dir.path() / "o"));

  write(dir.path() / "broken.json", "{");
  EXPECT_EQ(run_cli("run " + (dir.path() / "broken.json").string() + " --out " + (dir.path() / "o").string()), 2);
  EXPECT_FALSE(fs::exists(dir.path() / "o"));

  // Ramsey phase pi sits on a fringe extremum: no usable slope.
  write(dir.path() / "flat.json", R"({"schema_version": 1, "experiment": "ramsey", "params": {"times": [3.141592653589793]}})");
  EXPECT_EQ(run_cli("run " + (dir.path() / "flat.json").string() + " --out " + (dir.path() / "o").string()), 3);
  EXPECT_FALSE(fs::exists(dir.path() / "o"));

  write(dir.path() / "ok.json", R"({"schema_version": 1, "experiment": "angular"})");
  EXPECT_EQ(run_cli("run " + (dir.path() / "ok.json").string() + " --quiet --out " + (dir.path() / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "o" / "fringe.csv"));
  EXPECT_EQ(run_cli("list"), 0);
  EXPECT_EQ(run_cli("run"), 2);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  TempDir dir;
  write(dir.path() / "ok.json", R"({"schema_version": 1, "experiment": "ramsey"})");
  const auto target = dir.path() / "from-env";
  const std::string cmd = "QSENSE_OUTPUT_DIR=" + target.string() + " " + QSENSE_CLI + " run " +
                          (dir.path() / "ok.json").string() + " --quiet >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(target / "ramsey.csv"));
}

TEST(Cli, SeedOverrideAndDeterminism) {
  TempDir dir;
  write(dir.path() / "mc.json",
        R"({"schema_version": 1, "experiment": "sql-scaling", "seed": 1,
            "params": {"grid": [4, 8, 16, 32], "repetitions": 20}})");
  const auto cfg = (dir.path() / "mc.json").string();
  ASSERT_EQ(run_cli("run " + cfg + " --seed 9 --quiet --out " + (dir.path() / "a").string()), 0);
  ASSERT_EQ(run_cli("run " + cfg + " --seed 9 --quiet --out " + (dir.path() / "b").string()), 0);
  ASSERT_EQ(run_cli("run " + cfg + " --quiet --out " + (dir.path() / "c").string()), 0);
  for (const char* f : {"scaling.csv", "summary.json"})
    EXPECT_EQ(slurp(dir.path() / "a" / f), slurp(dir.path() / "b" / f)) << f;
  EXPECT_NE(slurp(dir.path() / "a" / "scaling.csv"), slurp(dir.path() / "c" / "scaling.csv"));
  EXPECT_NE(slurp(dir.path() / "a" / "summary.json").find("\"seed\": 9"), std::string::npos);
}
