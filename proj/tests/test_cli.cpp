#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mpml/cli.hpp"

using namespace mpml;
using mpml::cli::Json;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mpml_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("csv ingestion validates structure and cites offending cells") {
  CHECK(cli::dataset_from_csv_text("x\n1.0\n2.5\n-0.5\n4\n", "t").n() == 4);

  CHECK_THROWS_WITH_AS(cli::dataset_from_csv_text("x\n1.0\n", "t"),
                       doctest::Contains("n >= 2"), std::domain_error);
  CHECK_THROWS_WITH_AS(cli::dataset_from_csv_text("x\n1.0\nabc\n2.0\n", "t"),
                       doctest::Contains("row 3"), config_error);
  CHECK_THROWS_WITH_AS(cli::dataset_from_csv_text("x,y\n1,2\n3,4\n", "t"),
                       doctest::Contains("unknown column"), config_error);
  // Zero-variance covariate violates the regression precondition.
  CHECK_THROWS_WITH_AS(cli::dataset_from_csv_text("x,z\n1,1\n0,1\n1,1\n", "t"),
                       doctest::Contains("zero variance"), std::domain_error);
  // Stratum with a single observation.
  CHECK_THROWS_WITH_AS(
      cli::dataset_from_csv_text("x,stratum\n1,0\n2,0\n3,1\n", "t"),
      doctest::Contains("stratum"), std::domain_error);
}

TEST_CASE("emitted csv round-trips to identical numerical content") {
  Dataset d;
  d.x = {0.1, -2.5e-17, 3.14159265358979312, 7.0};
  d.z = std::vector<double>{1.0, 0.0, 1.0, 0.0};
  const std::string text = cli::dataset_to_csv_text(d);
  const Dataset back = cli::dataset_from_csv_text(text, "roundtrip");
  CHECK(back.x == d.x);
  CHECK(*back.z == *d.z);
}

TEST_CASE("estimate subcommand writes the closed-form values into the report") {
  const fs::path dir = fresh_dir("estimate");
  const fs::path data_path = dir / "data.csv";
  std::ofstream(data_path) << "x\n1.2\n0.8\n2.0\n1.0\n";

  Json cfg;
  cfg["subcommand"] = "estimate";
  cfg["family"] = "normal";
  cfg["dataset"] = data_path.string();
  cfg["out"] = (dir / "out").string();
  cli::RunOptions opts;
  opts.deterministic = true;
  const cli::RunResult res = cli::run_config(cfg, opts);
  CHECK(res.exit_code == 0);

  const Json report = Json::parse(slurp(res.report_path));
  const auto values = report["results"]["post_mean"]["values"];
  CHECK(values[0].get<double>() == doctest::Approx(4.51807228915662651).epsilon(1e-6));
  CHECK(values[1].get<double>() == doctest::Approx(3.61445783132530120).epsilon(1e-6));
}

TEST_CASE("dataset and generator are mutually exclusive") {
  Json cfg;
  cfg["subcommand"] = "estimate";
  cfg["family"] = "normal";
  cfg["dataset"] = "whatever.csv";
  cfg["generator"] = Json{{"lambda", 0.0}, {"psi", 1.0}, {"n", 5}};
  CHECK_THROWS_AS(cli::run_config(cfg, {}), config_error);
}

TEST_CASE("unknown names are rejected with the valid vocabulary") {
  Json cfg;
  cfg["subcommand"] = "estimate";
  cfg["family"] = "triangular";
  cfg["generator"] = Json{{"lambda", 0.0}, {"psi", 1.0}, {"n", 6}};
  cfg["out"] = (fresh_dir("unknown") / "out").string();
  CHECK_THROWS_WITH_AS(cli::run_config(cfg, {}), doctest::Contains("known families"),
                       config_error);
}

TEST_CASE("deterministic runs are byte-identical") {
  for (const char* sub : {"risk-sim", "order-check"}) {
    Json cfg;
    cfg["subcommand"] = sub;
    cfg["family"] = "gamma";
    cfg["truth"] = Json{{"lambda", 1.0}, {"psi", 2.0}};
    cfg["seed"] = 7;
    cfg["deterministic"] = true;
    if (std::string(sub) == "risk-sim") {
      cfg["n"] = 5;
      cfg["replications"] = 120;
      cfg["estimators"] = std::vector<std::string>{"mle", "cml"};
    } else {
      cfg["protocol"] = "mean-vs-cml";
      cfg["ns"] = std::vector<int>{6, 8, 10, 12};
      cfg["replications"] = 4;
    }
    const fs::path d1 = fresh_dir(std::string(sub) + "_1");
    const fs::path d2 = fresh_dir(std::string(sub) + "_2");
    cli::RunOptions o1, o2;
    o1.out_dir = d1.string();
    o2.out_dir = d2.string();
    const cli::RunResult r1 = cli::run_config(cfg, o1);
    const cli::RunResult r2 = cli::run_config(cfg, o2);
    CHECK(slurp(r1.report_path) == slurp(r2.report_path));
    for (const auto& entry : fs::directory_iterator(d1 / "tables")) {
      const fs::path other = d2 / "tables" / entry.path().filename();
      CHECK(slurp(entry.path()) == slurp(other));
    }
  }
}

TEST_CASE("prior-eval surfaces pairwise agreement") {
  Json cfg;
  cfg["subcommand"] = "prior-eval";
  cfg["family"] = "normal";
  cfg["generator"] = Json{{"lambda", 0.5}, {"psi", 1.5}, {"n", 8}};
  cfg["priors"] = std::vector<std::string>{"mpml", "ampml", "reference"};
  cfg["out"] = (fresh_dir("prior_eval") / "out").string();
  cli::RunOptions opts;
  opts.deterministic = true;
  const cli::RunResult res = cli::run_config(cfg, opts);
  CHECK(res.exit_code == 0);
  const Json report = Json::parse(slurp(res.report_path));
  for (const auto& pair : report["results"]["pairwise_agreement"]) {
    CHECK(pair["centered_max_abs_diff"].get<double>() <= 1e-9);
  }
}

TEST_CASE("stratified generator feeds the risk harness") {
  Json cfg;
  cfg["subcommand"] = "risk-sim";
  cfg["family"] = "normal";
  cfg["truth"] = Json{{"lambda", 0.0}, {"psi", 1.0}};
  cfg["strata"] = Json{{"count", 12}, {"size", 2}};
  cfg["replications"] = 120;
  cfg["estimators"] = std::vector<std::string>{"mle", "cml"};
  cfg["seed"] = 9;
  cfg["out"] = (fresh_dir("strata_risk") / "out").string();
  cli::RunOptions opts;
  opts.deterministic = true;
  const cli::RunResult res = cli::run_config(cfg, opts);
  CHECK(res.exit_code == 0);
  const Json report = Json::parse(slurp(res.report_path));
  // The joint-likelihood estimator of psi is badly biased with tiny strata;
  // the conditional one is not.
  const auto& est = report["results"]["estimators"];
  CHECK(est[0]["bias_psi"].get<double>() > 0.5);
  CHECK(std::fabs(est[1]["bias_psi"].get<double>()) < 0.4);
}
