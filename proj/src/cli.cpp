#include "mpml/cli.hpp"

#include <cinttypes>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mpml/asymptotics.hpp"
#include "mpml/estimators.hpp"
#include "mpml/families/strata.hpp"
#include "mpml/family.hpp"
#include "mpml/priors.hpp"
#include "mpml/risk.hpp"

namespace mpml::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct ParsedConfig {
  Json raw;
  std::string subcommand;
  std::string family_id;
  std::optional<Dataset> dataset;
  std::uint64_t seed = 1;
  bool deterministic = false;
  fs::path out_dir = "out";
  QuadratureConfig quad;
};

Dataset generate_dataset(const Json& gen, const std::string& family_id,
                         std::uint64_t seed) {
  for (const char* key : {"lambda", "psi", "n"}) {
    if (!gen.contains(key)) {
      throw config_error(std::string("generator spec needs '") + key + "'");
    }
  }
  const ParamPoint truth{gen["lambda"].get<double>(), gen["psi"].get<double>()};
  const std::size_t n = gen["n"].get<std::size_t>();
  CounterRng rng(seed, gen.value("stream", std::uint64_t{0}));

  if (gen.contains("strata")) {
    const Json& st = gen["strata"];
    StrataSpec spec;
    spec.inner = make_family(family_id);
    spec.sizes.assign(st.at("count").get<std::size_t>(),
                      st.value("size", std::size_t{2}));
    const std::vector<double> lambdas(spec.K(), truth.lambda);
    return sample_strata(rng, spec, lambdas, truth.psi);
  }

  const FamilyPtr family = make_family(family_id);
  DataShape shape;
  shape.n = n;
  if (gen.contains("z_ones")) {
    const std::size_t n1 = gen["z_ones"].get<std::size_t>();
    if (n1 == 0 || n1 >= n) throw config_error("z_ones must satisfy 0 < z_ones < n");
    std::vector<double> z(n, 0.0);
    for (std::size_t i = 0; i < n1; ++i) z[i] = 1.0;
    shape.z = z;
  }
  return family->sample(rng, truth, shape);
}

ParsedConfig parse_config(const Json& cfg, const RunOptions& options) {
  ParsedConfig pc;
  pc.raw = cfg;
  if (!cfg.contains("subcommand")) throw config_error("config needs 'subcommand'");
  pc.subcommand = cfg["subcommand"].get<std::string>();
  pc.family_id = cfg.value("family", std::string{});
  pc.seed = options.seed.value_or(cfg.value("seed", std::uint64_t{1}));
  pc.deterministic = options.deterministic || cfg.value("deterministic", false);
  pc.out_dir = options.out_dir.value_or(cfg.value("out", std::string("out")));

  if (cfg.contains("quadrature")) {
    const Json& q = cfg["quadrature"];
    pc.quad.rel_tol = q.value("rel_tol", pc.quad.rel_tol);
    pc.quad.abs_tol = q.value("abs_tol", pc.quad.abs_tol);
    pc.quad.max_depth = q.value("max_depth", pc.quad.max_depth);
    pc.quad.validate();
  }

  const bool has_file = cfg.contains("dataset");
  const bool has_gen = cfg.contains("generator");
  if (has_file && has_gen) {
    throw config_error("'dataset' and 'generator' are mutually exclusive");
  }
  if (has_file) {
    pc.dataset = ingest_dataset(cfg["dataset"].get<std::string>());
  } else if (has_gen) {
    if (pc.family_id.empty()) throw config_error("generator needs 'family'");
    pc.dataset = generate_dataset(cfg["generator"], pc.family_id, pc.seed);
  }
  return pc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write " + path.string());
  out << text;
}

struct ReportWriter {
  fs::path out_dir;
  Json report;
  int exit_code = 0;

  void begin(const ParsedConfig& pc) {
    fs::create_directories(out_dir / "tables");
    report["schema_version"] = 1;
    report["subcommand"] = pc.subcommand;
    if (!pc.family_id.empty()) report["family"] = pc.family_id;
    report["seed"] = pc.seed;
    if (!pc.deterministic) {
      const auto now = std::chrono::system_clock::now().time_since_epoch();
      report["timestamp"] =
          std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    }
  }

  std::string finish() {
    const fs::path path = out_dir / "report.json";
    write_text(path, report.dump(2) + "\n");
    return path.string();
  }

  void table(const std::string& name, const std::string& csv) {
    write_text(out_dir / "tables" / name, csv);
  }
};

Json theta_json(const ParamPoint& th) {
  return Json{{"lambda", th.lambda}, {"psi", th.psi}};
}

// ---------------------------------------------------------------------------
// Subcommands

RunResult run_estimate(const ParsedConfig& pc, ReportWriter& w) {
  if (!pc.dataset) throw config_error("estimate needs a dataset or generator");
  const FamilyPtr family = make_family(pc.family_id);
  const std::string tag_name = pc.raw.value("estimand", std::string("canonical"));
  EstimandTag tag = EstimandTag::canonical;
  if (tag_name == "raw") tag = EstimandTag::raw;
  else if (tag_name != "canonical")
    throw config_error("unknown estimand '" + tag_name + "' (canonical | raw)");
  if (family->id() == "uniform") tag = EstimandTag::raw;

  const EstimateReport rep = estimate_report(*family, *pc.dataset, tag, pc.quad);

  Json res;
  res["n"] = pc.dataset->n();
  res["mle"] = theta_json(rep.mle.theta);
  res["mle_psi_boundary"] = static_cast<int>(rep.mle.psi_boundary);
  if (rep.cml) {
    res["cml_psi"] = rep.cml->psi;
    res["cml_boundary"] = static_cast<int>(rep.cml->boundary);
  }
  res["post_mode_pml"] = theta_json(rep.post_mode);
  res["post_mean"] = Json{{"estimand", estimand_tag_name(rep.post_mean.tag)},
                          {"values", rep.post_mean.values},
                          {"log_normalizer", rep.post_mean.log_normalizer}};
  res["diagnostics"] =
      Json{{"precision_failure", rep.post_mean.diagnostics.precision_failure},
           {"multimodal", rep.mode_diagnostics.multimodal},
           {"cml_consistency_violation", rep.mode_diagnostics.cml_consistency_violation},
           {"quadrature_rel_error", rep.post_mean.diagnostics.quadrature_rel_error}};
  w.report["results"] = res;
  if (rep.post_mean.diagnostics.precision_failure) w.exit_code = 2;

  std::ostringstream summary;
  summary << "estimate " << pc.family_id << " n=" << pc.dataset->n()
          << " post_mean=[" << fmt_double(rep.post_mean.values[0]) << ", "
          << fmt_double(rep.post_mean.values[1]) << "]";
  return RunResult{w.exit_code, summary.str(), {}};
}

RunResult run_prior_eval(const ParsedConfig& pc, ReportWriter& w) {
  const FamilyPtr family = make_family(pc.family_id);
  if (!pc.raw.contains("priors")) throw config_error("prior-eval needs 'priors'");
  const std::vector<std::string> kinds = pc.raw["priors"].get<std::vector<std::string>>();

  auto grid_of = [&](const char* key, double dlo, double dhi, int dcount,
                     bool dlog) -> std::vector<double> {
    double lo = dlo, hi = dhi;
    int count = dcount;
    bool log_scale = dlog;
    if (pc.raw.contains(key)) {
      const Json& g = pc.raw[key];
      lo = g.value("min", lo);
      hi = g.value("max", hi);
      count = g.value("count", count);
      log_scale = g.value("log", log_scale);
    }
    if (!(hi > lo) || count < 1) throw config_error(std::string(key) + ": bad grid");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
      out.push_back(log_scale ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    return out;
  };

  const ParamDomain dom = family->domain();
  const bool lam_positive = dom.lambda.is_positive_halfline();
  const std::vector<double> lam_grid =
      grid_of("lambda_grid", lam_positive ? 0.5 : -2.0, lam_positive ? 4.0 : 2.0, 5,
              false);
  const std::vector<double> psi_grid = grid_of("psi_grid", 0.25, 4.0, 9, true);

  std::vector<Prior> priors;
  for (const std::string& k : kinds) priors.push_back(make_prior(k, family, pc.dataset));

  std::ostringstream csv;
  csv << "lambda,psi";
  for (const std::string& k : kinds) csv << "," << k;
  csv << "\n";
  std::vector<std::vector<double>> cols(kinds.size());
  for (double lam : lam_grid) {
    for (double psi : psi_grid) {
      csv << fmt_double(lam) << "," << fmt_double(psi);
      for (std::size_t i = 0; i < priors.size(); ++i) {
        const double v = priors[i].log_at(ParamPoint{lam, psi});
        cols[i].push_back(v);
        csv << "," << fmt_double(v);
      }
      csv << "\n";
    }
  }
  w.table("priors.csv", csv.str());

  // Pairwise agreement up to an additive constant: max |centered difference|.
  Json pairs = Json::array();
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    for (std::size_t j = i + 1; j < kinds.size(); ++j) {
      double mean_diff = 0.0;
      for (std::size_t k = 0; k < cols[i].size(); ++k) mean_diff += cols[i][k] - cols[j][k];
      mean_diff /= static_cast<double>(cols[i].size());
      double max_dev = 0.0;
      for (std::size_t k = 0; k < cols[i].size(); ++k) {
        max_dev = std::max(max_dev, std::fabs(cols[i][k] - cols[j][k] - mean_diff));
      }
      pairs.push_back(Json{{"first", kinds[i]},
                           {"second", kinds[j]},
                           {"centered_max_abs_diff", max_dev}});
    }
  }
  w.report["results"] = Json{{"priors", kinds}, {"pairwise_agreement", pairs}};

  std::ostringstream summary;
  summary << "prior-eval " << pc.family_id << " wrote " << lam_grid.size() * psi_grid.size()
          << " grid rows for " << kinds.size() << " prior(s)";
  return RunResult{0, summary.str(), {}};
}

RunResult run_order_check(const ParsedConfig& pc, ReportWriter& w) {
  OrderProtocolConfig cfg;
  cfg.protocol = pc.raw.value("protocol", std::string("mean-vs-cml"));
  cfg.family_id = pc.family_id;
  if (pc.raw.contains("truth")) {
    cfg.truth.lambda = pc.raw["truth"].value("lambda", cfg.truth.lambda);
    cfg.truth.psi = pc.raw["truth"].value("psi", cfg.truth.psi);
  }
  if (pc.raw.contains("ns")) cfg.ns = pc.raw["ns"].get<std::vector<std::size_t>>();
  cfg.replications = pc.raw.value("replications", 200);
  cfg.seed = pc.seed;
  cfg.quad = pc.quad;

  const OrderProtocolResult res = run_order_protocol(cfg);

  std::ostringstream csv;
  csv << "n,coordinate,mean_abs_diff\n";
  for (std::size_t c = 0; c < res.coordinates.size(); ++c) {
    for (std::size_t j = 0; j < res.ns.size(); ++j) {
      csv << res.ns[j] << "," << res.coordinates[c] << ","
          << fmt_double(res.mean_abs_diff[c][j]) << "\n";
    }
  }
  w.table("order.csv", csv.str());

  Json fits = Json::array();
  for (std::size_t c = 0; c < res.fits.size(); ++c) {
    const OrderFit& f = res.fits[c];
    fits.push_back(Json{{"coordinate", res.coordinates[c]},
                        {"slope", f.slope},
                        {"slope_se", f.slope_se},
                        {"points_used", f.points_used},
                        {"max_diff", f.max_diff},
                        {"note", f.note}});
  }
  w.report["results"] = Json{{"protocol", cfg.protocol},
                             {"replications", cfg.replications},
                             {"fits", fits}};

  std::ostringstream summary;
  summary << "order-check " << cfg.protocol << " " << pc.family_id << " slopes=[";
  for (std::size_t c = 0; c < res.fits.size(); ++c) {
    if (c) summary << ", ";
    summary << fmt_double(res.fits[c].slope);
  }
  summary << "]";
  return RunResult{0, summary.str(), {}};
}

RunResult run_risk_sim(const ParsedConfig& pc, ReportWriter& w) {
  RiskConfig cfg;
  cfg.family_id = pc.family_id;
  if (pc.raw.contains("truth")) {
    cfg.truth.lambda = pc.raw["truth"].value("lambda", cfg.truth.lambda);
    cfg.truth.psi = pc.raw["truth"].value("psi", cfg.truth.psi);
  }
  cfg.n = pc.raw.value("n", cfg.n);
  if (pc.raw.contains("strata")) {
    cfg.strata_count = pc.raw["strata"].at("count").get<std::size_t>();
    cfg.strata_size = pc.raw["strata"].value("size", std::size_t{2});
    cfg.loss = "squared-error";
  }
  if (pc.raw.contains("z_ones")) {
    const std::size_t n1 = pc.raw["z_ones"].get<std::size_t>();
    std::vector<double> z(cfg.n, 0.0);
    for (std::size_t i = 0; i < std::min(n1, cfg.n); ++i) z[i] = 1.0;
    cfg.covariate_pattern = z;
  }
  cfg.replications = pc.raw.value("replications", 1000);
  cfg.seed = pc.seed;
  if (pc.raw.contains("estimators")) {
    cfg.estimators = pc.raw["estimators"].get<std::vector<std::string>>();
  }
  cfg.loss = pc.raw.value("loss", cfg.loss);
  cfg.quad = pc.quad;

  const RiskReport rep = simulate_risk(cfg);

  std::ostringstream csv;
  csv << "estimator,mean_loss,loss_se,mean_lambda,mean_psi,bias_psi,bias_psi_se,"
         "boundary_events,failures,used\n";
  for (const EstimatorSummary& s : rep.estimators) {
    csv << s.name << "," << fmt_double(s.mean_loss) << "," << fmt_double(s.loss_se)
        << "," << fmt_double(s.mean_lambda) << "," << fmt_double(s.mean_psi) << ","
        << fmt_double(s.bias_psi) << "," << fmt_double(s.bias_psi_se) << ","
        << s.boundary_events << "," << s.failures << "," << s.used << "\n";
  }
  w.table("risk.csv", csv.str());

  std::ostringstream pcsv;
  pcsv << "first,second,mean_diff,se,pairs\n";
  for (const PairedDifference& p : rep.pairs) {
    pcsv << p.first << "," << p.second << "," << fmt_double(p.mean_diff) << ","
         << fmt_double(p.se) << "," << p.pairs << "\n";
  }
  w.table("risk_pairs.csv", pcsv.str());

  Json est = Json::array();
  for (const EstimatorSummary& s : rep.estimators) {
    est.push_back(Json{{"name", s.name},
                       {"mean_loss", s.mean_loss},
                       {"loss_se", s.loss_se},
                       {"mean_lambda", s.mean_lambda},
                       {"mean_psi", s.mean_psi},
                       {"bias_lambda", s.bias_lambda},
                       {"bias_psi", s.bias_psi},
                       {"bias_psi_se", s.bias_psi_se},
                       {"boundary_events", s.boundary_events},
                       {"failures", s.failures},
                       {"used", s.used}});
  }
  Json prs = Json::array();
  for (const PairedDifference& p : rep.pairs) {
    prs.push_back(Json{{"first", p.first},
                       {"second", p.second},
                       {"mean_diff", p.mean_diff},
                       {"se", p.se},
                       {"pairs", p.pairs}});
  }
  w.report["results"] = Json{{"loss_convention", rep.loss_convention},
                             {"estimators", est},
                             {"paired_differences", prs}};

  std::ostringstream summary;
  summary << "risk-sim " << pc.family_id << " reps=" << cfg.replications << " losses=[";
  for (std::size_t i = 0; i < rep.estimators.size(); ++i) {
    if (i) summary << ", ";
    summary << rep.estimators[i].name << "=" << fmt_double(rep.estimators[i].mean_loss);
  }
  summary << "]";
  return RunResult{0, summary.str(), {}};
}

RunResult run_predictor_kl(const ParsedConfig& pc, ReportWriter& w) {
  if (!pc.dataset) throw config_error("predictor-kl needs a dataset or generator");
  const FamilyPtr family = make_family(pc.family_id);

  std::vector<double> grid;
  if (pc.raw.contains("psi_grid")) {
    const Json& g = pc.raw["psi_grid"];
    const double lo = g.at("min").get<double>();
    const double hi = g.at("max").get<double>();
    const int count = g.value("count", 41);
    if (!(hi > lo) || count < 1) throw config_error("psi_grid: bad grid");
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
      grid.push_back(lo + (hi - lo) * f);
    }
  } else {
    const CmlResult cml = conditional_mle(*family, *pc.dataset);
    if (cml.boundary != BoundaryTag::interior) {
      throw config_error("predictor-kl: conditional MLE at the boundary; give psi_grid");
    }
    const int count = 41;
    for (int i = 0; i < count; ++i) {
      const double f = static_cast<double>(i) / (count - 1);
      grid.push_back(cml.psi * std::pow(2.2, 2.0 * f - 1.0));
    }
  }

  const PredictiveKlCurve curve =
      conditional_predictive_kl_curve(*family, *pc.dataset, grid, pc.quad);

  std::ostringstream csv;
  csv << "psi,posterior_expected_kl\n";
  for (std::size_t i = 0; i < curve.psi_grid.size(); ++i) {
    csv << fmt_double(curve.psi_grid[i]) << "," << fmt_double(curve.values[i]) << "\n";
  }
  w.table("predictor_kl.csv", csv.str());

  w.report["results"] = Json{{"psi_post_mean", curve.psi_post_mean},
                             {"psi_cml", curve.psi_cml},
                             {"min_index", curve.min_index},
                             {"min_psi", curve.psi_grid[curve.min_index]},
                             {"min_on_boundary", curve.min_on_boundary}};
  if (curve.min_on_boundary) w.exit_code = 2;

  std::ostringstream summary;
  summary << "predictor-kl " << pc.family_id << " min at psi="
          << fmt_double(curve.psi_grid[curve.min_index]) << " post_mean="
          << fmt_double(curve.psi_post_mean);
  return RunResult{w.exit_code, summary.str(), {}};
}

}  // namespace

Dataset dataset_from_csv_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw config_error(origin + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  int x_col = -1, z_col = -1, s_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "x") x_col = static_cast<int>(i);
    else if (header[i] == "z") z_col = static_cast<int>(i);
    else if (header[i] == "stratum") s_col = static_cast<int>(i);
    else throw config_error(origin + ": unknown column '" + header[i] + "'");
  }
  if (x_col < 0) throw config_error(origin + ": missing 'x' column");

  Dataset d;
  if (z_col >= 0) d.z = std::vector<double>();
  if (s_col >= 0) d.stratum = std::vector<int>();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw config_error(origin + ": row " + std::to_string(row) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(header.size()));
    }
    auto parse_cell = [&](int col) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cells[col], &pos);
        if (pos != cells[col].size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw config_error(origin + ": non-numeric cell at row " + std::to_string(row) +
                           ", column '" + header[col] + "'");
      }
    };
    d.x.push_back(parse_cell(x_col));
    if (z_col >= 0) d.z->push_back(parse_cell(z_col));
    if (s_col >= 0) d.stratum->push_back(static_cast<int>(parse_cell(s_col)));
  }
  validate_dataset_shape(d);
  return d;
}

Dataset ingest_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read dataset file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_csv_text(buf.str(), path);
}

std::string dataset_to_csv_text(const Dataset& data) {
  std::ostringstream out;
  out << "x";
  if (data.z) out << ",z";
  if (data.stratum) out << ",stratum";
  out << "\n";
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    out << fmt_double(data.x[i]);
    if (data.z) out << "," << fmt_double((*data.z)[i]);
    if (data.stratum) out << "," << (*data.stratum)[i];
    out << "\n";
  }
  return out.str();
}

RunResult run_config(const Json& config, const RunOptions& options) {
  const ParsedConfig pc = parse_config(config, options);
  ReportWriter writer;
  writer.out_dir = pc.out_dir;
  writer.begin(pc);

  RunResult res;
  if (pc.subcommand == "estimate") res = run_estimate(pc, writer);
  else if (pc.subcommand == "prior-eval") res = run_prior_eval(pc, writer);
  else if (pc.subcommand == "order-check") res = run_order_check(pc, writer);
  else if (pc.subcommand == "risk-sim") res = run_risk_sim(pc, writer);
  else if (pc.subcommand == "predictor-kl") res = run_predictor_kl(pc, writer);
  else {
    throw config_error("unknown subcommand '" + pc.subcommand +
                       "' (estimate | prior-eval | order-check | risk-sim | predictor-kl)");
  }
  res.exit_code = std::max(res.exit_code, writer.exit_code);
  writer.report["exit_code"] = res.exit_code;
  res.report_path = writer.finish();
  return res;
}

RunResult run(const std::string& config_path, const RunOptions& options) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw config_error("cannot read config file '" + config_path + "'");
  Json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw config_error("config parse error in '" + config_path + "': " + e.what());
  }
  return run_config(cfg, options);
}

}  // namespace mpml::cli
