#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "mpml/types.hpp"

namespace mpml::cli {

using Json = nlohmann::ordered_json;

// Parsed run options shared by every subcommand.
struct RunOptions {
  std::optional<std::string> out_dir;   // overrides config "out"
  std::optional<std::uint64_t> seed;    // overrides config "seed"
  bool deterministic = false;           // suppress the timestamp field
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 config error, 2 precision failure
  std::string summary;
  std::string report_path;
};

// Validated CSV ingestion: header row with an `x` column, optional `z`
// covariate and integer `stratum` columns. Errors cite the offending
// row/column.
Dataset ingest_dataset(const std::string& path);
Dataset dataset_from_csv_text(const std::string& text, const std::string& origin);
std::string dataset_to_csv_text(const Dataset& data);

// Execute the subcommand described by the JSON config at `config_path`.
// Writes report.json and tables/*.csv under the output directory and prints
// nothing; the one-line summary is returned to the caller.
RunResult run(const std::string& config_path, const RunOptions& options);
RunResult run_config(const Json& config, const RunOptions& options);

}  // namespace mpml::cli
