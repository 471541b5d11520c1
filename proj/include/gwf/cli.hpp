#pragma once

// Batch experiment runner: one JSON config per run, deterministic artifacts
// (normalized config, reports, CSV profiles, raw arrays) plus a manifest with
// the input hash, tool version and per-check pass/fail. Exit codes: 0 all
// checks pass, 1 a numeric check failed (named on stderr), 2 config/schema
// violation (line-anchored message on stderr).
//
// Config schema (keys beyond these are rejected): every config carries
// "experiment" in {stft, wavefront, flow, propagate, gabor-matrix, dyson,
// verify-suite} and optionally "output_dir" and "label"; the per-experiment
// keys are documented in README.md and normalized (defaults filled, ranges
// checked) by normalize_config, which is idempotent.

#include <stdexcept>
#include <string>

#include "json.hpp"

namespace gwf::cli {

struct RunOptions {
  std::string config_path;
  std::string output_dir;  // overrides config and TOOL_OUTPUT_DIR
  int jobs = 1;            // accepted for symmetry; execution is serial
  long seed = -1;          // overrides the config seed when >= 0
};

// Schema violation; `token` is a key or value literal used to anchor the
// error to a line of the config source.
struct ConfigError : std::runtime_error {
  std::string token;
  explicit ConfigError(const std::string& msg, std::string tok = "")
      : std::runtime_error(msg), token(std::move(tok)) {}
};

// Validates, rejects unknown keys, fills defaults, checks numeric ranges.
nlohmann::json normalize_config(const nlohmann::json& raw);

int run(const RunOptions& opts);

}  // namespace gwf::cli
