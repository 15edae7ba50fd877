#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nbrgds/inference.hpp"
#include "nbrgds/mask.hpp"
#include "nbrgds/model.hpp"
#include "nbrgds/rng.hpp"

namespace nbrgds {

// -- count matrices on disk -------------------------------------------------

/// Reads a CSV whose header row holds time labels (after one leading cell)
/// and whose first column holds dimension labels. Lines starting with '#'
/// are ignored. Errors name the offending line and column.
CountMatrix load_counts(const std::filesystem::path& path);
CountMatrix parse_counts(const std::string& text, const std::string& source = "<string>");

/// `comments` are written first, each prefixed with "# ".
void save_counts(const std::filesystem::path& path, const CountMatrix& counts,
                 const std::vector<std::string>& comments = {});
std::string format_counts(const CountMatrix& counts, const std::vector<std::string>& comments = {});

// -- masks ------------------------------------------------------------------

struct MaskParams {
  MaskMode mode = MaskMode::Smoothing;
  double holdout_fraction = 0.2;  // smoothing
  int horizon = 2;                // forecast
};

/// Smoothing: exactly round(fraction * V * T) cells chosen uniformly.
/// Forecast: the last `horizon` columns. Throws ConfigError on bad params.
MaskSpec make_mask(int V, int T, const MaskParams& params, const RngStream& rng);

/// Parses "smoothing:0.2" or "forecast:2".
MaskParams parse_mask_params(const std::string& text);

// -- zero-inflated negative binomial data -----------------------------------

struct ZinbConfig {
  double p0 = 0.9;  // zero-inflation probability
  double r = 5.0;
  double p = 0.5;   // NB success probability; NB mean r (1 - p) / p
  int V = 10;       // rows per group
  int T = 365;
  int n_groups = 1;

  void validate() const;
  double mean() const;
  double variance() const;
  /// (1 + r p0 (1 - p)) / p
  double variance_to_mean() const;
};

/// Five preset configurations (index 1..5): p0 = 0.9, r = 5 and
/// p = 0.9, 0.8, 0.7, 0.6, 0.5.
ZinbConfig zinb_preset(int index);

struct ZinbData {
  CountMatrix counts;
  std::vector<int> group;  // per row
  std::vector<ZinbConfig> groups;
};

/// One zero-inflated NB draw.
Count sample_zinb(const ZinbConfig& config, RngStream& rng);

/// `config.n_groups` blocks of `config.V` rows, all drawn with `config`.
ZinbData generate_zinb(const ZinbConfig& config, const RngStream& rng);
/// One block per entry; all entries must share T.
ZinbData generate_zinb(const std::vector<ZinbConfig>& groups, const RngStream& rng);

// -- held-out prediction ----------------------------------------------------

struct PredictOptions {
  /// Forward rollouts per retained sample for forecasting.
  int rollouts = 10;
  int workers = 1;
};

/// Mean of the last (up to) 5 training-period delta values.
double forecast_delta(const LatentState& state, int training_steps);

/// V x T matrix. Smoothing: posterior-mean Poisson rate of every cell.
/// Forecast: the masked columns hold the rollout-averaged rates and the
/// training columns hold posterior-mean rates.
Matrix predict_heldout(const std::vector<LatentState>& samples, const MaskSpec& mask,
                       const ModelConfig& config, const RngStream& rng,
                       const PredictOptions& options = {});

// -- experiments ------------------------------------------------------------

struct ExperimentModel {
  std::string name;
  ModelConfig config;  // V and T are taken from the data
};

struct ExperimentSpec {
  /// Data regenerated per repeat when non-empty; otherwise `counts` is used.
  std::vector<ZinbConfig> zinb_groups;
  CountMatrix counts;
  std::vector<ExperimentModel> models;
  std::vector<MaskParams> tasks;
  Schedule schedule;
  int n_repeats = 10;
  std::uint64_t seed = 1;
  int workers = 1;
  PredictOptions predict;
};

struct ExperimentRun {
  std::string model;
  std::string task;
  int repeat = 0;
  Metrics metrics;
};

struct ExperimentRow {
  std::string model;
  std::string task;
  std::string metric;  // "mae" or "mre"
  double mean = 0.0;
  double std = 0.0;    // sample standard deviation over repeats
  int n = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRun> runs;  // model-major, then task, then repeat
  std::vector<ExperimentRow> rows;
};

std::string task_name(const MaskParams& task);

/// Every (model, task, repeat) combination is fitted, predicted and scored.
/// Repeat r uses the same data, mask and sampler seed for every model.
ExperimentResult run_experiment(const ExperimentSpec& spec);

nlohmann::json experiment_manifest(const ExperimentSpec& spec);
std::string format_results(const ExperimentResult& result,
                           const std::vector<std::string>& comments = {});

}  // namespace nbrgds
