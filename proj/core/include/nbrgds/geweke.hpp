#pragma once

#include <string>
#include <vector>

#include "nbrgds/inference.hpp"
#include "nbrgds/model.hpp"
#include "nbrgds/rng.hpp"

namespace nbrgds {

/// Scalar summaries compared between the two simulators.
struct NamedValue {
  std::string name;
  double value = 0.0;
};

std::vector<NamedValue> geweke_statistics(const ModelConfig& config, const LatentState& state,
                                          const CountMatrix& counts);

struct GewekeStat {
  std::string name;
  double forward_mean = 0.0;
  double forward_se = 0.0;
  double successive_mean = 0.0;
  double successive_se = 0.0;
  double z = 0.0;
};

struct GewekeReport {
  std::vector<GewekeStat> stats;
  double max_abs_z() const;
};

struct GewekeOptions {
  int n_forward = 0;
  int n_successive = 0;
  /// Batches used for the batch-means standard error of the successive chain.
  int batches = 50;
  /// Sweeps between recorded successive draws.
  int sweeps_per_draw = 1;
  MaskSpec mask;
  SamplerOptions sampler;
};

/// Compares independent draws of (state, data) from the joint prior with a
/// chain that alternates a Gibbs sweep and regeneration of the data.
GewekeReport geweke_test(const ModelConfig& config, const GewekeOptions& options,
                         const RngStream& rng);

}  // namespace nbrgds
