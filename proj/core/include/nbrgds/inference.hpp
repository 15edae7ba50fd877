#pragma once

#include <functional>
#include <vector>

#include "nbrgds/mask.hpp"
#include "nbrgds/model.hpp"
#include "nbrgds/rng.hpp"
#include "nbrgds/types.hpp"

namespace nbrgds {

struct Schedule {
  int total = 5000;
  int burn_in = 3000;
  int thin = 10;

  void validate() const;
  /// Number of retained samples: floor((total - burn_in) / thin).
  int retained() const;
  /// Whether 1-based iteration `i` is retained.
  bool keeps(int iteration) const;
};

struct SamplerOptions {
  /// Worker threads for the per-time-step and per-component loops. Results
  /// do not depend on this value.
  int workers = 1;
  /// Random-walk step size on log tau when tau is sampled.
  double tau_step = 0.1;
  /// Multiplies the rate of every theta update. 1 for the correct sampler;
  /// other values exist only to check that the test harness detects errors.
  double theta_rate_scale = 1.0;
};

/// Augmentation variables regenerated every sweep.
struct AuxiliaryCounts {
  /// Token splits of the observed nonzero cells, cell-major, K per cell; the
  /// cell order is that of SweepContext::cells().
  std::vector<Count> tokens;
  CountMatrixData component_totals;   // K x T, n_k^(t)
  CountMatrixData dim_totals;         // V x K, sum over observed t
  CountMatrixData tables;             // K x T, chain tables at each step
  std::vector<CountMatrixData> source_tables;  // T of K x K, (target, source)
  /// K x T; column j holds the tables flowing from theta column j into the
  /// next step (column 0 belongs to lambda).
  CountMatrixData incoming;
  CountMatrixData transition_tables;  // K x K, sum over t of source_tables
};

struct ObservedCell {
  int v = 0;
  int t = 0;
  Count n = 0;
};

/// Data, mask and configuration shared by every sweep.
class SweepContext {
 public:
  SweepContext(CountMatrix counts, MaskSpec mask, ModelConfig config,
               SamplerOptions options = {});

  const CountMatrix& counts() const { return counts_; }
  const MaskSpec& mask_spec() const { return mask_spec_; }
  const ObservationMask& mask() const { return mask_; }
  const ModelConfig& config() const { return config_; }
  const SamplerOptions& options() const { return options_; }

  /// Observed cells with a positive count, ordered by t then v.
  const std::vector<ObservedCell>& cells() const { return cells_; }
  /// cells()[column_begin(t) .. column_begin(t+1)) belong to column t.
  std::size_t column_begin(int t) const { return column_begin_[t]; }
  /// Observed count total of column t.
  Count observed_column_total(int t) const { return column_totals_[t]; }

  /// Replaces the data, keeping the mask. Used by the successive-conditional
  /// simulator.
  void set_counts(CountMatrix counts);

 private:
  void index_cells();

  CountMatrix counts_;
  MaskSpec mask_spec_;
  ObservationMask mask_;
  ModelConfig config_;
  SamplerOptions options_;
  std::vector<ObservedCell> cells_;
  std::vector<std::size_t> column_begin_;
  std::vector<Count> column_totals_;
};

/// K x T matrix of observed loading mass sum_{v observed at t} phi(v,k).
Matrix observed_mass(const SweepContext& ctx, const LatentState& state);

/// Per-unit-theta exposure added by the next chain step.
double next_step_exposure(const ModelConfig& config, const LatentState& state);

// -- sweep blocks, in sweep order ------------------------------------------

void allocate_tokens(const SweepContext& ctx, const LatentState& state, AuxiliaryCounts& aux,
                     const RngStream& rng);

/// Terms of the chain-count conditional with theta^(t), the mixing variable
/// and the tables at step t integrated out:
///
///   w(h) = NB(h; shape, psi) * tau^h Gamma(eps + h + m) / (Gamma(eps + h) (tau + E)^h)
///
/// (Poisson(h; shape) in place of the NB for the Prgmc chain), where m is the
/// evidence count on theta^(t) and E its exposure.
struct ChainCountTerms {
  bool negative_binomial = true;
  double shape = 0.0;     // tau * (Pi theta^(t-1))_k
  double psi = 1.0;
  double eps = 0.0;       // eps0_theta
  Count evidence = 0;     // tokens plus tables flowing out of theta^(t)
  double tau = 1.0;
  double exposure = 0.0;  // E
};

/// Unnormalized log w(h); -inf outside the support.
double chain_count_log_weight(const ChainCountTerms& terms, Count h);
Count sample_chain_count(const ChainCountTerms& terms, RngStream& rng);

/// Backward pass t = T..1: chain count (collapsed), theta^(t) given the
/// count, then the tables passed to theta^(t-1), split over sources.
void sample_chain(const SweepContext& ctx, LatentState& state, AuxiliaryCounts& aux,
                  const RngStream& rng);
void sample_lambda_block(const SweepContext& ctx, LatentState& state, const AuxiliaryCounts& aux,
                         const RngStream& rng);
/// Structure prior and transition columns given the aggregated tables.
void sample_transition_block(const SweepContext& ctx, LatentState& state,
                             const AuxiliaryCounts& aux, const RngStream& rng);
/// Re-instantiates the gamma mixing variables given h and theta.
void refresh_mixing(const SweepContext& ctx, LatentState& state, const RngStream& rng);
void sample_phi(const SweepContext& ctx, LatentState& state, const AuxiliaryCounts& aux,
                const RngStream& rng);
void sample_delta(const SweepContext& ctx, LatentState& state, const RngStream& rng);
/// Metropolis moves along the directions that leave every Poisson rate
/// unchanged: (lambda c, delta / c) and (theta c, delta / c).
void rescale_moves(const SweepContext& ctx, LatentState& state, const RngStream& rng);
void sample_psi(const SweepContext& ctx, LatentState& state, const RngStream& rng);
void sample_tau(const SweepContext& ctx, LatentState& state, const RngStream& rng);

/// sample_chain followed by refresh_mixing (lambda held fixed).
void sample_chain_block(const SweepContext& ctx, LatentState& state, AuxiliaryCounts& aux,
                        const RngStream& rng);

/// One full sweep. `rng` should be specific to the iteration.
void gibbs_sweep(const SweepContext& ctx, LatentState& state, AuxiliaryCounts& aux,
                 const RngStream& rng);

/// Data-scaled starting point for the sampler.
LatentState initialize_state(const SweepContext& ctx, const RngStream& rng);

/// Poisson log-likelihood of the observed cells.
double observed_log_likelihood(const SweepContext& ctx, const LatentState& state);

struct DiagnosticRow {
  int iteration = 0;
  double heldout_mae = 0.0;
  double heldout_mre = 0.0;
  double joint_loglik = 0.0;
};

struct PosteriorTrace {
  Schedule schedule;
  std::vector<int> sample_iterations;
  std::vector<LatentState> samples;
  std::vector<DiagnosticRow> diagnostics;
};

struct RunCallbacks {
  std::function<void(int iteration, const LatentState&)> on_sample;
  std::function<void(const DiagnosticRow&)> on_diagnostics;
};

PosteriorTrace run_gibbs(const CountMatrix& counts, const MaskSpec& mask,
                         const ModelConfig& config, const Schedule& schedule,
                         const RngStream& rng, const SamplerOptions& options = {},
                         const RunCallbacks& callbacks = {});

}  // namespace nbrgds
