#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nbrgds/chains.hpp"
#include "nbrgds/rng.hpp"
#include "nbrgds/types.hpp"

namespace nbrgds {

/// Prior over the transition concentrations.
///  - Plain: symmetric Dirichlet(eps0) columns.
///  - FactorStructured: integer concentrations from a Poisson factor model.
///  - GraphStructured: concentrations D (.) Z with Z from a Bernoulli-Poisson
///    link on community factors.
enum class Variant { Plain, FactorStructured, GraphStructured };

std::string_view to_string(Variant variant);
Variant variant_from_string(std::string_view name);

struct ModelConfig {
  int V = 1;
  int T = 1;
  int K = 25;
  int C = 25;
  Variant variant = Variant::Plain;
  /// Latent chain used by the dynamical system: Nbrgmp (default) or Prgmc.
  ChainFamily chain = ChainFamily::Nbrgmp;
  bool stationary_delta = false;

  double eps0 = 0.1;
  double eps0_theta = 0.1;
  double eps0_lambda = 1.0;
  double tau = 1.0;
  double psi = 1.0;
  bool sample_psi = false;
  bool sample_tau = false;

  double r0 = 1.0;
  double c0 = 1.0;
  double a_hat = 1.0;
  double b_hat = 1.0;

  int forecast_horizon = 2;

  void validate() const;
  ChainConfig chain_config() const;
  /// Per-unit-theta exposure contributed by the next chain step after the
  /// next-step count is augmented: tau * ln(1 + 1/psi) for Nbrgmp, tau for
  /// Prgmc.
  double next_step_exposure(double tau_value, double psi_value) const;
};

struct CountMatrix {
  CountMatrixData values;               // V x T
  std::vector<std::string> dim_labels;  // V
  std::vector<std::string> time_labels; // T

  static CountMatrix zeros(int V, int T);
  int V() const { return static_cast<int>(values.rows()); }
  int T() const { return static_cast<int>(values.cols()); }
  void validate() const;
};

struct PlainPrior {};

struct FsState {
  CountMatrixData A;           // K x K integer concentrations
  double self_rate = 1.0;      // diagonal: A(k,k) = 1 + Poisson(self_rate)
  std::vector<Count> allocations;  // off-diagonal community splits, K*K*C
};

struct GsState {
  Matrix D;                    // K x K positive weights
  CountMatrixData Z;           // K x K binary mask, diagonal forced to 1
  CountMatrixData W;           // K x K latent Poisson counts, Z = 1(W >= 1)
  std::vector<Count> allocations;  // off-diagonal community splits of W
};

struct CommunityState {
  Matrix M;  // K x C
  Vector r;  // C
};

using TransitionPrior = std::variant<PlainPrior, FsState, GsState>;

inline std::size_t allocation_index(int k1, int k2, int c, int K, int C) {
  return (static_cast<std::size_t>(k1) * static_cast<std::size_t>(K) +
          static_cast<std::size_t>(k2)) * static_cast<std::size_t>(C) +
         static_cast<std::size_t>(c);
}

struct LatentState {
  Matrix theta;          // K x (T+1); column 0 holds lambda
  CountMatrixData h;     // K x T; column t-1 belongs to time t
  Matrix h_hat;          // K x T
  Vector lambda;         // K
  CountVector g;         // K
  double gamma = 1.0;
  double beta = 1.0;
  Vector delta;          // T (all equal when stationary)
  Matrix phi;            // V x K, column stochastic
  Matrix pi;             // K x K, column stochastic
  TransitionPrior transition;
  CommunityState communities;
  double psi = 1.0;
  double tau = 1.0;

  int K() const { return static_cast<int>(lambda.size()); }
  int T() const { return static_cast<int>(delta.size()); }
  int V() const { return static_cast<int>(phi.rows()); }
};

/// Effective Dirichlet concentrations A (K x K) of the transition columns.
Matrix effective_concentration(const ModelConfig& config, const LatentState& state);

/// Off-diagonal factor rates sum_c M(k1,c) r(c) M(k2,c); diagonal set to 0.
Matrix factor_rate(const CommunityState& communities);

CommunityState sample_community_prior(const ModelConfig& config, RngStream& rng);

/// Draws the FS or GS concentration structure given community factors.
TransitionPrior sample_transition_structure(const ModelConfig& config,
                                            const CommunityState& communities,
                                            RngStream& rng);

/// Prior draw of everything except the latent chain; theta holds lambda in
/// column 0 and zeros elsewhere, h and h_hat are zero.
LatentState sample_prior_parameters(const ModelConfig& config, const RngStream& rng);

LatentState sample_prior(const ModelConfig& config, const RngStream& rng);

/// Poisson rate of data cell (v, t), t being the 0-based data column.
double poisson_rate(const LatentState& state, int v, int t);
/// All rates, V x T.
Matrix poisson_rates(const LatentState& state);

CountMatrix generate_counts(const ModelConfig& config, const LatentState& state,
                            const RngStream& rng);

/// Structural checks: shapes, simplex columns, theta(:,0) == lambda, GS mask
/// consistency. Throws StructuralError with a description of the violation.
void check_state(const ModelConfig& config, const LatentState& state,
                 double simplex_tol = 1e-9);

}  // namespace nbrgds
