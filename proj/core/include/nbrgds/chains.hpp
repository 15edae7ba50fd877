#pragma once

#include <string_view>
#include <vector>

#include "nbrgds/rng.hpp"
#include "nbrgds/types.hpp"

namespace nbrgds {

/// Latent chain families.
///  - Gmc:    theta' ~ Gamma(tau0 * (Pi theta), tau0)
///  - Prgmc:  h ~ Poisson(tau * Pi theta), theta' ~ Gamma(eps + h, tau)
///  - Nbrgmp: g ~ Gamma(tau * Pi theta, psi), h ~ Poisson(g),
///            theta' ~ Gamma(eps + h, tau)
enum class ChainFamily { Gmc, Prgmc, Nbrgmp };

std::string_view to_string(ChainFamily family);
ChainFamily chain_family_from_string(std::string_view name);

struct ChainConfig {
  ChainFamily family = ChainFamily::Nbrgmp;
  int K = 1;
  double tau = 1.0;
  double tau0 = 1.0;        // Gmc only
  double psi = 1.0;         // Nbrgmp only
  double eps0_theta = 0.1;  // Prgmc / Nbrgmp shape offset

  void validate() const;
};

struct ChainState {
  Vector theta;
  CountVector h;   // Prgmc / Nbrgmp
  Vector h_hat;    // Nbrgmp gamma-Poisson mixing variable

  static ChainState from_theta(const Vector& theta);
};

struct ChainMoments {
  Vector mean;
  Vector variance;
};

/// Throws ParameterError unless `pi` is square, nonnegative and every column
/// sums to one within `tol`.
void validate_column_stochastic(const Matrix& pi, double tol = 1e-9);

/// One forward transition of the configured family. `pi` is column
/// stochastic: entry (k1, k) is the effect of source k on target k1.
ChainState step(const ChainConfig& config, const Matrix& pi, const ChainState& state,
                RngStream& rng);

/// Exact one-step conditional mean and variance of theta'.
ChainMoments conditional_moments(const ChainConfig& config, const Matrix& pi,
                                 const Vector& theta_prev);

/// `n_chains` independent rollouts of length `horizon` starting from theta0.
/// Element c is a K x horizon matrix whose column t-1 holds theta at time t.
/// Chain c draws from `rng.split(c)`.
std::vector<Matrix> simulate_realizations(const ChainConfig& config, const Matrix& pi,
                                          const Vector& theta0, int horizon,
                                          int n_chains, const RngStream& rng);

}  // namespace nbrgds
