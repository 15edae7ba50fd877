#pragma once

// Closed-form complete conditionals used by the Gibbs sweep. The sampler and
// the numeric posterior checks both go through these functions.

#include <span>

#include "nbrgds/types.hpp"

namespace nbrgds {

struct GammaParams {
  double shape = 0.0;
  double rate = 1.0;

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

/// theta_k^(t) given its chain count h, allocated tokens n, tables flowing
/// into the next step, the observed exposure delta*lambda*obs_mass and the
/// next-step exposure (0 at the last time step).
GammaParams theta_conditional(double eps0_theta, Count h, Count tokens, Count incoming_tables,
                              double tau, double data_exposure, double next_exposure);

/// lambda_k given g, its token total over time, the tables flowing into the
/// first step, and its exposure sum_t delta theta obs_mass.
GammaParams lambda_conditional(double eps0_lambda, int K, Count g, Count tokens,
                               Count incoming_tables, double beta, double data_exposure,
                               double next_exposure);

GammaParams gamma_conditional(double eps0, Count sum_g);
GammaParams beta_conditional(double eps0, double sum_lambda_shape, double sum_lambda);
GammaParams delta_conditional(double eps0, Count observed_total, double exposure);
GammaParams d_conditional(double eps0, Count tables, double exposure);
GammaParams psi_conditional(double eps0, double sum_shape, double sum_h_hat);
GammaParams h_hat_conditional(double chain_shape, Count h, double psi);
GammaParams self_rate_conditional(double eps0, Count sum_extra, int K);

/// Dirichlet posterior concentrations: prior + counts, elementwise.
void dirichlet_conditional(std::span<const double> prior, std::span<const Count> counts,
                           std::span<double> out);

}  // namespace nbrgds
