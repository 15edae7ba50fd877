#include "nbrgds/conditionals.hpp"

#include "nbrgds/errors.hpp"

namespace nbrgds {

GammaParams theta_conditional(double eps0_theta, Count h, Count tokens, Count incoming_tables,
                              double tau, double data_exposure, double next_exposure) {
  return {eps0_theta + static_cast<double>(h + tokens + incoming_tables),
          tau + data_exposure + next_exposure};
}

GammaParams lambda_conditional(double eps0_lambda, int K, Count g, Count tokens,
                               Count incoming_tables, double beta, double data_exposure,
                               double next_exposure) {
  return {eps0_lambda / K + static_cast<double>(g + tokens + incoming_tables),
          beta + data_exposure + next_exposure};
}

GammaParams gamma_conditional(double eps0, Count sum_g) {
  return {eps0 + static_cast<double>(sum_g), eps0 + 1.0};
}

GammaParams beta_conditional(double eps0, double sum_lambda_shape, double sum_lambda) {
  return {eps0 + sum_lambda_shape, eps0 + sum_lambda};
}

GammaParams delta_conditional(double eps0, Count observed_total, double exposure) {
  return {eps0 + static_cast<double>(observed_total), eps0 + exposure};
}

GammaParams d_conditional(double eps0, Count tables, double exposure) {
  return {eps0 + static_cast<double>(tables), eps0 + exposure};
}

GammaParams psi_conditional(double eps0, double sum_shape, double sum_h_hat) {
  return {eps0 + sum_shape, eps0 + sum_h_hat};
}

GammaParams h_hat_conditional(double chain_shape, Count h, double psi) {
  return {chain_shape + static_cast<double>(h), psi + 1.0};
}

GammaParams self_rate_conditional(double eps0, Count sum_extra, int K) {
  return {eps0 + static_cast<double>(sum_extra), eps0 + K};
}

void dirichlet_conditional(std::span<const double> prior, std::span<const Count> counts,
                           std::span<double> out) {
  if (prior.size() != counts.size() || prior.size() != out.size())
    throw ParameterError("dirichlet_conditional: size mismatch");
  for (std::size_t i = 0; i < prior.size(); ++i)
    out[i] = prior[i] + static_cast<double>(counts[i]);
}

}  // namespace nbrgds
