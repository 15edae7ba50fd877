#include "nbrgds/chains.hpp"

#include <cmath>
#include <string>

#include "nbrgds/distributions.hpp"
#include "nbrgds/errors.hpp"

namespace nbrgds {

std::string_view to_string(ChainFamily family) {
  switch (family) {
    case ChainFamily::Gmc: return "gmc";
    case ChainFamily::Prgmc: return "prgmc";
    case ChainFamily::Nbrgmp: return "nbrgmp";
  }
  return "unknown";
}

ChainFamily chain_family_from_string(std::string_view name) {
  if (name == "gmc") return ChainFamily::Gmc;
  if (name == "prgmc") return ChainFamily::Prgmc;
  if (name == "nbrgmp") return ChainFamily::Nbrgmp;
  throw ConfigError("unknown chain family '" + std::string(name) + "'");
}

void ChainConfig::validate() const {
  if (K < 1) throw ParameterError("chain dimension K must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("tau must be > 0");
  if (!(tau0 > 0.0) || !std::isfinite(tau0)) throw ParameterError("tau0 must be > 0");
  if (!(psi > 0.0) || !std::isfinite(psi)) throw ParameterError("psi must be > 0");
  if (!(eps0_theta >= 0.0) || !std::isfinite(eps0_theta))
    throw ParameterError("eps0_theta must be >= 0");
}

ChainState ChainState::from_theta(const Vector& theta) {
  ChainState s;
  s.theta = theta;
  s.h = CountVector::Zero(theta.size());
  s.h_hat = Vector::Zero(theta.size());
  return s;
}

void validate_column_stochastic(const Matrix& pi, double tol) {
  if (pi.rows() != pi.cols()) throw ParameterError("transition matrix must be square");
  for (Eigen::Index k = 0; k < pi.cols(); ++k) {
    if (!pi.col(k).allFinite() || (pi.col(k).array() < 0.0).any())
      throw ParameterError("transition matrix has a negative or non-finite entry");
    const double s = pi.col(k).sum();
    if (std::fabs(s - 1.0) > tol)
      throw ParameterError("transition column " + std::to_string(k) + " sums to " +
                           std::to_string(s) + ", not 1");
  }
}

ChainState step(const ChainConfig& config, const Matrix& pi, const ChainState& state,
                RngStream& rng) {
  config.validate();
  validate_column_stochastic(pi);
  if (pi.rows() != config.K || state.theta.size() != config.K)
    throw ParameterError("chain dimension mismatch");
  if (!state.theta.allFinite()) throw ParameterError("theta must be finite");

  const Vector drive = pi * state.theta;
  ChainState next = ChainState::from_theta(Vector::Zero(config.K));
  for (int k = 0; k < config.K; ++k) {
    switch (config.family) {
      case ChainFamily::Gmc:
        next.theta[k] = sample_gamma(config.tau0 * drive[k], config.tau0, rng);
        break;
      case ChainFamily::Prgmc:
        next.h[k] = sample_poisson(config.tau * drive[k], rng);
        next.theta[k] = sample_gamma(config.eps0_theta + static_cast<double>(next.h[k]),
                                     config.tau, rng);
        break;
      case ChainFamily::Nbrgmp:
        next.h_hat[k] = sample_gamma(config.tau * drive[k], config.psi, rng);
        next.h[k] = sample_poisson(next.h_hat[k], rng);
        next.theta[k] = sample_gamma(config.eps0_theta + static_cast<double>(next.h[k]),
                                     config.tau, rng);
        break;
    }
  }
  return next;
}

ChainMoments conditional_moments(const ChainConfig& config, const Matrix& pi,
                                 const Vector& theta_prev) {
  config.validate();
  validate_column_stochastic(pi);
  const Vector drive = pi * theta_prev;
  const double eps = config.eps0_theta;
  const double tau = config.tau;
  ChainMoments m;
  switch (config.family) {
    case ChainFamily::Gmc:
      m.mean = drive;
      m.variance = drive / config.tau0;
      break;
    case ChainFamily::Prgmc:
      m.mean = drive.array() + eps / tau;
      m.variance = 2.0 * drive.array() / tau + eps / (tau * tau);
      break;
    case ChainFamily::Nbrgmp: {
      const double psi = config.psi;
      m.mean = drive.array() / psi + eps / tau;
      m.variance = (1.0 + 2.0 * psi) * drive.array() / (psi * psi * tau) + eps / (tau * tau);
      break;
    }
  }
  return m;
}

std::vector<Matrix> simulate_realizations(const ChainConfig& config, const Matrix& pi,
                                          const Vector& theta0, int horizon,
                                          int n_chains, const RngStream& rng) {
  if (horizon < 1) throw ParameterError("horizon must be >= 1");
  if (n_chains < 1) throw ParameterError("number of chains must be >= 1");
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(n_chains));
  for (int c = 0; c < n_chains; ++c) {
    RngStream chain_rng = rng.split(static_cast<std::uint64_t>(c));
    Matrix traj(config.K, horizon);
    ChainState state = ChainState::from_theta(theta0);
    for (int t = 0; t < horizon; ++t) {
      state = step(config, pi, state, chain_rng);
      traj.col(t) = state.theta;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace nbrgds
