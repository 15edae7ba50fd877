#include "nbrgds/model.hpp"

#include <cmath>
#include <string>

#include "nbrgds/distributions.hpp"
#include "nbrgds/errors.hpp"

namespace nbrgds {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::Plain: return "plain";
    case Variant::FactorStructured: return "fs";
    case Variant::GraphStructured: return "gs";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view name) {
  if (name == "plain") return Variant::Plain;
  if (name == "fs") return Variant::FactorStructured;
  if (name == "gs") return Variant::GraphStructured;
  throw ConfigError("unknown model variant '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (V < 1 || T < 1 || K < 1 || C < 1)
    throw ConfigError("V, T, K and C must all be >= 1");
  if (chain == ChainFamily::Gmc)
    throw ConfigError("the dynamical system supports the nbrgmp and prgmc chains only");
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw ConfigError(std::string(name) + " must be positive and finite");
  };
  positive(eps0, "eps0");
  positive(eps0_lambda, "eps0_lambda");
  positive(tau, "tau");
  positive(psi, "psi");
  positive(r0, "r0");
  positive(c0, "c0");
  positive(a_hat, "a_hat");
  positive(b_hat, "b_hat");
  if (!(eps0_theta >= 0.0) || !std::isfinite(eps0_theta))
    throw ConfigError("eps0_theta must be >= 0");
  if (forecast_horizon < 1) throw ConfigError("forecast horizon must be >= 1");
  if (sample_psi && chain != ChainFamily::Nbrgmp)
    throw ConfigError("psi sampling requires the nbrgmp chain");
}

ChainConfig ModelConfig::chain_config() const {
  ChainConfig c;
  c.family = chain;
  c.K = K;
  c.tau = tau;
  c.psi = psi;
  c.eps0_theta = eps0_theta;
  return c;
}

double ModelConfig::next_step_exposure(double tau_value, double psi_value) const {
  if (chain == ChainFamily::Prgmc) return tau_value;
  return tau_value * std::log1p(1.0 / psi_value);
}

CountMatrix CountMatrix::zeros(int V, int T) {
  CountMatrix m;
  m.values = CountMatrixData::Zero(V, T);
  m.dim_labels.reserve(static_cast<std::size_t>(V));
  m.time_labels.reserve(static_cast<std::size_t>(T));
  for (int v = 0; v < V; ++v) m.dim_labels.push_back("v" + std::to_string(v + 1));
  for (int t = 0; t < T; ++t) m.time_labels.push_back("t" + std::to_string(t + 1));
  return m;
}

void CountMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 1)
    throw DataFormatError("count matrix must be at least 1 x 1");
  if (static_cast<Eigen::Index>(dim_labels.size()) != values.rows() ||
      static_cast<Eigen::Index>(time_labels.size()) != values.cols())
    throw DataFormatError("count matrix labels do not match its shape");
  if ((values.array() < 0).any()) throw DataFormatError("count matrix has negative entries");
}

Matrix effective_concentration(const ModelConfig& config, const LatentState& state) {
  const int K = state.K();
  if (std::holds_alternative<FsState>(state.transition))
    return std::get<FsState>(state.transition).A.cast<double>();
  if (std::holds_alternative<GsState>(state.transition)) {
    const auto& gs = std::get<GsState>(state.transition);
    return gs.D.cwiseProduct(gs.Z.cast<double>());
  }
  return Matrix::Constant(K, K, config.eps0);
}

Matrix factor_rate(const CommunityState& communities) {
  Matrix rate = communities.M * communities.r.asDiagonal() * communities.M.transpose();
  rate.diagonal().setZero();
  return rate;
}

CommunityState sample_community_prior(const ModelConfig& config, RngStream& rng) {
  CommunityState cs;
  cs.M.resize(config.K, config.C);
  cs.r.resize(config.C);
  for (int c = 0; c < config.C; ++c) {
    for (int k = 0; k < config.K; ++k)
      cs.M(k, c) = sample_gamma(config.a_hat, config.b_hat, rng);
    cs.r[c] = sample_gamma(config.r0 / config.C, config.c0, rng);
  }
  return cs;
}

TransitionPrior sample_transition_structure(const ModelConfig& config,
                                            const CommunityState& communities,
                                            RngStream& rng) {
  const int K = config.K;
  const int C = config.C;
  if (config.variant == Variant::Plain) return PlainPrior{};

  std::vector<Count> allocations(static_cast<std::size_t>(K) * K * C, 0);
  CountMatrixData counts = CountMatrixData::Zero(K, K);
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      if (k1 == k2) continue;
      Count total = 0;
      for (int c = 0; c < C; ++c) {
        const double rate =
            communities.M(k1, c) * communities.r[c] * communities.M(k2, c);
        const Count x = sample_poisson(rate, rng);
        allocations[allocation_index(k1, k2, c, K, C)] = x;
        total += x;
      }
      counts(k1, k2) = total;
    }
  }

  if (config.variant == Variant::FactorStructured) {
    FsState fs;
    fs.self_rate = sample_gamma(config.eps0, config.eps0, rng);
    fs.A = counts;
    for (int k = 0; k < K; ++k) fs.A(k, k) = 1 + sample_poisson(fs.self_rate, rng);
    fs.allocations = std::move(allocations);
    return fs;
  }

  GsState gs;
  gs.W = counts;
  gs.Z = (counts.array() >= 1).cast<Count>();
  gs.D.resize(K, K);
  for (int k2 = 0; k2 < K; ++k2) {
    gs.Z(k2, k2) = 1;
    for (int k1 = 0; k1 < K; ++k1) gs.D(k1, k2) = sample_gamma(config.eps0, config.eps0, rng);
  }
  gs.allocations = std::move(allocations);
  return gs;
}

LatentState sample_prior_parameters(const ModelConfig& config, const RngStream& rng) {
  config.validate();
  const int V = config.V;
  const int T = config.T;
  const int K = config.K;
  LatentState s;
  RngStream hyper = rng.split("hyper");
  s.psi = config.sample_psi ? sample_gamma(config.eps0, config.eps0, hyper) : config.psi;
  s.tau = config.sample_tau ? sample_gamma(config.eps0, config.eps0, hyper) : config.tau;
  s.gamma = sample_gamma(config.eps0, config.eps0, hyper);
  s.beta = sample_gamma(config.eps0, config.eps0, hyper);
  s.g.resize(K);
  s.lambda.resize(K);
  for (int k = 0; k < K; ++k) {
    s.g[k] = sample_poisson(s.gamma / K, hyper);
    s.lambda[k] = sample_gamma(config.eps0_lambda / K + static_cast<double>(s.g[k]), s.beta,
                               hyper);
  }

  RngStream loadings = rng.split("phi");
  s.phi.resize(V, K);
  const Vector phi_conc = Vector::Constant(V, config.eps0);
  for (int k = 0; k < K; ++k)
    sample_dirichlet(std::span<const double>(phi_conc.data(), V), loadings,
                     std::span<double>(s.phi.col(k).data(), V));

  RngStream structure = rng.split("transition");
  if (config.variant != Variant::Plain)
    s.communities = sample_community_prior(config, structure);
  s.transition = sample_transition_structure(config, s.communities, structure);
  const Matrix conc = effective_concentration(config, s);
  s.pi.resize(K, K);
  for (int k = 0; k < K; ++k) {
    const Vector col = conc.col(k);
    sample_dirichlet(std::span<const double>(col.data(), K), structure,
                     std::span<double>(s.pi.col(k).data(), K));
  }

  RngStream bursts = rng.split("delta");
  s.delta.resize(T);
  if (config.stationary_delta) {
    s.delta.setConstant(sample_gamma(config.eps0, config.eps0, bursts));
  } else {
    for (int t = 0; t < T; ++t) s.delta[t] = sample_gamma(config.eps0, config.eps0, bursts);
  }

  s.theta = Matrix::Zero(K, T + 1);
  s.theta.col(0) = s.lambda;
  s.h = CountMatrixData::Zero(K, T);
  s.h_hat = Matrix::Zero(K, T);
  return s;
}

LatentState sample_prior(const ModelConfig& config, const RngStream& rng) {
  LatentState s = sample_prior_parameters(config, rng);
  const int K = config.K;
  const int T = config.T;
  RngStream chain = rng.split("chain");
  for (int t = 1; t <= T; ++t) {
    const Vector shape = s.tau * (s.pi * s.theta.col(t - 1));
    for (int k = 0; k < K; ++k) {
      Count h;
      if (config.chain == ChainFamily::Nbrgmp) {
        s.h_hat(k, t - 1) = sample_gamma(shape[k], s.psi, chain);
        h = sample_poisson(s.h_hat(k, t - 1), chain);
      } else {
        h = sample_poisson(shape[k], chain);
      }
      s.h(k, t - 1) = h;
      s.theta(k, t) =
          sample_gamma(config.eps0_theta + static_cast<double>(h), s.tau, chain);
    }
  }
  return s;
}

double poisson_rate(const LatentState& state, int v, int t) {
  if (v < 0 || v >= state.V() || t < 0 || t >= state.T())
    throw ParameterError("poisson_rate index out of range");
  double sum = 0.0;
  for (int k = 0; k < state.K(); ++k)
    sum += state.lambda[k] * state.phi(v, k) * state.theta(k, t + 1);
  return state.delta[t] * sum;
}

Matrix poisson_rates(const LatentState& state) {
  const int T = state.T();
  Matrix rates = state.phi * state.lambda.asDiagonal() * state.theta.rightCols(T);
  return rates * state.delta.asDiagonal();
}

CountMatrix generate_counts(const ModelConfig& config, const LatentState& state,
                            const RngStream& rng) {
  const Matrix rates = poisson_rates(state);
  CountMatrix out = CountMatrix::zeros(config.V, config.T);
  if (rates.rows() != config.V || rates.cols() != config.T)
    throw ConfigError("state shape does not match config");
  for (int t = 0; t < config.T; ++t) {
    RngStream col_rng = rng.split(static_cast<std::uint64_t>(t));
    for (int v = 0; v < config.V; ++v) {
      const double rate = rates(v, t);
      if (!std::isfinite(rate) || rate < 0.0)
        throw NumericalError("non-finite Poisson rate at cell (" + std::to_string(v) + ", " +
                             std::to_string(t) + ")");
      out.values(v, t) = sample_poisson(rate, col_rng);
    }
  }
  return out;
}

void check_state(const ModelConfig& config, const LatentState& s, double simplex_tol) {
  const int K = config.K;
  auto fail = [](const std::string& what) { throw StructuralError(what); };
  if (s.K() != K || s.T() != config.T || s.V() != config.V) fail("state dimensions");
  if (s.theta.rows() != K || s.theta.cols() != config.T + 1) fail("theta shape");
  if (s.h.rows() != K || s.h.cols() != config.T) fail("h shape");
  if (s.pi.rows() != K || s.pi.cols() != K) fail("pi shape");
  if ((s.theta.col(0).array() != s.lambda.array()).any()) fail("theta(:,0) != lambda");
  if ((s.theta.array() < 0.0).any() || !s.theta.allFinite()) fail("theta not >= 0");
  if ((s.h.array() < 0).any()) fail("h not >= 0");
  for (int k = 0; k < K; ++k) {
    if (std::fabs(s.phi.col(k).sum() - 1.0) > simplex_tol) fail("phi column off simplex");
    if (std::fabs(s.pi.col(k).sum() - 1.0) > simplex_tol) fail("pi column off simplex");
  }
  if ((s.phi.array() < 0.0).any() || (s.pi.array() < 0.0).any()) fail("negative simplex entry");
  if (config.stationary_delta && (s.delta.array() != s.delta[0]).any())
    fail("stationary delta differs across time");
  const Matrix conc = effective_concentration(config, s);
  for (int k2 = 0; k2 < K; ++k2) {
    if (!(conc(k2, k2) > 0.0)) fail("transition diagonal concentration not positive");
    for (int k1 = 0; k1 < K; ++k1)
      if (conc(k1, k2) == 0.0 && s.pi(k1, k2) != 0.0) fail("pi nonzero where concentration is 0");
  }
  if (const auto* gs = std::get_if<GsState>(&s.transition)) {
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = 0; k2 < K; ++k2) {
        if (k1 == k2) {
          if (gs->Z(k1, k2) != 1) fail("GS diagonal mask must be 1");
        } else if ((gs->W(k1, k2) >= 1) != (gs->Z(k1, k2) == 1)) {
          fail("GS mask inconsistent with latent counts");
        }
      }
  }
}

}  // namespace nbrgds
