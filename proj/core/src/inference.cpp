#include "nbrgds/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nbrgds/conditionals.hpp"
#include "nbrgds/distributions.hpp"
#include "nbrgds/errors.hpp"
#include "nbrgds/parallel.hpp"
#include "nbrgds/transition_prior.hpp"

namespace nbrgds {

// -- schedule --------------------------------------------------------------

void Schedule::validate() const {
  if (total < 1) throw ConfigError("schedule total must be >= 1");
  if (burn_in < 0) throw ConfigError("burn-in must be >= 0");
  if (burn_in >= total) throw ConfigError("burn-in must be smaller than the total iterations");
  if (thin < 1) throw ConfigError("thinning interval must be >= 1");
}

int Schedule::retained() const { return (total - burn_in) / thin; }

bool Schedule::keeps(int iteration) const {
  return iteration > burn_in && iteration <= total && (iteration - burn_in) % thin == 0;
}

// -- context ---------------------------------------------------------------

SweepContext::SweepContext(CountMatrix counts, MaskSpec mask, ModelConfig config,
                           SamplerOptions options)
    : counts_(std::move(counts)),
      mask_spec_(std::move(mask)),
      config_(std::move(config)),
      options_(options) {
  config_.validate();
  counts_.validate();
  if (counts_.V() != config_.V || counts_.T() != config_.T)
    throw ConfigError("data is " + std::to_string(counts_.V()) + " x " +
                      std::to_string(counts_.T()) + " but the model expects " +
                      std::to_string(config_.V) + " x " + std::to_string(config_.T));
  mask_spec_.normalize();
  mask_ = ObservationMask(mask_spec_, config_.V, config_.T);
  index_cells();
}

void SweepContext::set_counts(CountMatrix counts) {
  if (counts.V() != config_.V || counts.T() != config_.T)
    throw ConfigError("replacement data has the wrong shape");
  counts_ = std::move(counts);
  index_cells();
}

void SweepContext::index_cells() {
  const int V = config_.V;
  const int T = config_.T;
  cells_.clear();
  column_begin_.assign(static_cast<std::size_t>(T) + 1, 0);
  column_totals_.assign(static_cast<std::size_t>(T), 0);
  for (int t = 0; t < T; ++t) {
    column_begin_[t] = cells_.size();
    for (int v = 0; v < V; ++v) {
      if (mask_.masked(v, t)) continue;
      const Count n = counts_.values(v, t);
      column_totals_[t] += n;
      if (n > 0) cells_.push_back({v, t, n});
    }
  }
  column_begin_[T] = cells_.size();
}

Matrix observed_mass(const SweepContext& ctx, const LatentState& state) {
  const int K = state.K();
  const int T = state.T();
  Matrix mass = Matrix::Ones(K, T);
  for (int t = 0; t < T; ++t) {
    if (ctx.mask().column_fully_masked(t)) {
      mass.col(t).setZero();
      continue;
    }
    for (int v : ctx.mask().masked_in_column(t)) mass.col(t) -= state.phi.row(v).transpose();
    mass.col(t) = mass.col(t).cwiseMax(0.0);
  }
  return mass;
}

double next_step_exposure(const ModelConfig& config, const LatentState& state) {
  return config.next_step_exposure(state.tau, state.psi);
}

// -- blocks ----------------------------------------------------------------

void allocate_tokens(const SweepContext& ctx, const LatentState& state, AuxiliaryCounts& aux,
                     const RngStream& rng) {
  const int K = state.K();
  const int T = state.T();
  const auto& cells = ctx.cells();
  aux.tokens.assign(cells.size() * static_cast<std::size_t>(K), 0);
  aux.component_totals = CountMatrixData::Zero(K, T);

  parallel_for(static_cast<std::size_t>(T), ctx.options().workers, [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    RngStream r = rng.split(ti);
    std::vector<double> weights(static_cast<std::size_t>(K));
    for (std::size_t i = ctx.column_begin(t); i < ctx.column_begin(t + 1); ++i) {
      const ObservedCell& cell = cells[i];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        weights[k] = state.lambda[k] * state.phi(cell.v, k) * state.theta(k, t + 1);
        total += weights[k];
      }
      if (!(total > 0.0))
        throw NumericalError("every component has zero rate at observed cell (" +
                             std::to_string(cell.v) + ", " + std::to_string(t) + ") with count " +
                             std::to_string(cell.n) + "; the components have collapsed");
      std::span<Count> out(aux.tokens.data() + i * K, static_cast<std::size_t>(K));
      sample_multinomial_thinning(cell.n, weights, r, out);
      for (int k = 0; k < K; ++k) aux.component_totals(k, t) += out[k];
    }
  });

  aux.dim_totals = CountMatrixData::Zero(ctx.config().V, K);
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (int k = 0; k < K; ++k) aux.dim_totals(cells[i].v, k) += aux.tokens[i * K + k];
}

double chain_count_log_weight(const ChainCountTerms& c, Count h) {
  if (h < 0) return -INFINITY;
  const double hd = static_cast<double>(h);
  const double md = static_cast<double>(c.evidence);
  double lw;
  if (c.negative_binomial) {
    if (c.shape == 0.0) return h == 0 ? (c.eps == 0.0 && c.evidence > 0 ? -INFINITY : 0.0)
                                      : -INFINITY;
    lw = std::lgamma(c.shape + hd) - std::lgamma(c.shape) - std::lgamma(hd + 1.0) -
         hd * std::log1p(c.psi);
  } else {
    if (c.shape == 0.0) return h == 0 ? (c.eps == 0.0 && c.evidence > 0 ? -INFINITY : 0.0)
                                      : -INFINITY;
    lw = hd * std::log(c.shape) - std::lgamma(hd + 1.0);
  }
  lw += hd * (std::log(c.tau) - std::log(c.tau + c.exposure));
  if (c.eps + hd == 0.0) return c.evidence == 0 ? lw : -INFINITY;
  if (c.evidence > 0) lw += std::lgamma(c.eps + hd + md) - std::lgamma(c.eps + hd);
  return lw;
}

Count sample_chain_count(const ChainCountTerms& c, RngStream& rng) {
  const bool zero_excluded = c.eps == 0.0 && c.evidence > 0;
  if (!(c.shape > 0.0)) {
    if (zero_excluded)
      throw StructuralError("evidence on a chain state whose shape is zero");
    return 0;
  }
  const double rho = c.tau / (c.tau + c.exposure);
  const double s = c.shape;
  const double md = static_cast<double>(c.evidence);
  const double base = c.negative_binomial ? rho / (1.0 + c.psi) : s * rho;
  // factor of w(h+1)/w(h) contributed by the integrated theta
  auto evidence_factor = [&](double hd) {
    return c.evidence == 0 ? 1.0 : (c.eps + hd + md) / (c.eps + hd);
  };
  auto ratio = [&](double hd) {
    const double nb = c.negative_binomial ? (s + hd) / (hd + 1.0) : 1.0 / (hd + 1.0);
    return base * nb * evidence_factor(hd);
  };
  // upper bound of ratio(h') for all h' >= h
  auto ratio_bound = [&](double hd) {
    const double nb =
        c.negative_binomial ? std::max(1.0, (s + hd) / (hd + 1.0)) : 1.0 / (hd + 1.0);
    return base * nb * evidence_factor(hd);
  };

  thread_local std::vector<double> logw;
  logw.clear();
  const Count lo = zero_excluded ? 1 : 0;
  double lw = 0.0;
  double max_lw = 0.0;
  double total = 0.0;  // sum of exp(logw - max_lw)
  constexpr double kLogTol = -27.631021115928547;  // log(1e-12)
  constexpr Count kMaxTerms = 100000000;
  for (Count h = lo;; ++h) {
    logw.push_back(lw);
    if (lw > max_lw) {
      total = total * std::exp(max_lw - lw) + 1.0;
      max_lw = lw;
    } else {
      total += std::exp(lw - max_lw);
    }
    const double hd = static_cast<double>(h);
    const double bound = ratio_bound(hd);
    if (bound < 1.0) {
      const double tail = lw + std::log(bound / (1.0 - bound));
      if (tail - max_lw < kLogTol + std::log(total)) break;
    }
    if (h - lo > kMaxTerms) throw NumericalError("chain count enumeration did not terminate");
    lw += std::log(ratio(hd));
  }
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    u -= std::exp(logw[i] - max_lw);
    if (u < 0.0) return lo + static_cast<Count>(i);
  }
  return lo + static_cast<Count>(logw.size()) - 1;
}

void sample_chain(const SweepContext& ctx, LatentState& state, AuxiliaryCounts& aux,
                  const RngStream& rng) {
  const ModelConfig& cfg = ctx.config();
  const int K = state.K();
  const int T = state.T();
  const bool nb = cfg.chain == ChainFamily::Nbrgmp;
  const Matrix mass = observed_mass(ctx, state);
  const double kappa = next_step_exposure(cfg, state);
  const double scale = ctx.options().theta_rate_scale;

  aux.tables = CountMatrixData::Zero(K, T);
  aux.incoming = CountMatrixData::Zero(K, T);
  aux.source_tables.assign(static_cast<std::size_t>(T), CountMatrixData::Zero(K, K));
  std::vector<double> weights(static_cast<std::size_t>(K));
  std::vector<Count> split(static_cast<std::size_t>(K));
  Vector drive(K);

  for (int t = T - 1; t >= 0; --t) {
    RngStream r = rng.split(static_cast<std::uint64_t>(t));
    const bool has_next = t + 1 < T;
    drive.noalias() = state.pi * state.theta.col(t);
    for (int k = 0; k < K; ++k) {
      ChainCountTerms terms;
      terms.negative_binomial = nb;
      terms.shape = state.tau * drive[k];
      terms.psi = state.psi;
      terms.eps = cfg.eps0_theta;
      terms.evidence = aux.component_totals(k, t) + (has_next ? aux.incoming(k, t + 1) : 0);
      terms.tau = state.tau;
      terms.exposure = state.delta[t] * state.lambda[k] * mass(k, t) + (has_next ? kappa : 0.0);
      const Count h = sample_chain_count(terms, r);
      state.h(k, t) = h;
      const GammaParams p = theta_conditional(
          cfg.eps0_theta, h, aux.component_totals(k, t), has_next ? aux.incoming(k, t + 1) : 0,
          state.tau, state.delta[t] * state.lambda[k] * mass(k, t), has_next ? kappa : 0.0);
      state.theta(k, t + 1) = sample_gamma(p.shape, p.rate * scale, r);
    }
    CountMatrixData& src = aux.source_tables[static_cast<std::size_t>(t)];
    for (int k = 0; k < K; ++k) {
      const Count h = state.h(k, t);
      if (h == 0) continue;
      for (int k2 = 0; k2 < K; ++k2) weights[k2] = state.pi(k, k2) * state.theta(k2, t);
      const Count l = nb ? sample_crt(h, state.tau * drive[k], r) : h;
      aux.tables(k, t) = l;
      sample_multinomial_thinning(l, weights, r, split);
      for (int k2 = 0; k2 < K; ++k2) {
        src(k, k2) = split[k2];
        aux.incoming(k2, t) += split[k2];
      }
    }
  }
  aux.transition_tables = CountMatrixData::Zero(K, K);
  for (const auto& src : aux.source_tables) aux.transition_tables += src;
}

void sample_lambda_block(const SweepContext& ctx, LatentState& state, const AuxiliaryCounts& aux,
                         const RngStream& rng) {
  const ModelConfig& cfg = ctx.config();
  const int K = state.K();
  const int T = state.T();
  const Matrix mass = observed_mass(ctx, state);
  const double kappa = next_step_exposure(cfg, state);
  RngStream r = rng.split("lambda");

  for (int k = 0; k < K; ++k) {
    double exposure = 0.0;
    for (int t = 0; t < T; ++t) exposure += state.delta[t] * state.theta(k, t + 1) * mass(k, t);
    const Count tokens = aux.component_totals.row(k).sum();
    const GammaParams p = lambda_conditional(cfg.eps0_lambda, K, state.g[k], tokens,
                                             aux.incoming(k, 0), state.beta, exposure, kappa);
    state.lambda[k] = sample_gamma(p.shape, p.rate, r);
  }
  state.theta.col(0) = state.lambda;

  const double base = cfg.eps0_lambda / K;
  Count sum_g = 0;
  for (int k = 0; k < K; ++k) {
    state.g[k] = sample_bessel(base - 1.0,
                               2.0 * std::sqrt(state.gamma * state.beta * state.lambda[k] / K), r);
    sum_g += state.g[k];
  }
  const GammaParams pg = gamma_conditional(cfg.eps0, sum_g);
  state.gamma = sample_gamma(pg.shape, pg.rate, r);
  const GammaParams pb = beta_conditional(cfg.eps0, K * base + static_cast<double>(sum_g),
                                          state.lambda.sum());
  state.beta = sample_gamma(pb.shape, pb.rate, r);
}

void sample_transition_block(const SweepContext& ctx, LatentState& state,
                             const AuxiliaryCounts& aux, const RngStream& rng) {
  RngStream r = rng.split("structure");
  sample_transition_prior(ctx.config(), state, aux.transition_tables, r);
  RngStream rp = rng.split("pi");
  sample_pi(ctx.config(), state, aux.transition_tables, rp);
}

void refresh_mixing(const SweepContext& ctx, LatentState& state, const RngStream& rng) {
  const int K = state.K();
  const int T = state.T();
  if (ctx.config().chain != ChainFamily::Nbrgmp) {
    state.h_hat.setZero();
    return;
  }
  parallel_for(static_cast<std::size_t>(T), ctx.options().workers, [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    RngStream r = rng.split(ti);
    const Vector shape = state.tau * (state.pi * state.theta.col(t));
    for (int k = 0; k < K; ++k) {
      const GammaParams p = h_hat_conditional(shape[k], state.h(k, t), state.psi);
      state.h_hat(k, t) = sample_gamma(p.shape, p.rate, r);
    }
  });
}

void sample_phi(const SweepContext& ctx, LatentState& state, const AuxiliaryCounts& aux,
                const RngStream& rng) {
  const ModelConfig& cfg = ctx.config();
  const int V = state.V();
  const int K = state.K();
  const int T = state.T();

  // Held-out cells are filled in with tokens drawn from the current rates so
  // the loading update stays conjugate.
  Matrix imputed_rate = Matrix::Zero(V, K);
  for (int t = 0; t < T; ++t)
    for (int v : ctx.mask().masked_in_column(t))
      for (int k = 0; k < K; ++k)
        imputed_rate(v, k) += state.delta[t] * state.lambda[k] * state.phi(v, k) * state.theta(k, t + 1);

  parallel_for(static_cast<std::size_t>(K), ctx.options().workers, [&](std::size_t ki) {
    const int k = static_cast<int>(ki);
    RngStream r = rng.split(ki);
    Vector conc(V);
    for (int v = 0; v < V; ++v) {
      const Count imputed = imputed_rate(v, k) > 0.0 ? sample_poisson(imputed_rate(v, k), r) : 0;
      conc[v] = cfg.eps0 + static_cast<double>(aux.dim_totals(v, k) + imputed);
    }
    sample_dirichlet(std::span<const double>(conc.data(), V), r,
                     std::span<double>(state.phi.col(k).data(), V));
  });
}

void sample_delta(const SweepContext& ctx, LatentState& state, const RngStream& rng) {
  const ModelConfig& cfg = ctx.config();
  const int K = state.K();
  const int T = state.T();
  const Matrix mass = observed_mass(ctx, state);
  RngStream r = rng.split("delta");
  Vector exposure(T);
  for (int t = 0; t < T; ++t) {
    double e = 0.0;
    for (int k = 0; k < K; ++k) e += state.lambda[k] * state.theta(k, t + 1) * mass(k, t);
    exposure[t] = e;
  }
  if (cfg.stationary_delta) {
    Count total = 0;
    for (int t = 0; t < T; ++t) total += ctx.observed_column_total(t);
    const GammaParams p = delta_conditional(cfg.eps0, total, exposure.sum());
    state.delta.setConstant(sample_gamma(p.shape, p.rate, r));
    return;
  }
  for (int t = 0; t < T; ++t) {
    const GammaParams p = delta_conditional(cfg.eps0, ctx.observed_column_total(t), exposure[t]);
    state.delta[t] = sample_gamma(p.shape, p.rate, r);
  }
}

void sample_psi(const SweepContext& ctx, LatentState& state, const RngStream& rng) {
  const ModelConfig& cfg = ctx.config();
  if (!cfg.sample_psi || cfg.chain != ChainFamily::Nbrgmp) return;
  const int T = state.T();
  double sum_shape = 0.0;
  for (int t = 0; t < T; ++t) sum_shape += state.tau * (state.pi * state.theta.col(t)).sum();
  const GammaParams p = psi_conditional(cfg.eps0, sum_shape, state.h_hat.sum());
  RngStream r = rng.split("psi");
  state.psi = sample_gamma(p.shape, p.rate, r);
}

namespace {

// Log density of the chain given tau, with the mixing variables instantiated.
double tau_log_target(const ModelConfig& cfg, const LatentState& s, double tau) {
  double lp = gamma_log_density(tau, cfg.eps0, cfg.eps0);
  const int K = s.K();
  const int T = s.T();
  const bool nb = cfg.chain == ChainFamily::Nbrgmp;
  for (int t = 0; t < T; ++t) {
    const Vector drive = s.pi * s.theta.col(t);
    for (int k = 0; k < K; ++k) {
      const double shape = tau * drive[k];
      if (nb) {
        if (shape > 0.0) lp += gamma_log_density(s.h_hat(k, t), shape, s.psi);
      } else {
        lp += poisson_log_pmf(s.h(k, t), shape);
      }
      const double a = cfg.eps0_theta + static_cast<double>(s.h(k, t));
      if (a > 0.0) lp += gamma_log_density(s.theta(k, t + 1), a, tau);
    }
  }
  return lp;
}

}  // namespace

void sample_tau(const SweepContext& ctx, LatentState& state, const RngStream& rng) {
  const ModelConfig& cfg = ctx.config();
  if (!cfg.sample_tau) return;
  RngStream r = rng.split("tau");
  const double current = state.tau;
  const double proposal = current * std::exp(ctx.options().tau_step * r.normal());
  const double log_ratio = tau_log_target(cfg, state, proposal) -
                           tau_log_target(cfg, state, current) + std::log(proposal) -
                           std::log(current);
  if (std::log(r.uniform_positive()) < log_ratio) state.tau = proposal;
}

namespace {

constexpr double kRescaleSteps[] = {0.01, 0.03, 0.1, 0.3};

double delta_prior_log(const ModelConfig& cfg, const LatentState& s, double c) {
  double lp = 0.0;
  const int n = cfg.stationary_delta ? 1 : s.T();
  for (int t = 0; t < n; ++t) lp += gamma_log_density(s.delta[t] / c, cfg.eps0, cfg.eps0);
  return lp;
}

// Terms of the chain that involve theta^(t) for t in [first, last] after
// scaling those columns by c. drive.col(t) = Pi theta^(t) before scaling.
double scaled_chain_log(const ModelConfig& cfg, const LatentState& s, const Matrix& drive,
                        int first, int last, double c) {
  const int K = s.K();
  const int T = s.T();
  const bool nb = cfg.chain == ChainFamily::Nbrgmp;
  double lp = 0.0;
  for (int t = first; t <= last; ++t) {
    if (t >= 1)
      for (int k = 0; k < K; ++k) {
        const double a = cfg.eps0_theta + static_cast<double>(s.h(k, t - 1));
        if (a > 0.0) lp += gamma_log_density(c * s.theta(k, t), a, s.tau);
      }
    if (t < T)
      for (int k = 0; k < K; ++k) {
        const double shape = s.tau * c * drive(k, t);
        if (nb) {
          if (shape > 0.0) lp += gamma_log_density(s.h_hat(k, t), shape, s.psi);
        } else {
          lp += poisson_log_pmf(s.h(k, t), shape);
        }
      }
  }
  return lp;
}

}  // namespace

void rescale_moves(const SweepContext& ctx, LatentState& state, const RngStream& rng) {
  const ModelConfig& cfg = ctx.config();
  const int K = state.K();
  const int T = state.T();
  const int n_delta = cfg.stationary_delta ? 1 : T;
  RngStream r = rng.split("rescale");

  // lambda <-> delta; lambda also seeds the chain as theta^(0)
  for (double step : kRescaleSteps) {
    const Vector drive0 = state.pi * state.lambda;
    Matrix drive = Matrix::Zero(K, T);
    drive.col(0) = drive0;
    const double c = std::exp(step * r.normal());
    double log_ratio = (K - n_delta) * std::log(c) + delta_prior_log(cfg, state, c) -
                       delta_prior_log(cfg, state, 1.0) +
                       scaled_chain_log(cfg, state, drive, 0, 0, c) -
                       scaled_chain_log(cfg, state, drive, 0, 0, 1.0);
    for (int k = 0; k < K; ++k) {
      const double a = cfg.eps0_lambda / K + static_cast<double>(state.g[k]);
      log_ratio += gamma_log_density(c * state.lambda[k], a, state.beta) -
                   gamma_log_density(state.lambda[k], a, state.beta);
    }
    if (std::log(r.uniform_positive()) < log_ratio) {
      state.lambda *= c;
      state.theta.col(0) = state.lambda;
      state.delta /= c;
    }
  }

  // theta^(1..T) <-> delta; zero states stay zero
  Count positive = 0;
  for (int t = 1; t <= T; ++t)
    for (int k = 0; k < K; ++k) positive += state.theta(k, t) > 0.0;
  for (double step : kRescaleSteps) {
    const Matrix drive = state.pi * state.theta.leftCols(T);
    const double c = std::exp(step * r.normal());
    const double log_ratio = static_cast<double>(positive - n_delta) * std::log(c) +
                             delta_prior_log(cfg, state, c) - delta_prior_log(cfg, state, 1.0) +
                             scaled_chain_log(cfg, state, drive, 1, T, c) -
                             scaled_chain_log(cfg, state, drive, 1, T, 1.0);
    if (std::log(r.uniform_positive()) < log_ratio) {
      state.theta.rightCols(T) *= c;
      state.delta /= c;
    }
  }
}

void sample_chain_block(const SweepContext& ctx, LatentState& state, AuxiliaryCounts& aux,
                        const RngStream& rng) {
  sample_chain(ctx, state, aux, rng.split("chain"));
  refresh_mixing(ctx, state, rng.split("mixing"));
}

void gibbs_sweep(const SweepContext& ctx, LatentState& state, AuxiliaryCounts& aux,
                 const RngStream& rng) {
  allocate_tokens(ctx, state, aux, rng.split("tokens"));
  sample_chain(ctx, state, aux, rng.split("chain"));
  sample_lambda_block(ctx, state, aux, rng.split("lambda"));
  sample_transition_block(ctx, state, aux, rng.split("transition"));
  refresh_mixing(ctx, state, rng.split("mixing"));
  sample_phi(ctx, state, aux, rng.split("phi"));
  sample_delta(ctx, state, rng.split("delta"));
  rescale_moves(ctx, state, rng.split("rescale"));
  sample_psi(ctx, state, rng.split("psi"));
  sample_tau(ctx, state, rng.split("tau"));
}

LatentState initialize_state(const SweepContext& ctx, const RngStream& rng) {
  const ModelConfig& cfg = ctx.config();
  const int V = cfg.V;
  const int T = cfg.T;
  const int K = cfg.K;
  LatentState s = sample_prior_parameters(cfg, rng.split("prior"));
  s.psi = cfg.psi;
  s.tau = cfg.tau;
  s.gamma = 1.0;
  s.beta = 1.0;
  s.lambda.setOnes();
  s.g.setZero();
  s.delta.setOnes();

  RngStream rphi = rng.split("phi");
  const Vector ones = Vector::Ones(V);
  for (int k = 0; k < K; ++k)
    sample_dirichlet(std::span<const double>(ones.data(), V), rphi,
                     std::span<double>(s.phi.col(k).data(), V));

  Count total = 0;
  std::size_t n_obs = 0;
  for (int t = 0; t < T; ++t) {
    total += ctx.observed_column_total(t);
    n_obs += static_cast<std::size_t>(V) - ctx.mask().masked_in_column(t).size();
  }
  const double mean_count = n_obs > 0 ? static_cast<double>(total) / n_obs : 1.0;
  // the data scale goes into delta; lambda and theta start near one so the
  // chain's own scale (set by eps0_theta, tau and psi) is not pushed far off
  s.delta.setConstant(std::max(mean_count, 1e-2) * V / K);

  RngStream rtheta = rng.split("theta");
  s.theta.col(0) = s.lambda;
  const bool nb = cfg.chain == ChainFamily::Nbrgmp;
  for (int t = 1; t <= T; ++t) {
    for (int k = 0; k < K; ++k) s.theta(k, t) = sample_gamma(2.0, 2.0, rtheta);
    const Vector shape = s.tau * (s.pi * s.theta.col(t - 1));
    for (int k = 0; k < K; ++k) {
      Count h = static_cast<Count>(std::llround(s.tau * s.theta(k, t)));
      if (cfg.eps0_theta == 0.0) h = std::max<Count>(h, 1);
      if (!(shape[k] > 0.0)) {
        h = 0;
        if (cfg.eps0_theta == 0.0) s.theta(k, t) = 0.0;
      }
      s.h(k, t - 1) = h;
      s.h_hat(k, t - 1) = nb ? static_cast<double>(h) : 0.0;
    }
  }
  return s;
}

double observed_log_likelihood(const SweepContext& ctx, const LatentState& state) {
  const Matrix rates = poisson_rates(state);
  double ll = 0.0;
  const auto& counts = ctx.counts().values;
  for (int t = 0; t < state.T(); ++t)
    for (int v = 0; v < state.V(); ++v)
      if (!ctx.mask().masked(v, t)) ll += poisson_log_pmf(counts(v, t), rates(v, t));
  return ll;
}

PosteriorTrace run_gibbs(const CountMatrix& counts, const MaskSpec& mask,
                         const ModelConfig& config, const Schedule& schedule,
                         const RngStream& rng, const SamplerOptions& options,
                         const RunCallbacks& callbacks) {
  schedule.validate();
  SweepContext ctx(counts, mask, config, options);
  PosteriorTrace trace;
  trace.schedule = schedule;
  trace.samples.reserve(static_cast<std::size_t>(schedule.retained()));

  LatentState state = initialize_state(ctx, rng.split("init"));
  AuxiliaryCounts aux;
  const RngStream sweeps = rng.split("sweep");
  const auto& truth = ctx.counts().values;
  const auto& held = ctx.mask_spec().held_out;
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  for (int i = 1; i <= schedule.total; ++i) {
    gibbs_sweep(ctx, state, aux, sweeps.split(static_cast<std::uint64_t>(i)));

    DiagnosticRow row;
    row.iteration = i;
    const Matrix rates = poisson_rates(state);
    if (held.empty()) {
      row.heldout_mae = kNaN;
      row.heldout_mre = kNaN;
    } else {
      double mae = 0.0;
      double mre = 0.0;
      for (const auto& [v, t] : held) {
        const double n = static_cast<double>(truth(v, t));
        const double err = std::fabs(n - rates(v, t));
        mae += err;
        mre += err / (1.0 + n);
      }
      row.heldout_mae = mae / held.size();
      row.heldout_mre = mre / held.size();
    }
    double ll = 0.0;
    for (int t = 0; t < config.T; ++t)
      for (int v = 0; v < config.V; ++v)
        if (!ctx.mask().masked(v, t)) ll += poisson_log_pmf(truth(v, t), rates(v, t));
    row.joint_loglik = ll;
    trace.diagnostics.push_back(row);
    if (callbacks.on_diagnostics) callbacks.on_diagnostics(row);

    if (schedule.keeps(i)) {
      trace.sample_iterations.push_back(i);
      trace.samples.push_back(state);
      if (callbacks.on_sample) callbacks.on_sample(i, state);
    }
  }
  return trace;
}

}  // namespace nbrgds
