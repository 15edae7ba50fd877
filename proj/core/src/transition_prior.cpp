#include "nbrgds/transition_prior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nbrgds/conditionals.hpp"
#include "nbrgds/distributions.hpp"
#include "nbrgds/errors.hpp"

namespace nbrgds {

namespace {

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

DirichletAux sample_dirichlet_aux(const CountMatrixData& tables, const Matrix& concentration,
                                  RngStream& rng) {
  const Eigen::Index K = concentration.cols();
  if (tables.rows() != K || tables.cols() != K || concentration.rows() != K)
    throw ParameterError("dirichlet aux: shape mismatch");
  DirichletAux aux;
  aux.q = Vector::Ones(K);
  aux.exposure = Vector::Zero(K);
  aux.tables = CountMatrixData::Zero(K, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double alpha = concentration.col(k).sum();
    if (!(alpha > 0.0))
      throw StructuralError("transition column " + std::to_string(k) +
                            " has zero total concentration");
    const Count total = tables.col(k).sum();
    if (total > 0) {
      // log q for q ~ Beta(alpha, total), kept in log space
      const double la = sample_log_gamma_unit(alpha, rng);
      const double lb = sample_log_gamma_unit(static_cast<double>(total), rng);
      const double log_q = la - log_sum_exp(la, lb);
      aux.exposure[k] = -log_q;
      aux.q[k] = std::exp(log_q);
    }
    for (Eigen::Index k1 = 0; k1 < K; ++k1) {
      const Count L = tables(k1, k);
      if (L == 0) continue;
      if (!(concentration(k1, k) > 0.0))
        throw StructuralError("transition tables on a zero-concentration entry");
      aux.tables(k1, k) = sample_crt(L, concentration(k1, k), rng);
    }
  }
  return aux;
}

Count sample_a_fs(Count t, double omega, double mu, RngStream& rng) {
  if (t < 0 || !(omega >= 0.0) || !(mu >= 0.0) || !std::isfinite(mu))
    throw ParameterError("sample_a_fs: invalid arguments");
  const double x = mu * std::exp(-omega);
  if (t == 0) return sample_poisson(x, rng);
  if (!(x > 0.0))
    throw StructuralError("factor rate is zero but the concentration has tables");
  const double td = static_cast<double>(t);
  auto ratio_up = [x, td](Count a) {
    const double ad = static_cast<double>(a);
    return x * std::exp(td * std::log1p(1.0 / ad)) / (ad + 1.0);
  };
  const Count guess = std::max<Count>(1, static_cast<Count>(x + td));
  return detail::sample_unimodal(1, guess, ratio_up, rng);
}

Count sample_a_fs_diagonal(Count t, double omega, double self_rate, RngStream& rng) {
  if (t < 0 || !(omega >= 0.0) || !(self_rate >= 0.0))
    throw ParameterError("sample_a_fs_diagonal: invalid arguments");
  const double y = self_rate * std::exp(-omega);
  if (t == 0) return 1 + sample_poisson(y, rng);
  if (!(y > 0.0)) return 1;
  const double td = static_cast<double>(t);
  auto ratio_up = [y, td](Count b) {
    const double bd = static_cast<double>(b) + 1.0;
    return y * std::exp(td * std::log1p(1.0 / bd)) / bd;
  };
  return 1 + detail::sample_unimodal(0, static_cast<Count>(y), ratio_up, rng);
}

bool sample_z_gs(Count tables, double d, double q, double factor_rate, RngStream& rng) {
  if (tables > 0) return true;
  if (!(factor_rate > 0.0)) return false;
  // prior odds (1 - e^-rate) / e^-rate times the zero-table evidence q^d
  const double log_odds = std::log(std::expm1(factor_rate)) + d * std::log(q);
  const double p = 1.0 / (1.0 + std::exp(-log_odds));
  return rng.uniform() < p;
}

Count sample_w_gs(bool z, double factor_rate, RngStream& rng) {
  if (!z) return 0;
  if (!(factor_rate > 0.0)) throw StructuralError("active edge with zero factor rate");
  return sample_truncated_poisson(factor_rate, rng);
}

double sample_d_gs(Count t, double omega, double eps0, RngStream& rng) {
  const GammaParams p = d_conditional(eps0, t, omega);
  return sample_gamma(p.shape, p.rate, rng);
}

void split_allocation(Count total, int k1, int k2, const CommunityState& communities,
                      std::vector<Count>& allocations, RngStream& rng) {
  const int K = static_cast<int>(communities.M.rows());
  const int C = static_cast<int>(communities.M.cols());
  Count* out = allocations.data() + allocation_index(k1, k2, 0, K, C);
  if (total == 0) {
    std::fill(out, out + C, Count{0});
    return;
  }
  thread_local std::vector<double> weights;
  weights.resize(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c)
    weights[c] = communities.M(k1, c) * communities.r[c] * communities.M(k2, c);
  sample_multinomial_thinning(total, weights, rng, std::span<Count>(out, C));
}

void sample_communities(const std::vector<Count>& allocations, CommunityState& communities,
                        const ModelConfig& config, RngStream& rng) {
  const int K = static_cast<int>(communities.M.rows());
  const int C = static_cast<int>(communities.M.cols());
  if (allocations.size() != static_cast<std::size_t>(K) * K * C)
    throw ParameterError("community allocations have the wrong size");

  CountMatrixData degree = CountMatrixData::Zero(K, C);
  CountVector per_community = CountVector::Zero(C);
  for (int k1 = 0; k1 < K; ++k1)
    for (int k2 = 0; k2 < K; ++k2) {
      if (k1 == k2) continue;
      const Count* x = allocations.data() + allocation_index(k1, k2, 0, K, C);
      for (int c = 0; c < C; ++c) {
        if (x[c] == 0) continue;
        degree(k1, c) += x[c];
        degree(k2, c) += x[c];
        per_community[c] += x[c];
      }
    }

  for (int c = 0; c < C; ++c) {
    double col_sum = communities.M.col(c).sum();
    const double rc = communities.r[c];
    for (int k = 0; k < K; ++k) {
      const double others = std::max(0.0, col_sum - communities.M(k, c));
      const double m = sample_gamma(config.a_hat + static_cast<double>(degree(k, c)),
                                    config.b_hat + 2.0 * rc * others, rng);
      col_sum = others + m;
      communities.M(k, c) = m;
    }
    const double sum_sq = communities.M.col(c).squaredNorm();
    const double s = communities.M.col(c).sum();
    const double pair_mass = std::max(0.0, s * s - sum_sq);
    communities.r[c] = sample_gamma(config.r0 / C + static_cast<double>(per_community[c]),
                                    config.c0 + pair_mass, rng);
  }
}

void sample_transition_prior(const ModelConfig& config, LatentState& state,
                             const CountMatrixData& tables, RngStream& rng) {
  if (config.variant == Variant::Plain) return;
  const int K = state.K();
  const int C = static_cast<int>(state.communities.M.cols());
  const Matrix conc = effective_concentration(config, state);
  const DirichletAux aux = sample_dirichlet_aux(tables, conc, rng);
  const Matrix rate = factor_rate(state.communities);
  std::vector<Count> allocations(static_cast<std::size_t>(K) * K * C, 0);

  if (auto* fs = std::get_if<FsState>(&state.transition)) {
    Count extra = 0;
    for (int k2 = 0; k2 < K; ++k2)
      for (int k1 = 0; k1 < K; ++k1) {
        const Count t = aux.tables(k1, k2);
        if (k1 == k2) {
          fs->A(k1, k2) = sample_a_fs_diagonal(t, aux.exposure[k2], fs->self_rate, rng);
          extra += fs->A(k1, k2) - 1;
        } else {
          fs->A(k1, k2) = sample_a_fs(t, aux.exposure[k2], rate(k1, k2), rng);
          split_allocation(fs->A(k1, k2), k1, k2, state.communities, allocations, rng);
        }
      }
    const GammaParams sp = self_rate_conditional(config.eps0, extra, K);
    fs->self_rate = sample_gamma(sp.shape, sp.rate, rng);
    fs->allocations = allocations;
  } else if (auto* gs = std::get_if<GsState>(&state.transition)) {
    for (int k2 = 0; k2 < K; ++k2)
      for (int k1 = 0; k1 < K; ++k1) {
        const Count t = aux.tables(k1, k2);
        if (k1 == k2) {
          gs->Z(k1, k2) = 1;
          gs->W(k1, k2) = 0;
          gs->D(k1, k2) = sample_d_gs(t, aux.exposure[k2], config.eps0, rng);
          continue;
        }
        const bool z = sample_z_gs(tables(k1, k2), gs->D(k1, k2), aux.q[k2], rate(k1, k2), rng);
        gs->Z(k1, k2) = z ? 1 : 0;
        gs->W(k1, k2) = sample_w_gs(z, rate(k1, k2), rng);
        split_allocation(gs->W(k1, k2), k1, k2, state.communities, allocations, rng);
        gs->D(k1, k2) = z ? sample_d_gs(t, aux.exposure[k2], config.eps0, rng)
                          : sample_gamma(config.eps0, config.eps0, rng);
      }
    gs->allocations = allocations;
  }
  sample_communities(allocations, state.communities, config, rng);
}

void sample_pi(const ModelConfig& config, LatentState& state, const CountMatrixData& tables,
               RngStream& rng) {
  const int K = state.K();
  const Matrix conc = effective_concentration(config, state);
  Vector post(K);
  for (int k = 0; k < K; ++k) {
    for (int k1 = 0; k1 < K; ++k1) post[k1] = conc(k1, k) + static_cast<double>(tables(k1, k));
    sample_dirichlet(std::span<const double>(post.data(), K), rng,
                     std::span<double>(state.pi.col(k).data(), K));
  }
}

GraphSummary extract_graph(const GsState& gs, const CommunityState& communities,
                           double threshold) {
  const int K = static_cast<int>(gs.Z.rows());
  const int C = static_cast<int>(communities.r.size());
  GraphSummary g;
  for (int k2 = 0; k2 < K; ++k2)
    for (int k1 = 0; k1 < K; ++k1)
      if (k1 != k2 && gs.Z(k1, k2) == 1) g.edges.push_back({k2, k1, gs.D(k1, k2)});
  g.community.assign(static_cast<std::size_t>(K), 0);
  g.membership.assign(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    double best = -1.0;
    for (int c = 0; c < C; ++c) {
      const double w = communities.r[c] * communities.M(k, c);
      if (w > best) {
        best = w;
        g.community[k] = c;
      }
    }
    g.membership[k] = std::max(0.0, best);
  }
  const double rmax = C > 0 ? communities.r.maxCoeff() : 0.0;
  for (int c = 0; c < C; ++c)
    if (communities.r[c] >= threshold * rmax) g.active.push_back(c);
  return g;
}

}  // namespace nbrgds
