#pragma once

#include <vector>

#include "nbrgds/model.hpp"
#include "nbrgds/rng.hpp"
#include "nbrgds/types.hpp"

namespace nbrgds {

/// Beta/CRT augmentation of the Dirichlet-multinomial over the transition
/// columns. After augmentation, concentration a(k1,k) contributes
/// a^tables(k1,k) * exp(-exposure[k] * a).
struct DirichletAux {
  Vector q;                 // K, in (0, 1]
  Vector exposure;          // K, -ln q
  CountMatrixData tables;   // K x K
};

/// `tables` holds the aggregated transition tables L (row = target, column =
/// source); `concentration` the effective Dirichlet concentrations.
DirichletAux sample_dirichlet_aux(const CountMatrixData& tables, const Matrix& concentration,
                                  RngStream& rng);

/// Off-diagonal FS concentration: p(a) ~ (mu e^-omega)^a a^t / a!, a >= 1(t > 0).
Count sample_a_fs(Count t, double omega, double mu, RngStream& rng);

/// FS diagonal concentration a = 1 + b with p(b) ~ (rate e^-omega)^b (b+1)^t / b!.
Count sample_a_fs_diagonal(Count t, double omega, double self_rate, RngStream& rng);

bool sample_z_gs(Count tables, double d, double q, double factor_rate, RngStream& rng);
Count sample_w_gs(bool z, double factor_rate, RngStream& rng);
double sample_d_gs(Count t, double omega, double eps0, RngStream& rng);

/// Splits `total` over communities with weights M(k1,c) r(c) M(k2,c) into
/// allocations[allocation_index(k1,k2,.)].
void split_allocation(Count total, int k1, int k2, const CommunityState& communities,
                      std::vector<Count>& allocations, RngStream& rng);

/// Conjugate update of the community factors given off-diagonal allocations.
void sample_communities(const std::vector<Count>& allocations, CommunityState& communities,
                        const ModelConfig& config, RngStream& rng);

/// Updates the FS or GS structure and community factors with the transition
/// columns integrated out, given tables L. The caller must resample Pi
/// afterwards. No-op for the plain variant.
void sample_transition_prior(const ModelConfig& config, LatentState& state,
                             const CountMatrixData& tables, RngStream& rng);

/// Pi columns ~ Dirichlet(concentration + tables).
void sample_pi(const ModelConfig& config, LatentState& state, const CountMatrixData& tables,
               RngStream& rng);

struct GraphEdge {
  int source = 0;
  int target = 0;
  double weight = 0.0;
};

struct GraphSummary {
  std::vector<GraphEdge> edges;      // z(target, source) = 1, target != source
  std::vector<int> community;        // per vertex, argmax_c r_c M(k,c)
  std::vector<double> membership;    // r_c M(k,c) at the assigned community
  std::vector<int> active;           // communities with r_c >= threshold * max r
};

GraphSummary extract_graph(const GsState& gs, const CommunityState& communities,
                           double threshold);

}  // namespace nbrgds
