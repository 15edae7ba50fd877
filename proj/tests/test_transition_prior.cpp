#include <doctest.h>

#include <cmath>
#include <vector>

#include "nbrgds/distributions.hpp"
#include "nbrgds/errors.hpp"
#include "nbrgds/model.hpp"
#include "nbrgds/transition_prior.hpp"
#include "oracles.hpp"

using namespace nbrgds;

namespace {

double tv_against(const std::vector<double>& hist, const std::vector<double>& pmf) {
  double tv = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) tv += 0.5 * std::fabs(hist[i] - pmf[i]);
  return tv;
}

std::vector<double> normalized(std::vector<double> log_w) {
  const double m = *std::max_element(log_w.begin(), log_w.end());
  double z = 0.0;
  for (double& w : log_w) z += (w = std::exp(w - m));
  for (double& w : log_w) w /= z;
  return log_w;
}

// pairwise co-membership F1 between a planted and a recovered labelling
double pair_f1(const std::vector<int>& truth, const std::vector<int>& found) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = i + 1; j < truth.size(); ++j) {
      const bool a = truth[i] == truth[j], b = found[i] == found[j];
      tp += a && b;
      fp += !a && b;
      fn += a && !b;
    }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

}  // namespace

TEST_SUITE("transition_prior") {

TEST_CASE("Dirichlet auxiliaries") {
  RngStream rng(1);
  Matrix conc = Matrix::Ones(2, 2);
  CountMatrixData L = CountMatrixData::Zero(2, 2);
  DirichletAux aux = sample_dirichlet_aux(L, conc, rng);
  CHECK(aux.q[0] == 1.0);
  CHECK(aux.exposure[1] == 0.0);
  CHECK(aux.tables.isZero());

  L(0, 0) = 3;
  double mean_t = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    aux = sample_dirichlet_aux(L, conc, rng);
    CHECK(aux.q[0] > 0.0);
    CHECK(aux.q[0] <= 1.0);
    mean_t += static_cast<double>(aux.tables(0, 0)) / n;
  }
  CHECK(std::fabs(mean_t - (1.0 + 0.5 + 1.0 / 3.0)) < 0.01);

  conc(1, 0) = 0.0;
  L(1, 0) = 1;
  CHECK_THROWS_AS(sample_dirichlet_aux(L, conc, rng), StructuralError);
}

TEST_CASE("factor concentration conditional") {
  RngStream rng(2);
  double mean0 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) mean0 += static_cast<double>(sample_a_fs(0, 0.5, 3.0, rng)) / n;
  CHECK(std::fabs(mean0 - 3.0 * std::exp(-0.5)) < 0.02);
  for (int i = 0; i < 1000; ++i) CHECK(sample_a_fs(1, 0.5, 3.0, rng) >= 1);
  CHECK(sample_a_fs(0, 0.0, 0.0, rng) == 0);
  CHECK_THROWS_AS(sample_a_fs(2, 0.3, 0.0, rng), StructuralError);
  CHECK_THROWS_AS(sample_a_fs(-1, 0.3, 1.0, rng), ParameterError);

  for (Count t : {1, 2, 5}) {
    const double x = 3.0 * std::exp(-0.5);
    std::vector<double> lw{-1e300};
    for (int a = 1; a < 60; ++a)
      lw.push_back(a * std::log(x) + t * std::log(a) - std::lgamma(a + 1.0));
    const auto pmf = normalized(lw);
    std::vector<double> hist(60, 0.0);
    const int m = 1000000;
    for (int i = 0; i < m; ++i) {
      const Count a = sample_a_fs(t, 0.5, 3.0, rng);
      if (a < 60) hist[static_cast<std::size_t>(a)] += 1.0 / m;
    }
    CHECK(tv_against(hist, pmf) < 0.005);
  }
}

TEST_CASE("self-transition concentration is one plus a count") {
  RngStream rng(3);
  for (Count t : {0, 3}) {
    const double y = 1.5 * std::exp(-0.4);
    std::vector<double> lw;
    for (int b = 0; b < 50; ++b)
      lw.push_back(b * std::log(y) + t * std::log(b + 1.0) - std::lgamma(b + 1.0));
    const auto pmf = normalized(lw);
    std::vector<double> hist(50, 0.0);
    const int m = 500000;
    for (int i = 0; i < m; ++i) {
      const Count a = sample_a_fs_diagonal(t, 0.4, 1.5, rng);
      REQUIRE(a >= 1);
      if (a - 1 < 50) hist[static_cast<std::size_t>(a - 1)] += 1.0 / m;
    }
    CHECK(tv_against(hist, pmf) < 0.005);
  }
  CHECK(sample_a_fs_diagonal(4, 0.4, 0.0, rng) == 1);
}

TEST_CASE("edge indicator conditional") {
  RngStream rng(4);
  CHECK(sample_z_gs(1, 0.5, 0.3, 0.0, rng));
  CHECK_FALSE(sample_z_gs(0, 0.5, 0.3, 0.0, rng));
  const int n = 200000;
  double on = 0.0;
  for (int i = 0; i < n; ++i) on += sample_z_gs(0, 2.0, 1.0, std::log(2.0), rng) ? 1.0 / n : 0.0;
  CHECK(std::fabs(on - 0.5) < 0.005);
  // zero-table evidence q^d downweights the edge
  on = 0.0;
  for (int i = 0; i < n; ++i) on += sample_z_gs(0, 1.0, 0.5, std::log(2.0), rng) ? 1.0 / n : 0.0;
  CHECK(std::fabs(on - 1.0 / 3.0) < 0.005);
}

TEST_CASE("edge count and weight conditionals") {
  RngStream rng(5);
  CHECK(sample_w_gs(false, 2.0, rng) == 0);
  CHECK_THROWS_AS(sample_w_gs(true, 0.0, rng), StructuralError);
  double mean = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const Count w = sample_w_gs(true, 1.0, rng);
    REQUIRE(w >= 1);
    mean += static_cast<double>(w) / n;
  }
  CHECK(std::fabs(mean - 1.0 / (1.0 - std::exp(-1.0))) < 0.01);
  mean = 0.0;
  for (int i = 0; i < n; ++i) mean += sample_d_gs(4, 1.0, 1.0, rng) / n;
  CHECK(std::fabs(mean - 2.5) < 0.02);
}

TEST_CASE("allocation splits conserve totals") {
  ModelConfig c;
  c.K = 4;
  c.C = 3;
  RngStream rng(6);
  const CommunityState cs = sample_community_prior(c, rng);
  std::vector<Count> alloc(static_cast<std::size_t>(c.K) * c.K * c.C, 0);
  for (Count total : {0, 1, 17, 1000}) {
    split_allocation(total, 1, 2, cs, alloc, rng);
    Count s = 0;
    for (int k = 0; k < c.C; ++k) s += alloc[allocation_index(1, 2, k, c.K, c.C)];
    CHECK(s == total);
  }
}

TEST_CASE("factor rate is symmetric with a zero diagonal") {
  ModelConfig c;
  c.K = 6;
  c.C = 4;
  RngStream rng(7);
  const Matrix r = factor_rate(sample_community_prior(c, rng));
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.diagonal().isZero());
  CHECK((r.array() >= 0.0).all());
}

TEST_CASE("structured updates keep their invariants") {
  for (auto v : {Variant::FactorStructured, Variant::GraphStructured}) {
    ModelConfig c;
    c.K = 5;
    c.C = 3;
    c.variant = v;
    c.eps0 = 1.0;
    LatentState s = sample_prior(c, RngStream(8));
    CountMatrixData L = CountMatrixData::Zero(c.K, c.K);
    L(1, 0) = 4;
    L(3, 2) = 1;
    L(2, 2) = 6;
    if (auto* gs = std::get_if<GsState>(&s.transition)) {
      gs->Z.setOnes();
      gs->W.setOnes();
      gs->W.diagonal().setZero();
    } else {
      auto& fs = std::get<FsState>(s.transition);
      fs.A.setOnes();
    }
    RngStream rng(9);
    for (int i = 0; i < 200; ++i) {
      sample_transition_prior(c, s, L, rng);
      sample_pi(c, s, L, rng);
      CHECK_NOTHROW(check_state(c, s));
      if (const auto* gs = std::get_if<GsState>(&s.transition)) {
        CHECK(gs->Z(1, 0) == 1);
        CHECK(gs->Z(3, 2) == 1);
        for (int k1 = 0; k1 < c.K; ++k1)
          for (int k2 = 0; k2 < c.K; ++k2) {
            if (k1 == k2) continue;
            CHECK(gs->Z(k1, k2) == (gs->W(k1, k2) >= 1 ? 1 : 0));
            Count sum = 0;
            for (int cc = 0; cc < c.C; ++cc) sum += gs->allocations[allocation_index(k1, k2, cc, c.K, c.C)];
            CHECK(sum == gs->W(k1, k2));
          }
      } else {
        const auto& fs = std::get<FsState>(s.transition);
        CHECK((fs.A.diagonal().array() >= 1).all());
        CHECK(fs.A(1, 0) >= 1);
        for (int k1 = 0; k1 < c.K; ++k1)
          for (int k2 = 0; k2 < c.K; ++k2) {
            if (k1 == k2) continue;
            Count sum = 0;
            for (int cc = 0; cc < c.C; ++cc) sum += fs.allocations[allocation_index(k1, k2, cc, c.K, c.C)];
            CHECK(sum == fs.A(k1, k2));
          }
      }
    }
  }
}

TEST_CASE("graph extraction") {
  GsState gs;
  gs.Z = CountMatrixData::Identity(3, 3);
  gs.D = Matrix::Ones(3, 3);
  gs.W = CountMatrixData::Zero(3, 3);
  CommunityState cs;
  cs.M = Matrix::Ones(3, 4);
  cs.r = Vector::Zero(4);
  cs.r[3] = 2.0;
  GraphSummary g = extract_graph(gs, cs, 0.01);
  CHECK(g.edges.empty());
  for (int k = 0; k < 3; ++k) CHECK(g.community[k] == 3);
  CHECK(g.active == std::vector<int>{3});

  gs.Z(2, 0) = 1;
  gs.D(2, 0) = 0.7;
  g = extract_graph(gs, cs, 0.0);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].source == 0);
  CHECK(g.edges[0].target == 2);
  CHECK(g.edges[0].weight == 0.7);
  CHECK(g.active.size() == 4);
}

TEST_CASE("planted communities are recovered from allocation counts") {
  const int K = 20, C = 10, blocks = 2;
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    std::vector<int> truth(K);
    for (int k = 0; k < K; ++k) truth[k] = k * blocks / K;
    CommunityState planted;
    planted.M = Matrix::Zero(K, blocks);
    planted.r = Vector::Constant(blocks, 2.0);
    for (int k = 0; k < K; ++k) planted.M(k, truth[k]) = 1.0;
    const Matrix rate = factor_rate(planted);

    ModelConfig c;
    c.K = K;
    c.C = C;
    std::vector<Count> alloc(static_cast<std::size_t>(K) * K * C, 0);
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = 0; k2 < K; ++k2)
        if (k1 != k2) alloc[allocation_index(k1, k2, 0, K, C)] = sample_poisson(rate(k1, k2), rng);

    CommunityState cs = sample_community_prior(c, rng);
    CommunityState mean;
    mean.M = Matrix::Zero(K, C);
    mean.r = Vector::Zero(C);
    std::vector<Count> split(alloc.size(), 0);
    for (int it = 0; it < 1500; ++it) {
      for (int k1 = 0; k1 < K; ++k1)
        for (int k2 = 0; k2 < K; ++k2)
          if (k1 != k2)
            split_allocation(alloc[allocation_index(k1, k2, 0, K, C)], k1, k2, cs, split, rng);
      sample_communities(split, cs, c, rng);
      if (it >= 1000) {
        mean.M += cs.M / 500.0;
        mean.r += cs.r / 500.0;
      }
    }
    GsState gs;
    gs.Z = CountMatrixData::Identity(K, K);
    gs.D = Matrix::Ones(K, K);
    const double f1 = pair_f1(truth, extract_graph(gs, mean, 0.01).community);
    MESSAGE("seed " << seed << " F1 " << f1);
    hits += f1 >= 0.9;
  }
  CHECK(hits >= 8);
}

}  // TEST_SUITE
