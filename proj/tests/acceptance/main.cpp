// Acceptance criteria AC1-AC8. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. `--only AC4` (repeatable) restricts the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "conjugacy_cases.hpp"
#include "nbrgds/chains.hpp"
#include "nbrgds/data_eval.hpp"
#include "nbrgds/distributions.hpp"
#include "nbrgds/geweke.hpp"
#include "nbrgds/inference.hpp"
#include "nbrgds/json_io.hpp"
#include "nbrgds/transition_prior.hpp"
#include "oracles.hpp"

using namespace nbrgds;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Matrix random_column_stochastic(int K, RngStream& rng) {
  Matrix pi(K, K);
  const std::vector<double> ones(static_cast<std::size_t>(K), 1.0);
  for (int k = 0; k < K; ++k) sample_dirichlet(ones, rng, std::span<double>(pi.col(k).data(), K));
  return pi;
}

// -- AC1: one-step moments of the chain -------------------------------------

Outcome ac1() {
  const int K = 4, n = 100000;
  RngStream prng(101);
  const Matrix pi = random_column_stochastic(K, prng);
  const Vector theta = (Vector(K) << 0.5, 1.0, 2.0, 4.0).finished();
  double worst = 0.0;
  int comparisons = 0, outside = 0;
  std::uint64_t stream = 0;
  for (double psi : {0.5, 1.0, 3.0})
    for (double eps : {0.0, 1.0}) {
      ChainConfig c;
      c.family = ChainFamily::Nbrgmp;
      c.K = K;
      c.tau = 1.0;
      c.psi = psi;
      c.eps0_theta = eps;
      const ChainMoments m = conditional_moments(c, pi, theta);
      const auto draws = simulate_realizations(c, pi, theta, 1, n, RngStream(102).split(stream++));
      for (int k = 0; k < K; ++k) {
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i) xs[i] = draws[i](k, 0);
        const auto s = oracle::summarize(xs);
        for (double z : {(s.mean - m.mean[k]) / s.se_mean, (s.variance - m.variance[k]) / s.se_variance}) {
          worst = std::max(worst, std::fabs(z));
          outside += std::fabs(z) >= 3.0;
          ++comparisons;
        }
      }
    }
  return {outside == 0, fmt("max |z| = %.2f over %d mean/variance comparisons, %d at or beyond 3 SE",
                            worst, comparisons, outside)};
}

// -- AC2: variance ratio ----------------------------------------------------

Outcome ac2() {
  const int K = 4;
  RngStream prng(201);
  const Matrix pi = random_column_stochastic(K, prng);
  const Vector theta = (Vector(K) << 0.3, 1.7, 2.2, 0.9).finished();
  ChainConfig nb;
  nb.family = ChainFamily::Nbrgmp;
  nb.K = K;
  nb.psi = 1.0;
  nb.eps0_theta = 0.0;
  ChainConfig pr = nb;
  pr.family = ChainFamily::Prgmc;
  const Vector a = conditional_moments(nb, pi, theta).variance;
  const Vector b = conditional_moments(pr, pi, theta).variance;
  double worst = 0.0;
  for (int k = 0; k < K; ++k) worst = std::max(worst, std::fabs(a[k] / b[k] - 1.5));
  return {worst <= 1e-12, fmt("max |ratio - 1.5| = %.2e", worst)};
}

// -- AC3: ZINB fidelity -----------------------------------------------------

Outcome ac3() {
  const double reported[] = {1.6, 2.3, 3.3, 4.7, 6.5};
  bool ok = true;
  std::string detail;
  for (int i = 1; i <= 5; ++i) {
    const ZinbConfig z = zinb_preset(i);
    RngStream rng = RngStream(301).split(static_cast<std::uint64_t>(i));
    std::vector<double> xs(1000000);
    for (double& x : xs) x = static_cast<double>(sample_zinb(z, rng));
    const auto s = oracle::summarize(xs);
    const double ve = s.variance / s.mean;
    const bool good = std::fabs(ve / z.variance_to_mean() - 1.0) <= 0.02 &&
                      std::fabs(s.mean / z.mean() - 1.0) <= 0.02 &&
                      std::fabs(s.variance / z.variance() - 1.0) <= 0.02 &&
                      std::fabs(ve - reported[i - 1]) <= 0.1;
    ok = ok && good;
    detail += fmt("%sc%d V/E %.3f (closed %.3f)", i > 1 ? ", " : "", i, ve, z.variance_to_mean());
  }
  return {ok, detail};
}

// -- AC4: Geweke ------------------------------------------------------------

ModelConfig geweke_config(Variant v) {
  ModelConfig c;
  c.V = 3;
  c.T = 4;
  c.K = 2;
  c.C = 2;
  c.variant = v;
  c.eps0 = 10.0;
  c.eps0_theta = 1.0;
  c.eps0_lambda = 2.0;
  c.a_hat = c.b_hat = c.r0 = c.c0 = 2.0;
  return c;
}

Outcome ac4() {
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 401;
  for (auto v : {Variant::Plain, Variant::FactorStructured, Variant::GraphStructured}) {
    GewekeOptions go;
    go.n_forward = go.n_successive = 50000;
    go.sweeps_per_draw = 10;
    const double z = geweke_test(geweke_config(v), go, RngStream(seed++)).max_abs_z();
    ok = ok && z < 4.0;
    detail += fmt("%s max|z| %.2f, ", std::string(to_string(v)).c_str(), z);
  }
  GewekeOptions mutant;
  mutant.n_forward = mutant.n_successive = 10000;
  mutant.sweeps_per_draw = 10;
  mutant.sampler.theta_rate_scale = 2.0;
  const double zm = geweke_test(geweke_config(Variant::Plain), mutant, RngStream(seed)).max_abs_z();
  ok = ok && zm > 10.0;
  detail += fmt("theta-rate mutant max|z| %.1f", zm);
  return {ok, detail};
}

// -- AC5: conjugacy oracles -------------------------------------------------

Outcome ac5() {
  double worst = 0.0;
  std::string name;
  for (const auto& c : conjugacy::all_cases())
    for (double e : {oracle::relative_error(c.analytic_mean, c.numeric.mean),
                     oracle::relative_error(c.analytic_variance, c.numeric.variance)})
      if (e >= worst) {
        worst = e;
        name = c.name;
      }
  return {worst <= 1e-6, fmt("max relative error %.2e (%s)", worst, name.c_str())};
}

// -- AC6: smoothing comparison on overdispersed data ------------------------

Outcome ac6() {
  ExperimentSpec spec;
  ZinbConfig z = zinb_preset(5);
  z.V = 10;
  z.T = 365;
  spec.zinb_groups.assign(5, z);
  ModelConfig nb;
  nb.K = nb.C = 25;
  ModelConfig pr = nb;
  pr.chain = ChainFamily::Prgmc;
  spec.models = {{"nbrgds", nb}, {"prgds", pr}};
  spec.tasks = {{MaskMode::Smoothing, 0.2, 0}};
  spec.schedule = {2000, 1000, 10};
  spec.n_repeats = 10;
  spec.seed = 601;
  spec.workers = 0;
  const ExperimentResult r = run_experiment(spec);
  int wins = 0;
  std::string pairs;
  for (int i = 0; i < 10; ++i) {
    const double a = r.runs[static_cast<std::size_t>(i)].metrics.mre;
    const double b = r.runs[static_cast<std::size_t>(10 + i)].metrics.mre;
    wins += a <= b;
    pairs += fmt("%s%.3f/%.3f", i ? " " : "", a, b);
  }
  return {wins >= 7, fmt("NB MRE <= PRGMC MRE in %d/10 repeats (NB/PR: %s)", wins, pairs.c_str())};
}

// -- AC7: community shrinkage and graph recovery ----------------------------

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

// Transition tables from a forward run of the chain under a graph-structured
// prior with two planted communities.
CountMatrixData planted_tables(const ModelConfig& c, const std::vector<int>& block, RngStream& rng) {
  const int K = c.K, steps = 100;
  CommunityState planted;
  planted.M = Matrix::Zero(K, 2);
  planted.r = Vector::Constant(2, 3.0);
  for (int k = 0; k < K; ++k) planted.M(k, block[k]) = 1.0;
  const Matrix rate = factor_rate(planted);
  Matrix conc = Matrix::Zero(K, K);
  for (int k2 = 0; k2 < K; ++k2)
    for (int k1 = 0; k1 < K; ++k1)
      if (k1 == k2 || sample_poisson(rate(k1, k2), rng) >= 1)
        conc(k1, k2) = sample_gamma(c.eps0, c.eps0, rng);
  Matrix pi(K, K);
  for (int k = 0; k < K; ++k) {
    const Vector col = conc.col(k);
    sample_dirichlet(std::span<const double>(col.data(), K), rng, std::span<double>(pi.col(k).data(), K));
  }
  CountMatrixData L = CountMatrixData::Zero(K, K);
  Vector theta = Vector::Ones(K);
  std::vector<double> w(static_cast<std::size_t>(K));
  std::vector<Count> split(static_cast<std::size_t>(K));
  for (int t = 0; t < steps; ++t) {
    const Vector drive = c.tau * (pi * theta);
    Vector next(K);
    for (int k = 0; k < K; ++k) {
      const Count h = sample_poisson(sample_gamma(drive[k], c.psi, rng), rng);
      const Count l = sample_crt(h, drive[k], rng);
      for (int k2 = 0; k2 < K; ++k2) w[k2] = pi(k, k2) * theta[k2];
      sample_multinomial_thinning(l, w, rng, split);
      for (int k2 = 0; k2 < K; ++k2) L(k, k2) += split[k2];
      next[k] = sample_gamma(c.eps0_theta + static_cast<double>(h), c.tau, rng);
    }
    theta = next;
  }
  return L;
}

Outcome ac7() {
  int good = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ModelConfig c;
    c.K = 20;
    c.C = 50;
    c.variant = Variant::GraphStructured;
    c.eps0 = 1.0;
    c.eps0_theta = 1.0;
    RngStream rng = RngStream(701).split(seed);
    std::vector<int> block(static_cast<std::size_t>(c.K));
    for (int k = 0; k < c.K; ++k) block[k] = k < c.K / 2 ? 0 : 1;
    const CountMatrixData L = planted_tables(c, block, rng);

    LatentState s = sample_prior_parameters(c, rng.split("init"));
    auto& gs = std::get<GsState>(s.transition);
    gs.Z.setOnes();
    gs.W.setOnes();
    gs.W.diagonal().setZero();
    gs.D.setOnes();
    const int iters = 2000, burn = 1000;
    GsState mean_gs;
    mean_gs.D = Matrix::Zero(c.K, c.K);
    Matrix z_mean = Matrix::Zero(c.K, c.K);
    CommunityState mean_cs{Matrix::Zero(c.K, c.C), Vector::Zero(c.C)};
    for (int it = 0; it < iters; ++it) {
      sample_transition_prior(c, s, L, rng);
      sample_pi(c, s, L, rng);
      if (it >= burn) {
        const double w = 1.0 / (iters - burn);
        z_mean += w * gs.Z.cast<double>();
        mean_gs.D += w * gs.D;
        mean_cs.M += w * s.communities.M;
        mean_cs.r += w * s.communities.r;
      }
    }
    mean_gs.Z = (z_mean.array() >= 0.5).cast<Count>();
    const GraphSummary g = extract_graph(mean_gs, mean_cs, 0.01);
    const double f1 = pair_f1(block, g.community);
    const bool ok = g.active.size() <= 5 && f1 >= 0.8;
    good += ok;
    detail += fmt("%s%zu/%.2f", seed > 1 ? " " : "", g.active.size(), f1);
  }
  return {good >= 8, fmt("%d/10 runs with <= 5 active communities and F1 >= 0.8 (active/F1: %s)",
                         good, detail.c_str())};
}

// -- AC8: invariant fuzzing -------------------------------------------------

std::string digest(const PosteriorTrace& tr) {
  std::string out;
  for (const auto& s : tr.samples) out += to_json(s).dump();
  return out;
}

std::string fuzz_case(std::uint64_t id) {
  RngStream r = RngStream(801).split(id);
  ModelConfig c;
  c.V = 1 + static_cast<int>(r.uniform_index(6));
  c.T = 2 + static_cast<int>(r.uniform_index(5));
  c.K = 1 + static_cast<int>(r.uniform_index(4));
  c.C = 1 + static_cast<int>(r.uniform_index(3));
  c.variant = static_cast<Variant>(r.uniform_index(3));
  c.chain = r.uniform_index(2) ? ChainFamily::Prgmc : ChainFamily::Nbrgmp;
  c.eps0 = r.uniform_index(2) ? 1.0 : 2.0;
  c.eps0_theta = r.uniform_index(2) ? 0.0 : 0.5;
  c.stationary_delta = r.uniform_index(2);
  c.sample_psi = c.chain == ChainFamily::Nbrgmp && r.uniform_index(2);

  const CountMatrix data = generate_counts(c, sample_prior(c, r.split("truth")), r.split("data"));
  MaskSpec mask;
  switch (r.uniform_index(3)) {
    case 0:
      if (c.V * c.T >= 3) mask = make_mask(c.V, c.T, {MaskMode::Smoothing, 0.3, 0}, r.split("mask"));
      break;
    case 1: mask = forecast_mask(c.V, c.T, 1); break;
    default: break;
  }

  const SweepContext ctx(data, mask, c);
  LatentState s = initialize_state(ctx, r.split("init"));
  AuxiliaryCounts aux;
  for (int sweep = 0; sweep < 3; ++sweep) {
    gibbs_sweep(ctx, s, aux, r.split("sweep").split(static_cast<std::uint64_t>(sweep)));
    check_state(c, s, 1e-9);
    const auto& cells = ctx.cells();
    for (std::size_t j = 0; j < cells.size(); ++j) {
      Count sum = 0;
      for (int k = 0; k < c.K; ++k) sum += aux.tokens[j * static_cast<std::size_t>(c.K) + k];
      if (sum != cells[j].n) return "token conservation";
    }
    for (int t = 0; t < c.T; ++t)
      for (int k = 0; k < c.K; ++k) {
        const Count h = s.h(k, t), l = aux.tables(k, t);
        if (l < (h > 0 ? 1 : 0) || l > h) return "CRT bounds";
        if (aux.source_tables[static_cast<std::size_t>(t)].row(k).sum() != l) return "source tables";
      }
    for (int k = 0; k < c.K; ++k) {
      if (std::fabs(s.phi.col(k).sum() - 1.0) > 1e-9) return "phi simplex";
      if (std::fabs(s.pi.col(k).sum() - 1.0) > 1e-9) return "pi simplex";
    }
    if (const auto* gs = std::get_if<GsState>(&s.transition))
      for (int a = 0; a < c.K; ++a)
        for (int b = 0; b < c.K; ++b) {
          if (aux.transition_tables(a, b) > 0 && gs->Z(a, b) != 1) return "Z/L consistency";
          if (a == b ? gs->Z(a, b) != 1 : gs->Z(a, b) != (gs->W(a, b) >= 1 ? 1 : 0))
            return "Z/W consistency";
          if (gs->Z(a, b) == 0 && s.pi(a, b) != 0.0) return "pi off the graph";
        }
  }

  const Schedule sch{4, 1, 1};
  SamplerOptions two;
  two.workers = 2;
  const auto base = run_gibbs(data, mask, c, sch, r.split("run"));
  if (digest(base) != digest(run_gibbs(data, mask, c, sch, r.split("run")))) return "seed determinism";
  if (digest(base) != digest(run_gibbs(data, mask, c, sch, r.split("run"), two))) return "worker determinism";
  if (!mask.empty()) {
    CountMatrix perturbed = data;
    for (const auto& [v, t] : mask.held_out) perturbed.values(v, t) += 7 + v * 3 + t;
    if (digest(base) != digest(run_gibbs(perturbed, mask, c, sch, r.split("run")))) return "mask isolation";
  }
  return {};
}

Outcome ac8() {
  const int n = 1000;
  int failures = 0;
  std::string first;
  for (int i = 0; i < n; ++i) {
    std::string why;
    try {
      why = fuzz_case(static_cast<std::uint64_t>(i));
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    if (!why.empty()) {
      ++failures;
      if (first.empty()) first = fmt("case %d: %s", i, why.c_str());
    }
  }
  return {failures == 0, fmt("%d fuzz cases, %d failures%s%s", n, failures, first.empty() ? "" : "; first ",
                             first.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only.insert(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only ACn]...\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
      {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}};
  bool all = true;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s  %s  [%.1f s]\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
