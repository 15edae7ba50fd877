#include "nbrgds/geweke.hpp"

#include <algorithm>
#include <cmath>

namespace nbrgds {

std::vector<NamedValue> geweke_statistics(const ModelConfig& config, const LatentState& s,
                                          const CountMatrix& counts) {
  const int K = s.K();
  const int T = s.T();
  std::vector<NamedValue> out;
  out.push_back({"theta_mean", s.theta.rightCols(T).mean()});
  out.push_back({"theta_last", s.theta.col(T).mean()});
  out.push_back({"lambda_mean", s.lambda.mean()});
  out.push_back({"h_mean", s.h.cast<double>().mean()});
  out.push_back({"delta_mean", s.delta.mean()});
  out.push_back({"pi_diag_mean", s.pi.diagonal().mean()});
  out.push_back({"phi_00", s.phi(0, 0)});
  out.push_back({"gamma", s.gamma});
  out.push_back({"beta", s.beta});
  out.push_back({"g_mean", s.g.cast<double>().mean()});
  out.push_back({"data_mean", counts.values.cast<double>().mean()});
  out.push_back({"data_zero_fraction", (counts.values.array() == 0).cast<double>().mean()});
  if (config.chain == ChainFamily::Nbrgmp) out.push_back({"h_hat_mean", s.h_hat.mean()});
  if (const auto* fs = std::get_if<FsState>(&s.transition)) {
    const Matrix A = fs->A.cast<double>();
    out.push_back({"a_offdiag_mean", (A.sum() - A.trace()) / std::max(1, K * K - K)});
    out.push_back({"a_diag_mean", A.trace() / K});
    out.push_back({"self_rate", fs->self_rate});
  }
  if (const auto* gs = std::get_if<GsState>(&s.transition)) {
    const Matrix Z = gs->Z.cast<double>();
    out.push_back({"z_offdiag_mean", (Z.sum() - Z.trace()) / std::max(1, K * K - K)});
    out.push_back({"d_mean", gs->D.mean()});
  }
  if (config.variant != Variant::Plain) {
    out.push_back({"r_sum", s.communities.r.sum()});
    out.push_back({"m_mean", s.communities.M.mean()});
  }
  if (config.sample_psi) out.push_back({"psi", s.psi});
  if (config.sample_tau) out.push_back({"tau", s.tau});
  return out;
}

double GewekeReport::max_abs_z() const {
  double m = 0.0;
  for (const auto& s : stats) m = std::max(m, std::fabs(s.z));
  return m;
}

namespace {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments iid_moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

Moments batch_moments(const std::vector<double>& x, int batches) {
  const std::size_t b = static_cast<std::size_t>(std::max(2, batches));
  const std::size_t size = x.size() / b;
  if (size < 1) return iid_moments(x);
  std::vector<double> means(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < size; ++j) means[i] += x[i * size + j];
    means[i] /= static_cast<double>(size);
  }
  return iid_moments(means);
}

}  // namespace

GewekeReport geweke_test(const ModelConfig& config, const GewekeOptions& options,
                         const RngStream& rng) {
  GewekeReport report;
  if (options.n_forward <= 0 || options.n_successive <= 0) return report;

  std::vector<std::string> names;
  std::vector<std::vector<double>> forward;
  std::vector<std::vector<double>> successive;
  auto record = [&](std::vector<std::vector<double>>& dst, const std::vector<NamedValue>& vals) {
    if (names.empty())
      for (const auto& v : vals) names.push_back(v.name);
    if (dst.empty()) dst.resize(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) dst[i].push_back(vals[i].value);
  };

  const RngStream fwd = rng.split("forward");
  for (int i = 0; i < options.n_forward; ++i) {
    const RngStream r = fwd.split(static_cast<std::uint64_t>(i));
    const LatentState state = sample_prior(config, r.split("prior"));
    const CountMatrix data = generate_counts(config, state, r.split("data"));
    record(forward, geweke_statistics(config, state, data));
  }

  const RngStream succ = rng.split("successive");
  LatentState state = sample_prior(config, succ.split("prior"));
  CountMatrix data = generate_counts(config, state, succ.split("data"));
  SweepContext ctx(data, options.mask, config, options.sampler);
  AuxiliaryCounts aux;
  const RngStream sweeps = succ.split("sweeps");
  const RngStream regen = succ.split("regenerate");
  std::uint64_t step = 0;
  for (int j = 0; j < options.n_successive; ++j) {
    for (int s = 0; s < std::max(1, options.sweeps_per_draw); ++s, ++step) {
      gibbs_sweep(ctx, state, aux, sweeps.split(step));
      ctx.set_counts(generate_counts(config, state, regen.split(step)));
    }
    record(successive, geweke_statistics(config, state, ctx.counts()));
  }

  for (std::size_t i = 0; i < names.size(); ++i) {
    const Moments f = iid_moments(forward[i]);
    const Moments s = batch_moments(successive[i], options.batches);
    GewekeStat st;
    st.name = names[i];
    st.forward_mean = f.mean;
    st.forward_se = f.se;
    st.successive_mean = s.mean;
    st.successive_se = s.se;
    const double se = std::sqrt(f.se * f.se + s.se * s.se);
    st.z = se > 0.0 ? (f.mean - s.mean) / se : (f.mean == s.mean ? 0.0 : INFINITY);
    report.stats.push_back(st);
  }
  return report;
}

}  // namespace nbrgds
