#include <algorithm>
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>

#include "manifest.hpp"
#include "nbrgds/chains.hpp"
#include "nbrgds/data_eval.hpp"
#include "nbrgds/distributions.hpp"
#include "nbrgds/errors.hpp"
#include "nbrgds/geweke.hpp"
#include "nbrgds/inference.hpp"
#include "nbrgds/json_io.hpp"
#include "nbrgds/transition_prior.hpp"
#include "trace_io.hpp"

namespace fs = std::filesystem;
using namespace nbrgds;
using nbrgds::cli::Manifest;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kNumerical = 4 };

std::string with_suffix(const fs::path& path, const std::string& suffix) {
  return path.string() + suffix;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataFormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot write " + path.string());
  out << text;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

/// Model flags; each set flag overrides the config file.
struct ConfigFlags {
  std::optional<fs::path> file;
  std::optional<int> K, C;
  std::optional<std::string> variant, chain;
  std::optional<double> eps0, eps0_theta, eps0_lambda, tau, psi;
  std::optional<bool> sample_psi, sample_tau, stationary_delta;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "model config JSON")->check(CLI::ExistingFile);
    app->add_option("--K", K, "latent components (default 100 if V >= 1000, else 25)");
    app->add_option("--C", C, "community truncation (default K)");
    app->add_option("--variant", variant, "transition prior: plain | fs | gs");
    app->add_option("--chain", chain, "latent chain: nbrgmp | prgmc");
    app->add_option("--eps0", eps0);
    app->add_option("--eps0-theta", eps0_theta);
    app->add_option("--eps0-lambda", eps0_lambda);
    app->add_option("--tau", tau);
    app->add_option("--psi", psi);
    app->add_flag("--sample-psi", sample_psi);
    app->add_flag("--sample-tau", sample_tau);
    app->add_flag("--stationary-delta", stationary_delta);
  }

  ModelConfig resolve(int V, int T) const {
    Json j = file ? read_json_file(*file) : Json::object();
    ModelConfig c = model_config_from_json(j);
    c.V = V;
    c.T = T;
    if (!j.contains("K")) c.K = V >= 1000 ? 100 : 25;
    if (K) c.K = *K;
    if (!j.contains("C")) c.C = c.K;
    if (C) c.C = *C;
    if (variant) c.variant = variant_from_string(*variant);
    if (chain) c.chain = chain_family_from_string(*chain);
    if (eps0) c.eps0 = *eps0;
    if (eps0_theta) c.eps0_theta = *eps0_theta;
    if (eps0_lambda) c.eps0_lambda = *eps0_lambda;
    if (tau) c.tau = *tau;
    if (psi) c.psi = *psi;
    if (sample_psi) c.sample_psi = *sample_psi;
    if (sample_tau) c.sample_tau = *sample_tau;
    if (stationary_delta) c.stationary_delta = *stationary_delta;
    c.validate();
    return c;
  }
};

struct ScheduleFlags {
  Schedule schedule;
  void attach(CLI::App* app) {
    app->add_option("--iters", schedule.total, "total sweeps")->capture_default_str();
    app->add_option("--burnin", schedule.burn_in, "discarded sweeps")->capture_default_str();
    app->add_option("--thin", schedule.thin, "retention stride")->capture_default_str();
  }
};

// -- synth ------------------------------------------------------------------

struct SynthArgs {
  std::optional<std::string> zinb;
  std::optional<fs::path> model_config;
  std::optional<int> groups, V, T;
  fs::path out;
  std::optional<fs::path> out_state;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a) {
  if (a.zinb.has_value() == a.model_config.has_value())
    throw ConfigError("synth needs exactly one of --zinb-config and --model-config");
  const RngStream root(a.seed);
  Manifest manifest("synth", a.seed);
  Json generation;
  CountMatrix counts;
  std::optional<LatentState> state;
  ModelConfig model;

  if (a.zinb) {
    ZinbConfig z;
    const std::string& spec = *a.zinb;
    if (spec.size() == 1 && spec[0] >= '1' && spec[0] <= '5') {
      z = zinb_preset(spec[0] - '0');
    } else {
      const Json j = read_json_file(spec);
      manifest.add_input("zinb_config", spec);
      z.p0 = j.value("p0", z.p0);
      z.r = j.value("r", z.r);
      z.p = j.value("p", z.p);
      z.V = j.value("V", z.V);
      z.T = j.value("T", z.T);
      z.n_groups = j.value("n_groups", z.n_groups);
    }
    if (a.groups) z.n_groups = *a.groups;
    if (a.V) z.V = *a.V;
    if (a.T) z.T = *a.T;
    z.validate();
    const ZinbData data = generate_zinb(z, root.split("zinb"));
    counts = data.counts;
    generation = {{"kind", "zinb"},
                  {"p0", z.p0},
                  {"r", z.r},
                  {"p", z.p},
                  {"V", z.V},
                  {"T", z.T},
                  {"n_groups", z.n_groups},
                  {"variance_to_mean", z.variance_to_mean()},
                  {"group", data.group}};
  } else {
    manifest.add_input("model_config", *a.model_config);
    const Json j = read_json_file(*a.model_config);
    model = model_config_from_json(j);
    if (a.V) model.V = *a.V;
    if (a.T) model.T = *a.T;
    model.validate();
    state = sample_prior(model, root.split("prior"));
    counts = generate_counts(model, *state, root.split("data"));
    generation = {{"kind", "model"}, {"config", to_json(model)}};
  }
  manifest.set_config(generation);
  manifest.add_output("counts", a.out);
  save_counts(a.out, counts, {manifest.comment()});
  if (state && a.out_state) {
    Json s = to_json(*state);
    s["manifest"] = manifest.hash();
    write_text(*a.out_state, s.dump() + "\n");
    manifest.add_output("state", *a.out_state);
  }
  Json meta = manifest.to_json();
  meta["generation"] = generation;
  write_text(with_suffix(a.out, ".meta.json"), meta.dump(2) + "\n");
  return kOk;
}

// -- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string chain = "nbrgmp";
  int K = 4;
  double tau = 1.0, tau0 = 1.0, psi = 1.0, eps0_theta = 0.0, theta0 = 1.0;
  int horizon = 100;
  int chains = 1;
  std::string pi = "random";
  fs::path out;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  ChainConfig cc;
  cc.family = chain_family_from_string(a.chain);
  cc.K = a.K;
  cc.tau = a.tau;
  cc.tau0 = a.tau0;
  cc.psi = a.psi;
  cc.eps0_theta = a.eps0_theta;
  cc.validate();
  if (a.horizon < 1 || a.chains < 1) throw ConfigError("horizon and chains must be positive");
  const RngStream root(a.seed);
  Matrix pi = Matrix::Identity(a.K, a.K);
  if (a.pi == "random") {
    RngStream r = root.split("pi");
    const std::vector<double> ones(static_cast<std::size_t>(a.K), 1.0);
    for (int k = 0; k < a.K; ++k)
      sample_dirichlet(ones, r, std::span<double>(pi.col(k).data(), a.K));
  } else if (a.pi != "identity") {
    throw ConfigError("--pi must be identity or random");
  }
  const Vector theta0 = Vector::Constant(a.K, a.theta0);
  const auto paths = simulate_realizations(cc, pi, theta0, a.horizon, a.chains, root.split("chains"));

  Manifest manifest("simulate", a.seed);
  manifest.set_config({{"chain", a.chain}, {"K", a.K}, {"tau", a.tau}, {"tau0", a.tau0},
                       {"psi", a.psi}, {"eps0_theta", a.eps0_theta}, {"theta0", a.theta0},
                       {"horizon", a.horizon}, {"chains", a.chains}, {"pi", a.pi}});
  std::ostringstream os;
  os << "# " << manifest.comment() << "\nchain,k";
  for (int t = 1; t <= a.horizon; ++t) os << ",t" << t;
  os << '\n';
  for (int c = 0; c < a.chains; ++c)
    for (int k = 0; k < a.K; ++k) {
      os << c << ',' << k;
      for (int t = 0; t < a.horizon; ++t) os << ',' << fmt(paths[c](k, t));
      os << '\n';
    }
  write_text(a.out, os.str());
  manifest.add_output("trajectories", a.out);
  manifest.write(with_suffix(a.out, ".manifest.json"));
  return kOk;
}

// -- fit --------------------------------------------------------------------

struct FitArgs {
  fs::path data;
  ConfigFlags config;
  ScheduleFlags schedule;
  std::string mask = "none";
  std::optional<fs::path> mask_file;
  fs::path out_trace;
  std::optional<fs::path> diagnostics;
  int workers = 1;
  std::uint64_t seed = 1;
  bool quiet = false;
};

int cmd_fit(const FitArgs& a) {
  const CountMatrix counts = load_counts(a.data);
  ModelConfig config = a.config.resolve(counts.V(), counts.T());
  const Schedule& schedule = a.schedule.schedule;
  schedule.validate();
  const RngStream root(a.seed);

  Manifest manifest("fit", a.seed);
  manifest.add_input("data", a.data);
  MaskSpec mask;
  if (a.mask_file) {
    mask = mask_from_json(read_json_file(*a.mask_file));
    manifest.add_input("mask", *a.mask_file);
  } else if (a.mask != "none") {
    mask = make_mask(counts.V(), counts.T(), parse_mask_params(a.mask), root.split("mask"));
  }
  mask.validate(counts.V(), counts.T());
  if (mask.mode == MaskMode::Forecast) config.forecast_horizon = mask.horizon;
  manifest.set_config({{"model", to_json(config)},
                       {"schedule", to_json(schedule)},
                       {"mask", a.mask_file ? "file" : a.mask},
                       {"workers_independent", true}});

  const fs::path mask_path = with_suffix(a.out_trace, ".mask.json");
  const fs::path diag_path = a.diagnostics.value_or(with_suffix(a.out_trace, ".diagnostics.csv"));
  Json mask_json = to_json(mask, counts.V(), counts.T());
  mask_json["manifest"] = manifest.hash();
  write_text(mask_path, mask_json.dump() + "\n");

  Json header{{"manifest", manifest.hash()},
              {"config", to_json(config)},
              {"schedule", to_json(schedule)},
              {"seed", a.seed},
              {"data", a.data.string()},
              {"mask", mask_path.string()},
              {"dim_labels", counts.dim_labels},
              {"time_labels", counts.time_labels}};
  cli::TraceWriter writer(a.out_trace, header);
  std::ofstream diag(diag_path, std::ios::binary);
  if (!diag) throw DataFormatError("cannot write " + diag_path.string());
  diag << "# " << manifest.comment() << "\niteration,heldout_mae,heldout_mre,joint_loglik\n";

  SamplerOptions options;
  options.workers = a.workers;
  RunCallbacks callbacks;
  callbacks.on_sample = [&](int i, const LatentState& s) { writer.write_sample(i, s); };
  callbacks.on_diagnostics = [&](const DiagnosticRow& r) {
    diag << r.iteration << ',' << fmt(r.heldout_mae) << ',' << fmt(r.heldout_mre) << ','
         << fmt(r.joint_loglik) << '\n';
    if (!a.quiet && r.iteration % 100 == 0)
      std::cerr << "iteration " << r.iteration << "/" << schedule.total
                << "  loglik " << r.joint_loglik << '\n';
  };
  run_gibbs(counts, mask, config, schedule, root.split("fit"), options, callbacks);

  manifest.add_output("trace", a.out_trace);
  manifest.add_output("mask", mask_path);
  manifest.add_output("diagnostics", diag_path);
  manifest.write(with_suffix(a.out_trace, ".manifest.json"));
  return kOk;
}

// -- predict / score --------------------------------------------------------

struct PredictArgs {
  fs::path trace;
  std::optional<fs::path> mask;
  fs::path out;
  int rollouts = 10;
  bool round = false;
  int workers = 1;
  std::uint64_t seed = 1;
};

int cmd_predict(const PredictArgs& a) {
  const cli::TraceFile trace = cli::read_trace(a.trace);
  if (trace.samples.empty()) throw ConfigError("trace " + a.trace.string() + " has no samples");
  const fs::path mask_path = a.mask.value_or(with_suffix(a.trace, ".mask.json"));
  const MaskSpec mask = mask_from_json(read_json_file(mask_path));
  Manifest manifest("predict", a.seed);
  manifest.add_input("trace", a.trace);
  manifest.add_input("mask", mask_path);
  manifest.set_config({{"rollouts", a.rollouts}, {"round", a.round}});

  PredictOptions po;
  po.rollouts = a.rollouts;
  po.workers = a.workers;
  const Matrix est = predict_heldout(trace.samples, mask, trace.config, RngStream(a.seed).split("predict"), po);
  const auto dims = trace.header.value("dim_labels", std::vector<std::string>{});
  const auto times = trace.header.value("time_labels", std::vector<std::string>{});
  auto dim = [&](int v) { return v < static_cast<int>(dims.size()) ? dims[v] : "v" + std::to_string(v + 1); };
  auto time = [&](int t) { return t < static_cast<int>(times.size()) ? times[t] : "t" + std::to_string(t + 1); };

  std::ostringstream os;
  os << "# " << manifest.comment() << "\ndim,time,estimate\n";
  auto emit = [&](int v, int t) {
    const double x = a.round ? std::round(est(v, t)) : est(v, t);
    os << dim(v) << ',' << time(t) << ',' << fmt(x) << '\n';
  };
  if (mask.empty()) {
    for (int t = 0; t < est.cols(); ++t)
      for (int v = 0; v < est.rows(); ++v) emit(v, t);
  } else {
    for (const auto& [v, t] : mask.held_out) emit(v, t);
  }
  write_text(a.out, os.str());
  manifest.add_output("predictions", a.out);
  manifest.write(with_suffix(a.out, ".manifest.json"));
  return kOk;
}

Matrix load_predictions(const fs::path& path, const CountMatrix& truth) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open " + path.string());
  std::map<std::string, int> dim_index, time_index;
  for (int v = 0; v < truth.V(); ++v) dim_index[truth.dim_labels[v]] = v;
  for (int t = 0; t < truth.T(); ++t) time_index[truth.time_labels[t]] = t;
  Matrix est = Matrix::Constant(truth.V(), truth.T(), std::numeric_limits<double>::quiet_NaN());
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string d, t, x;
    if (!std::getline(ss, d, ',') || !std::getline(ss, t, ',') || !std::getline(ss, x))
      throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": expected dim,time,estimate");
    const auto di = dim_index.find(d);
    const auto ti = time_index.find(t);
    if (di == dim_index.end() || ti == time_index.end())
      throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": unknown cell (" + d +
                            ", " + t + ")");
    try {
      std::size_t used = 0;
      const double value = std::stod(x, &used);
      if (used != x.size() || !std::isfinite(value)) throw std::invalid_argument(x);
      est(di->second, ti->second) = value;
    } catch (const std::logic_error&) {
      throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": column 3: '" + x +
                            "' is not a number");
    }
  }
  return est;
}

struct ScoreArgs {
  fs::path truth, pred, mask;
  std::optional<fs::path> out;
};

int cmd_score(const ScoreArgs& a) {
  const MaskSpec mask = mask_from_json(read_json_file(a.mask));
  if (mask.empty()) throw ConfigError("cannot score an empty mask");
  const CountMatrix truth = load_counts(a.truth);
  mask.validate(truth.V(), truth.T());
  const Matrix est = load_predictions(a.pred, truth);
  for (const auto& [v, t] : mask.held_out)
    if (std::isnan(est(v, t)))
      throw DataFormatError("prediction missing for held-out cell (" + truth.dim_labels[v] + ", " +
                            truth.time_labels[t] + ")");
  const Metrics m = compute_metrics(truth, est, mask);
  Manifest manifest("score", 0);
  manifest.add_input("truth", a.truth);
  manifest.add_input("predictions", a.pred);
  manifest.add_input("mask", a.mask);
  Json j = to_json(m);
  j["manifest"] = manifest.hash();
  if (a.out) write_text(*a.out, j.dump(2) + "\n");
  else std::cout << j.dump(2) << '\n';
  return kOk;
}

// -- graph ------------------------------------------------------------------

struct GraphArgs {
  fs::path trace;
  double threshold = 0.01;
  fs::path out_edges, out_communities;
};

int cmd_graph(const GraphArgs& a) {
  const cli::TraceFile trace = cli::read_trace(a.trace);
  if (trace.config.variant != Variant::GraphStructured)
    throw ConfigError("graph extraction needs a trace from a gs fit (trace variant is " +
                      std::string(to_string(trace.config.variant)) + ")");
  if (trace.samples.empty()) throw ConfigError("trace has no samples");
  const auto& first = trace.samples.front();
  const int K = first.K();
  const auto n = static_cast<double>(trace.samples.size());
  Matrix d_sum = Matrix::Zero(K, K), z_mean = Matrix::Zero(K, K);
  CommunityState mean{Matrix::Zero(first.communities.M.rows(), first.communities.M.cols()),
                      Vector::Zero(first.communities.r.size())};
  for (const auto& s : trace.samples) {
    const auto& gs = std::get<GsState>(s.transition);
    d_sum += gs.D;
    z_mean += gs.Z.cast<double>() / n;
    mean.M += s.communities.M / n;
    mean.r += s.communities.r / n;
  }
  GsState summary;
  summary.D = d_sum / n;
  summary.Z = (z_mean.array() >= 0.5).cast<Count>();
  summary.Z.diagonal().setOnes();
  const GraphSummary g = extract_graph(summary, mean, a.threshold);

  Manifest manifest("graph", 0);
  manifest.add_input("trace", a.trace);
  manifest.set_config({{"threshold", a.threshold}});
  std::ostringstream edges;
  edges << "# " << manifest.comment() << "\nsource,target,weight,probability\n";
  for (const auto& e : g.edges)
    edges << e.source << ',' << e.target << ',' << fmt(e.weight) << ','
          << fmt(z_mean(e.target, e.source)) << '\n';
  write_text(a.out_edges, edges.str());

  std::ostringstream comms;
  comms << "# " << manifest.comment() << "\n# active:";
  for (int c : g.active) comms << ' ' << c;
  comms << "\nvertex,community,membership,community_weight,active\n";
  for (int k = 0; k < K; ++k) {
    const int c = g.community[k];
    const bool active = std::find(g.active.begin(), g.active.end(), c) != g.active.end();
    comms << k << ',' << c << ',' << fmt(g.membership[k]) << ',' << fmt(mean.r[c]) << ','
          << (active ? 1 : 0) << '\n';
  }
  write_text(a.out_communities, comms.str());
  return kOk;
}

// -- experiment -------------------------------------------------------------

struct ExperimentArgs {
  std::optional<int> zinb;
  std::optional<fs::path> data;
  int groups = 5, V = 10, T = 365;
  std::string models = "nbrgds=nbrgmp,prgds=prgmc";
  std::string tasks = "smoothing:0.2,forecast:2";
  ConfigFlags config;
  ScheduleFlags schedule;
  int repeats = 10;
  int rollouts = 10;
  int workers = 0;
  fs::path out;
  std::uint64_t seed = 1;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_experiment(const ExperimentArgs& a) {
  if (a.zinb.has_value() == a.data.has_value())
    throw ConfigError("experiment needs exactly one of --zinb and --data");
  ExperimentSpec spec;
  Manifest manifest("experiment", a.seed);
  int V = 0, T = 0;
  if (a.zinb) {
    ZinbConfig z = zinb_preset(*a.zinb);
    z.V = a.V;
    z.T = a.T;
    spec.zinb_groups.assign(static_cast<std::size_t>(a.groups), z);
    V = a.V * a.groups;
    T = a.T;
  } else {
    spec.counts = load_counts(*a.data);
    manifest.add_input("data", *a.data);
    V = spec.counts.V();
    T = spec.counts.T();
  }
  const ModelConfig base = a.config.resolve(V, T);
  for (const auto& entry : split(a.models, ',')) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError("model entries look like name=chain[:variant]");
    ExperimentModel m{entry.substr(0, eq), base};
    const auto parts = split(entry.substr(eq + 1), ':');
    if (parts.empty()) throw ConfigError("model '" + m.name + "' has no chain");
    m.config.chain = chain_family_from_string(parts[0]);
    if (parts.size() > 1) m.config.variant = variant_from_string(parts[1]);
    if (m.config.chain == ChainFamily::Prgmc) m.config.sample_psi = false;
    m.config.validate();
    spec.models.push_back(m);
  }
  for (const auto& t : split(a.tasks, ',')) spec.tasks.push_back(parse_mask_params(t));
  spec.schedule = a.schedule.schedule;
  spec.n_repeats = a.repeats;
  spec.seed = a.seed;
  spec.workers = a.workers;
  spec.predict.rollouts = a.rollouts;

  const Json spec_json = experiment_manifest(spec);
  manifest.set_config(spec_json);
  const ExperimentResult result = run_experiment(spec);
  write_text(a.out, format_results(result, {manifest.comment()}));

  std::ostringstream runs;
  runs << "# " << manifest.comment() << "\nmodel,task,repeat,mae,mre,n_cells\n";
  for (const auto& r : result.runs)
    runs << r.model << ',' << r.task << ',' << r.repeat << ',' << fmt(r.metrics.mae) << ','
         << fmt(r.metrics.mre) << ',' << r.metrics.n_cells << '\n';
  const fs::path runs_path = with_suffix(a.out, ".runs.csv");
  write_text(runs_path, runs.str());
  manifest.add_output("results", a.out);
  manifest.add_output("runs", runs_path);
  Json m = manifest.to_json();
  m["experiment"] = spec_json;
  write_text(with_suffix(a.out, ".manifest.json"), m.dump(2) + "\n");
  return kOk;
}

// -- geweke -----------------------------------------------------------------

struct GewekeArgs {
  ConfigFlags config;
  int V = 3, T = 4;
  int n = 50000;
  int sweeps_per_draw = 10;
  double theta_rate_scale = 1.0;
  std::optional<fs::path> out;
  std::uint64_t seed = 1;
};

int cmd_geweke(const GewekeArgs& a) {
  ModelConfig c = a.config.resolve(a.V, a.T);
  if (!a.config.K) c.K = 2;
  if (!a.config.C) c.C = 2;
  // the fitting defaults put most prior mass on overflowing rates; without a
  // config file use hyperparameters whose joint prior stays in range
  if (!a.config.file) {
    if (!a.config.eps0) c.eps0 = 10.0;
    if (!a.config.eps0_theta) c.eps0_theta = 1.0;
    if (!a.config.eps0_lambda) c.eps0_lambda = 2.0;
    c.a_hat = c.b_hat = c.r0 = c.c0 = 2.0;
  }
  c.validate();
  GewekeOptions go;
  go.n_forward = a.n;
  go.n_successive = a.n;
  go.sweeps_per_draw = a.sweeps_per_draw;
  go.sampler.theta_rate_scale = a.theta_rate_scale;
  const GewekeReport report = geweke_test(c, go, RngStream(a.seed));
  Json stats = Json::array();
  for (const auto& s : report.stats) {
    stats.push_back({{"name", s.name}, {"forward_mean", s.forward_mean}, {"forward_se", s.forward_se},
                     {"successive_mean", s.successive_mean}, {"successive_se", s.successive_se},
                     {"z", s.z}});
    std::cout << s.name << "  z = " << s.z << '\n';
  }
  std::cout << "max |z| = " << report.max_abs_z() << '\n';
  if (a.out) {
    Manifest manifest("geweke", a.seed);
    manifest.set_config({{"model", to_json(c)}, {"n", a.n}, {"sweeps_per_draw", a.sweeps_per_draw},
                         {"theta_rate_scale", a.theta_rate_scale}});
    write_text(*a.out, Json{{"manifest", manifest.hash()}, {"max_abs_z", report.max_abs_z()},
                            {"stats", stats}}.dump(2) + "\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negative-binomial randomized gamma dynamical systems for count time series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nbrgds 0.1.0");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic count matrix");
  s->add_option("--zinb-config", synth.zinb, "preset 1-5 or a JSON file {p0, r, p, V, T, n_groups}");
  s->add_option("--model-config", synth.model_config, "draw from the model prior with this config")
      ->check(CLI::ExistingFile);
  s->add_option("--groups", synth.groups);
  s->add_option("--V", synth.V, "rows (per group for ZINB)");
  s->add_option("--T", synth.T);
  s->add_option("--out", synth.out)->required();
  s->add_option("--out-state", synth.out_state, "latent state JSON (model prior only)");
  s->add_option("--seed", synth.seed)->capture_default_str();

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "forward realizations of a latent chain");
  m->add_option("--chain", sim.chain, "nbrgmp | prgmc | gmc")->capture_default_str();
  m->add_option("--K", sim.K)->capture_default_str();
  m->add_option("--tau", sim.tau)->capture_default_str();
  m->add_option("--tau0", sim.tau0, "gmc concentration")->capture_default_str();
  m->add_option("--psi", sim.psi)->capture_default_str();
  m->add_option("--eps0-theta", sim.eps0_theta)->capture_default_str();
  m->add_option("--theta0", sim.theta0, "initial value of every component")->capture_default_str();
  m->add_option("--horizon", sim.horizon)->capture_default_str();
  m->add_option("--chains", sim.chains)->capture_default_str();
  m->add_option("--pi", sim.pi, "identity | random")->capture_default_str();
  m->add_option("--out", sim.out)->required();
  m->add_option("--seed", sim.seed)->capture_default_str();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "run the Gibbs sampler");
  f->add_option("--data", fit.data)->required();
  fit.config.attach(f);
  fit.schedule.attach(f);
  f->add_option("--mask", fit.mask, "none | smoothing:<fraction> | forecast:<S>")->capture_default_str();
  f->add_option("--mask-file", fit.mask_file, "mask JSON written by an earlier run")
      ->check(CLI::ExistingFile);
  f->add_option("--out-trace", fit.out_trace)->required();
  f->add_option("--diagnostics", fit.diagnostics, "diagnostics CSV (default <trace>.diagnostics.csv)");
  f->add_option("--workers", fit.workers)->capture_default_str();
  f->add_option("--seed", fit.seed)->capture_default_str();
  f->add_flag("--quiet", fit.quiet);

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "predict held-out cells from a trace");
  p->add_option("--trace", pred.trace)->required();
  p->add_option("--mask", pred.mask, "mask JSON (default <trace>.mask.json)");
  p->add_option("--out", pred.out)->required();
  p->add_option("--rollouts", pred.rollouts, "forecast rollouts per sample")->capture_default_str();
  p->add_flag("--round", pred.round, "round estimates to integers");
  p->add_option("--workers", pred.workers)->capture_default_str();
  p->add_option("--seed", pred.seed)->capture_default_str();

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "MAE and MRE over held-out cells");
  sc->add_option("--truth", score.truth)->required();
  sc->add_option("--pred", score.pred)->required();
  sc->add_option("--mask", score.mask)->required();
  sc->add_option("--out", score.out, "metrics JSON (default stdout)");

  GraphArgs graph;
  auto* g = app.add_subcommand("graph", "latent graph and communities of a gs fit");
  g->add_option("--trace", graph.trace)->required();
  g->add_option("--threshold", graph.threshold, "relative community weight cutoff")->capture_default_str();
  g->add_option("--out-edges", graph.out_edges)->required();
  g->add_option("--out-communities", graph.out_communities)->required();

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "repeated fit/predict/score comparison");
  e->add_option("--zinb", exp.zinb, "ZINB preset 1-5");
  e->add_option("--data", exp.data);
  e->add_option("--groups", exp.groups)->capture_default_str();
  e->add_option("--V", exp.V, "rows per ZINB group")->capture_default_str();
  e->add_option("--T", exp.T)->capture_default_str();
  e->add_option("--models", exp.models, "name=chain[:variant],...")->capture_default_str();
  e->add_option("--tasks", exp.tasks)->capture_default_str();
  exp.config.attach(e);
  exp.schedule.attach(e);
  e->add_option("--repeats", exp.repeats)->capture_default_str();
  e->add_option("--rollouts", exp.rollouts)->capture_default_str();
  e->add_option("--workers", exp.workers, "0 = all cores")->capture_default_str();
  e->add_option("--out", exp.out)->required();
  e->add_option("--seed", exp.seed)->capture_default_str();

  GewekeArgs gw;
  auto* w = app.add_subcommand("geweke", "joint-distribution test of the sampler");
  gw.config.attach(w);
  w->add_option("--V", gw.V)->capture_default_str();
  w->add_option("--T", gw.T)->capture_default_str();
  w->add_option("--n", gw.n, "draws per simulator")->capture_default_str();
  w->add_option("--sweeps-per-draw", gw.sweeps_per_draw)->capture_default_str();
  w->add_option("--theta-rate-scale", gw.theta_rate_scale, "fault injection; 1 is correct")
      ->capture_default_str();
  w->add_option("--out", gw.out, "report JSON");
  w->add_option("--seed", gw.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*m) return cmd_simulate(sim);
    if (*f) return cmd_fit(fit);
    if (*p) return cmd_predict(pred);
    if (*sc) return cmd_score(score);
    if (*g) return cmd_graph(graph);
    if (*e) return cmd_experiment(exp);
    if (*w) return cmd_geweke(gw);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kConfig;
  } catch (const ParameterError& err) {
    std::cerr << "invalid parameter: " << err.what() << '\n';
    return kConfig;
  } catch (const DataFormatError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kData;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << '\n';
    return kNumerical;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
