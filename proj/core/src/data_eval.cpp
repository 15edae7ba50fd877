#include "nbrgds/data_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nbrgds/chains.hpp"
#include "nbrgds/distributions.hpp"
#include "nbrgds/errors.hpp"
#include "nbrgds/json_io.hpp"
#include "nbrgds/parallel.hpp"

namespace nbrgds {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  s = s.substr(b, e - b);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ": column " + std::to_string(column);
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

CountMatrix parse_counts(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  CountMatrix m;
  std::vector<std::vector<Count>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[line.find_first_not_of(" \t")] == '#') continue;
    const auto cells = split_csv_line(line);
    if (!have_header) {
      if (cells.size() < 2)
        throw DataFormatError(source + ":" + std::to_string(line_no) +
                              ": header needs a label cell and at least one time label");
      m.time_labels.assign(cells.begin() + 1, cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() != m.time_labels.size() + 1)
      throw DataFormatError(source + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(m.time_labels.size() + 1) + " cells, found " +
                            std::to_string(cells.size()));
    m.dim_labels.push_back(cells[0]);
    std::vector<Count> row(cells.size() - 1);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const std::string& c = cells[j];
      Count value = 0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), value);
      if (c.empty() || ec != std::errc() || ptr != c.data() + c.size())
        throw DataFormatError(where(source, line_no, j + 1) + ": '" + c +
                              "' is not an integer count");
      if (value < 0)
        throw DataFormatError(where(source, line_no, j + 1) + ": negative count " + c);
      row[j - 1] = value;
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw DataFormatError(source + ": no header row");
  if (rows.empty()) throw DataFormatError(source + ": no data rows");
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.time_labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

CountMatrix load_counts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_counts(buf.str(), path.string());
}

std::string format_counts(const CountMatrix& counts, const std::vector<std::string>& comments) {
  counts.validate();
  std::ostringstream os;
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "dim";
  for (const auto& t : counts.time_labels) os << ',' << t;
  os << '\n';
  for (int v = 0; v < counts.V(); ++v) {
    os << counts.dim_labels[v];
    for (int t = 0; t < counts.T(); ++t) os << ',' << counts.values(v, t);
    os << '\n';
  }
  return os.str();
}

void save_counts(const std::filesystem::path& path, const CountMatrix& counts,
                 const std::vector<std::string>& comments) {
  const std::string text = format_counts(counts, comments);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot write " + path.string());
  out << text;
}

MaskSpec make_mask(int V, int T, const MaskParams& params, const RngStream& rng) {
  if (V <= 0 || T <= 0) throw ConfigError("mask needs a non-empty matrix");
  if (params.mode == MaskMode::Forecast) {
    if (params.horizon < 1 || params.horizon >= T)
      throw ConfigError("forecast horizon must satisfy 1 <= S < T (S = " +
                        std::to_string(params.horizon) + ", T = " + std::to_string(T) + ")");
    return forecast_mask(V, T, params.horizon);
  }
  if (!(params.holdout_fraction > 0.0 && params.holdout_fraction < 1.0))
    throw ConfigError("holdout fraction must lie in (0, 1)");
  const std::size_t n = static_cast<std::size_t>(V) * static_cast<std::size_t>(T);
  const auto k = static_cast<std::size_t>(std::llround(params.holdout_fraction * n));
  if (k == 0) throw ConfigError("holdout fraction selects no cells");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RngStream r = rng;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(r.uniform_index(n - i));
    std::swap(idx[i], idx[j]);
  }
  MaskSpec m;
  m.mode = MaskMode::Smoothing;
  m.held_out.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    m.held_out.emplace_back(static_cast<int>(idx[i] % V), static_cast<int>(idx[i] / V));
  m.normalize();
  return m;
}

MaskParams parse_mask_params(const std::string& text) {
  const auto colon = text.find(':');
  const std::string mode = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  MaskParams p;
  try {
    if (mode == "smoothing") {
      p.mode = MaskMode::Smoothing;
      if (!arg.empty()) p.holdout_fraction = std::stod(arg);
    } else if (mode == "forecast") {
      p.mode = MaskMode::Forecast;
      if (!arg.empty()) p.horizon = std::stoi(arg);
    } else {
      throw ConfigError("mask must be smoothing:<fraction> or forecast:<S>, got '" + text + "'");
    }
  } catch (const std::logic_error&) {
    throw ConfigError("bad mask argument '" + text + "'");
  }
  return p;
}

void ZinbConfig::validate() const {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("zinb p0 must lie in [0, 1]");
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("zinb r must be positive");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("zinb p must lie in (0, 1)");
  if (V <= 0 || T <= 0 || n_groups <= 0)
    throw ConfigError("zinb V, T and n_groups must be positive");
}

double ZinbConfig::mean() const { return r * (1.0 - p0) * (1.0 - p) / p; }

double ZinbConfig::variance() const {
  return (1.0 - p0) * r * (1.0 - p) / (p * p) +
         p0 * (1.0 - p0) * r * r * (1.0 - p) * (1.0 - p) / (p * p);
}

double ZinbConfig::variance_to_mean() const { return (1.0 + r * p0 * (1.0 - p)) / p; }

ZinbConfig zinb_preset(int index) {
  static constexpr double kP[] = {0.9, 0.8, 0.7, 0.6, 0.5};
  if (index < 1 || index > 5) throw ConfigError("zinb preset must be 1..5");
  ZinbConfig c;
  c.p0 = 0.9;
  c.r = 5.0;
  c.p = kP[index - 1];
  return c;
}

Count sample_zinb(const ZinbConfig& c, RngStream& rng) {
  if (rng.uniform() < c.p0) return 0;
  return sample_poisson(sample_gamma(c.r, c.p / (1.0 - c.p), rng), rng);
}

ZinbData generate_zinb(const std::vector<ZinbConfig>& groups, const RngStream& rng) {
  if (groups.empty()) throw ConfigError("zinb source needs at least one group");
  const int T = groups.front().T;
  int V = 0;
  for (const auto& g : groups) {
    g.validate();
    if (g.T != T) throw ConfigError("zinb groups must share T");
    V += g.V;
  }
  ZinbData data;
  data.counts = CountMatrix::zeros(V, T);
  data.groups = groups;
  int row = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (int v = 0; v < groups[gi].V; ++v, ++row) {
      RngStream r = rng.split(static_cast<std::uint64_t>(row));
      for (int t = 0; t < T; ++t) data.counts.values(row, t) = sample_zinb(groups[gi], r);
      data.group.push_back(static_cast<int>(gi));
    }
  }
  return data;
}

ZinbData generate_zinb(const ZinbConfig& config, const RngStream& rng) {
  config.validate();
  ZinbConfig one = config;
  one.n_groups = 1;
  return generate_zinb(std::vector<ZinbConfig>(static_cast<std::size_t>(config.n_groups), one),
                       rng);
}

double forecast_delta(const LatentState& state, int training_steps) {
  if (training_steps <= 0 || training_steps > state.T())
    throw ParameterError("forecast_delta: bad training length");
  const int lo = std::max(0, training_steps - 5);
  return state.delta.segment(lo, training_steps - lo).mean();
}

Matrix predict_heldout(const std::vector<LatentState>& samples, const MaskSpec& mask,
                       const ModelConfig& config, const RngStream& rng,
                       const PredictOptions& options) {
  if (samples.empty()) throw ConfigError("cannot predict from an empty trace");
  const int V = samples.front().V();
  const int T = samples.front().T();
  mask.validate(V, T);
  const std::size_t n = samples.size();
  std::vector<Matrix> per_sample(n);
  const bool forecast = mask.mode == MaskMode::Forecast && mask.horizon > 0;
  if (forecast && options.rollouts < 1) throw ConfigError("forecasting needs at least one rollout");

  parallel_for(n, options.workers, [&](std::size_t i) {
    const LatentState& s = samples[i];
    Matrix rates = poisson_rates(s);
    if (forecast) {
      const int train = T - mask.horizon;
      const double delta_f = forecast_delta(s, train);
      ChainConfig cc = config.chain_config();
      cc.K = s.K();
      cc.tau = s.tau;
      cc.psi = s.psi;
      const Matrix loadings = s.phi * s.lambda.asDiagonal();
      Matrix future = Matrix::Zero(V, mask.horizon);
      const RngStream base = rng.split(static_cast<std::uint64_t>(i));
      for (int r = 0; r < options.rollouts; ++r) {
        RngStream stream = base.split(static_cast<std::uint64_t>(r));
        ChainState cs = ChainState::from_theta(s.theta.col(train));
        for (int step_i = 0; step_i < mask.horizon; ++step_i) {
          cs = step(cc, s.pi, cs, stream);
          future.col(step_i) += delta_f * (loadings * cs.theta);
        }
      }
      rates.rightCols(mask.horizon) = future / static_cast<double>(options.rollouts);
    }
    per_sample[i] = std::move(rates);
  });

  Matrix mean = Matrix::Zero(V, T);
  for (const auto& m : per_sample) mean += m;
  return mean / static_cast<double>(n);
}

std::string task_name(const MaskParams& task) {
  return task.mode == MaskMode::Forecast ? "forecast" : "smoothing";
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.models.empty()) throw ConfigError("experiment has no models");
  if (spec.tasks.empty()) throw ConfigError("experiment has no tasks");
  if (spec.n_repeats < 1) throw ConfigError("experiment needs at least one repeat");
  spec.schedule.validate();
  if (spec.zinb_groups.empty()) spec.counts.validate();

  const RngStream root(spec.seed);
  const std::size_t n_models = spec.models.size();
  const std::size_t n_tasks = spec.tasks.size();
  const std::size_t n_rep = static_cast<std::size_t>(spec.n_repeats);

  // data shared by all models of a repeat
  std::vector<CountMatrix> data(n_rep);
  for (std::size_t r = 0; r < n_rep; ++r)
    data[r] = spec.zinb_groups.empty()
                  ? spec.counts
                  : generate_zinb(spec.zinb_groups, root.split("data").split(r)).counts;

  ExperimentResult result;
  result.runs.resize(n_models * n_tasks * n_rep);
  parallel_for(result.runs.size(), resolve_workers(spec.workers), [&](std::size_t job) {
    const std::size_t r = job % n_rep;
    const std::size_t ti = (job / n_rep) % n_tasks;
    const std::size_t mi = job / (n_rep * n_tasks);
    const CountMatrix& counts = data[r];
    ModelConfig cfg = spec.models[mi].config;
    cfg.V = counts.V();
    cfg.T = counts.T();
    const MaskParams& task = spec.tasks[ti];
    if (task.mode == MaskMode::Forecast) cfg.forecast_horizon = task.horizon;
    const RngStream rep = root.split("repeat").split(r).split(ti);
    const MaskSpec mask = make_mask(cfg.V, cfg.T, task, rep.split("mask"));
    const PosteriorTrace trace = run_gibbs(counts, mask, cfg, spec.schedule, rep.split("fit"));
    PredictOptions po = spec.predict;
    po.workers = 1;
    const Matrix estimate = predict_heldout(trace.samples, mask, cfg, rep.split("predict"), po);
    ExperimentRun& run = result.runs[job];
    run.model = spec.models[mi].name;
    run.task = task_name(task);
    run.repeat = static_cast<int>(r);
    run.metrics = compute_metrics(counts, estimate, mask);
  });

  for (std::size_t mi = 0; mi < n_models; ++mi)
    for (std::size_t ti = 0; ti < n_tasks; ++ti)
      for (const char* metric : {"mae", "mre"}) {
        ExperimentRow row;
        row.model = spec.models[mi].name;
        row.task = task_name(spec.tasks[ti]);
        row.metric = metric;
        row.n = spec.n_repeats;
        std::vector<double> xs;
        for (std::size_t r = 0; r < n_rep; ++r) {
          const auto& m = result.runs[(mi * n_tasks + ti) * n_rep + r].metrics;
          xs.push_back(row.metric == "mae" ? m.mae : m.mre);
        }
        row.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        double ss = 0.0;
        for (double x : xs) ss += (x - row.mean) * (x - row.mean);
        row.std = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1)) : 0.0;
        result.rows.push_back(row);
      }
  return result;
}

nlohmann::json experiment_manifest(const ExperimentSpec& spec) {
  Json models = Json::array();
  for (const auto& m : spec.models) models.push_back({{"name", m.name}, {"config", to_json(m.config)}});
  Json tasks = Json::array();
  for (const auto& t : spec.tasks)
    tasks.push_back({{"mode", task_name(t)},
                     {"holdout_fraction", t.holdout_fraction},
                     {"horizon", t.horizon}});
  Json data;
  if (spec.zinb_groups.empty()) {
    data = {{"kind", "counts"}, {"V", spec.counts.V()}, {"T", spec.counts.T()}};
  } else {
    Json groups = Json::array();
    for (const auto& g : spec.zinb_groups)
      groups.push_back({{"p0", g.p0}, {"r", g.r}, {"p", g.p}, {"V", g.V}, {"T", g.T}});
    data = {{"kind", "zinb"}, {"groups", groups}};
  }
  Json seeds = Json::array();
  for (int r = 0; r < spec.n_repeats; ++r) seeds.push_back(r);
  return Json{{"seed", spec.seed},
              {"repeat_streams", seeds},
              {"n_repeats", spec.n_repeats},
              {"schedule", to_json(spec.schedule)},
              {"rollouts", spec.predict.rollouts},
              {"data", data},
              {"models", models},
              {"tasks", tasks}};
}

std::string format_results(const ExperimentResult& result,
                           const std::vector<std::string>& comments) {
  std::ostringstream os;
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "model,task,metric,mean,std\n";
  for (const auto& row : result.rows)
    os << row.model << ',' << row.task << ',' << row.metric << ',' << format_double(row.mean)
       << ',' << format_double(row.std) << '\n';
  return os.str();
}

}  // namespace nbrgds
