#include "nbrgds/json_io.hpp"

#include <set>
#include <string>

#include "nbrgds/errors.hpp"

namespace nbrgds {

namespace {

template <class Derived>
Json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_from_json(const Json& j,
                                                                        const char* what) {
  if (!j.is_array()) throw DataFormatError(std::string(what) + " must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw DataFormatError(std::string(what) + " has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<Scalar>();
  }
  return m;
}

template <class Derived>
Json vector_to_json(const Eigen::MatrixBase<Derived>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw DataFormatError(std::string(what) + " must be an array");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<Scalar>();
  return v;
}

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw DataFormatError(std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

Json to_json(const ModelConfig& c) {
  return Json{{"schema_version", kConfigSchemaVersion},
              {"V", c.V},
              {"T", c.T},
              {"K", c.K},
              {"C", c.C},
              {"variant", std::string(to_string(c.variant))},
              {"chain", std::string(to_string(c.chain))},
              {"stationary_delta", c.stationary_delta},
              {"eps0", c.eps0},
              {"eps0_theta", c.eps0_theta},
              {"eps0_lambda", c.eps0_lambda},
              {"tau", c.tau},
              {"psi", c.psi},
              {"sample_psi", c.sample_psi},
              {"sample_tau", c.sample_tau},
              {"r0", c.r0},
              {"c0", c.c0},
              {"a_hat", c.a_hat},
              {"b_hat", c.b_hat},
              {"forecast_horizon", c.forecast_horizon}};
}

ModelConfig model_config_from_json(const Json& j, ModelConfig c) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  static const std::set<std::string> known = {
      "schema_version", "V", "T", "K", "C", "variant", "chain", "stationary_delta", "eps0",
      "eps0_theta", "eps0_lambda", "tau", "psi", "sample_psi", "sample_tau", "r0", "c0",
      "a_hat", "b_hat", "forecast_horizon"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown model config key '" + key + "'");
  try {
    if (j.contains("schema_version") && j["schema_version"].get<int>() != kConfigSchemaVersion)
      throw ConfigError("unsupported config schema_version " + j["schema_version"].dump());
    auto get = [&](const char* key, auto& dst) {
      if (j.contains(key)) dst = j[key].get<std::decay_t<decltype(dst)>>();
    };
    get("V", c.V);
    get("T", c.T);
    get("K", c.K);
    get("C", c.C);
    if (j.contains("variant")) c.variant = variant_from_string(j["variant"].get<std::string>());
    if (j.contains("chain")) c.chain = chain_family_from_string(j["chain"].get<std::string>());
    get("stationary_delta", c.stationary_delta);
    get("eps0", c.eps0);
    get("eps0_theta", c.eps0_theta);
    get("eps0_lambda", c.eps0_lambda);
    get("tau", c.tau);
    get("psi", c.psi);
    get("sample_psi", c.sample_psi);
    get("sample_tau", c.sample_tau);
    get("r0", c.r0);
    get("c0", c.c0);
    get("a_hat", c.a_hat);
    get("b_hat", c.b_hat);
    get("forecast_horizon", c.forecast_horizon);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad model config value: ") + e.what());
  }
  return c;
}

Json to_json(const Schedule& s) {
  return Json{{"total", s.total}, {"burn_in", s.burn_in}, {"thin", s.thin}};
}

Schedule schedule_from_json(const Json& j, Schedule s) {
  try {
    if (j.contains("total")) s.total = j["total"].get<int>();
    if (j.contains("burn_in")) s.burn_in = j["burn_in"].get<int>();
    if (j.contains("thin")) s.thin = j["thin"].get<int>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad schedule value: ") + e.what());
  }
  return s;
}

Json to_json(const LatentState& s) {
  Json j{{"schema", kStateSchema},
         {"theta", matrix_to_json(s.theta)},
         {"h", matrix_to_json(s.h)},
         {"h_hat", matrix_to_json(s.h_hat)},
         {"lambda", vector_to_json(s.lambda)},
         {"g", vector_to_json(s.g)},
         {"gamma", s.gamma},
         {"beta", s.beta},
         {"delta", vector_to_json(s.delta)},
         {"phi", matrix_to_json(s.phi)},
         {"pi", matrix_to_json(s.pi)},
         {"psi", s.psi},
         {"tau", s.tau}};
  if (const auto* fs = std::get_if<FsState>(&s.transition)) {
    j["transition"] = {{"kind", "fs"}, {"A", matrix_to_json(fs->A)}, {"self_rate", fs->self_rate}};
  } else if (const auto* gs = std::get_if<GsState>(&s.transition)) {
    j["transition"] = {{"kind", "gs"},
                       {"D", matrix_to_json(gs->D)},
                       {"Z", matrix_to_json(gs->Z)},
                       {"W", matrix_to_json(gs->W)}};
  } else {
    j["transition"] = {{"kind", "plain"}};
  }
  if (s.communities.M.size() > 0)
    j["communities"] = {{"M", matrix_to_json(s.communities.M)},
                        {"r", vector_to_json(s.communities.r)}};
  return j;
}

LatentState latent_state_from_json(const Json& j) {
  try {
    if (!j.is_object() || j.value("schema", "") != kStateSchema)
      throw DataFormatError("not a latent state document (expected schema " +
                            std::string(kStateSchema) + ")");
    LatentState s;
    s.theta = matrix_from_json<double>(field(j, "theta"), "theta");
    s.h = matrix_from_json<Count>(field(j, "h"), "h");
    s.h_hat = matrix_from_json<double>(field(j, "h_hat"), "h_hat");
    s.lambda = vector_from_json<double>(field(j, "lambda"), "lambda");
    s.g = vector_from_json<Count>(field(j, "g"), "g");
    s.gamma = field(j, "gamma").get<double>();
    s.beta = field(j, "beta").get<double>();
    s.delta = vector_from_json<double>(field(j, "delta"), "delta");
    s.phi = matrix_from_json<double>(field(j, "phi"), "phi");
    s.pi = matrix_from_json<double>(field(j, "pi"), "pi");
    s.psi = field(j, "psi").get<double>();
    s.tau = field(j, "tau").get<double>();
    const Json& tr = field(j, "transition");
    const std::string kind = field(tr, "kind").get<std::string>();
    if (kind == "fs") {
      FsState fs;
      fs.A = matrix_from_json<Count>(field(tr, "A"), "A");
      fs.self_rate = field(tr, "self_rate").get<double>();
      s.transition = std::move(fs);
    } else if (kind == "gs") {
      GsState gs;
      gs.D = matrix_from_json<double>(field(tr, "D"), "D");
      gs.Z = matrix_from_json<Count>(field(tr, "Z"), "Z");
      gs.W = matrix_from_json<Count>(field(tr, "W"), "W");
      s.transition = std::move(gs);
    } else if (kind == "plain") {
      s.transition = PlainPrior{};
    } else {
      throw DataFormatError("unknown transition kind '" + kind + "'");
    }
    if (j.contains("communities")) {
      s.communities.M = matrix_from_json<double>(field(j["communities"], "M"), "M");
      s.communities.r = vector_from_json<double>(field(j["communities"], "r"), "r");
    }
    const Eigen::Index K = s.lambda.size();
    const Eigen::Index T = s.delta.size();
    if (s.theta.rows() != K || s.theta.cols() != T + 1 || s.h.rows() != K || s.h.cols() != T ||
        s.h_hat.rows() != K || s.h_hat.cols() != T || s.g.size() != K || s.phi.cols() != K ||
        s.pi.rows() != K || s.pi.cols() != K)
      throw DataFormatError("latent state fields have inconsistent shapes");
    return s;
  } catch (const Json::exception& e) {
    throw DataFormatError(std::string("malformed latent state: ") + e.what());
  }
}

Json to_json(const MaskSpec& m, int V, int T) {
  Json cells = Json::array();
  for (const auto& [v, t] : m.held_out) cells.push_back({v, t});
  return Json{{"schema", kMaskSchema},
              {"mode", m.mode == MaskMode::Forecast ? "forecast" : "smoothing"},
              {"horizon", m.horizon},
              {"V", V},
              {"T", T},
              {"cells", std::move(cells)}};
}

MaskSpec mask_from_json(const Json& j) {
  try {
    if (!j.is_object() || j.value("schema", "") != kMaskSchema)
      throw DataFormatError("not a mask document (expected schema " + std::string(kMaskSchema) +
                            ")");
    MaskSpec m;
    const std::string mode = field(j, "mode").get<std::string>();
    if (mode == "forecast") m.mode = MaskMode::Forecast;
    else if (mode == "smoothing") m.mode = MaskMode::Smoothing;
    else throw DataFormatError("unknown mask mode '" + mode + "'");
    m.horizon = j.value("horizon", 0);
    for (const auto& cell : field(j, "cells")) {
      if (!cell.is_array() || cell.size() != 2) throw DataFormatError("mask cells must be [v, t]");
      m.held_out.emplace_back(cell[0].get<int>(), cell[1].get<int>());
    }
    m.normalize();
    return m;
  } catch (const Json::exception& e) {
    throw DataFormatError(std::string("malformed mask: ") + e.what());
  }
}

Json to_json(const Metrics& m) {
  return Json{{"mae", m.mae}, {"mre", m.mre}, {"n_cells", m.n_cells}};
}

}  // namespace nbrgds
