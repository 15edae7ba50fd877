#include "nbrgds/mask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nbrgds/errors.hpp"

namespace nbrgds {

void MaskSpec::normalize() {
  std::sort(held_out.begin(), held_out.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second < b.second : a.first < b.first;
            });
  held_out.erase(std::unique(held_out.begin(), held_out.end()), held_out.end());
}

void MaskSpec::validate(int V, int T) const {
  for (const auto& [v, t] : held_out)
    if (v < 0 || v >= V || t < 0 || t >= T)
      throw ConfigError("mask cell (" + std::to_string(v) + ", " + std::to_string(t) +
                        ") is outside the " + std::to_string(V) + " x " + std::to_string(T) +
                        " data");
  if (mode == MaskMode::Forecast) {
    if (horizon < 1 || horizon >= T)
      throw ConfigError("forecast horizon must satisfy 1 <= S < T");
    const std::size_t expected = static_cast<std::size_t>(V) * static_cast<std::size_t>(horizon);
    bool ok = held_out.size() == expected;
    for (const auto& cell : held_out) ok = ok && cell.second >= T - horizon;
    if (!ok) throw ConfigError("forecast mask must cover exactly the last S columns");
  }
}

MaskSpec forecast_mask(int V, int T, int horizon) {
  if (horizon < 1 || horizon >= T) throw ConfigError("forecast horizon must satisfy 1 <= S < T");
  MaskSpec m;
  m.mode = MaskMode::Forecast;
  m.horizon = horizon;
  for (int t = T - horizon; t < T; ++t)
    for (int v = 0; v < V; ++v) m.held_out.emplace_back(v, t);
  return m;
}

ObservationMask::ObservationMask(const MaskSpec& spec, int V, int T)
    : V_(V), T_(T),
      flags_(static_cast<std::size_t>(V) * static_cast<std::size_t>(T), 0),
      columns_(static_cast<std::size_t>(T)) {
  spec.validate(V, T);
  for (const auto& [v, t] : spec.held_out) {
    auto& flag = flags_[static_cast<std::size_t>(t) * V_ + v];
    if (flag) continue;
    flag = 1;
    columns_[t].push_back(v);
    ++count_;
  }
  for (auto& col : columns_) std::sort(col.begin(), col.end());
}

Metrics compute_metrics(const CountMatrix& truth, const Matrix& estimate, const MaskSpec& mask) {
  if (estimate.rows() != truth.values.rows() || estimate.cols() != truth.values.cols())
    throw DataFormatError("estimate shape " + std::to_string(estimate.rows()) + " x " +
                          std::to_string(estimate.cols()) + " does not match truth " +
                          std::to_string(truth.values.rows()) + " x " +
                          std::to_string(truth.values.cols()));
  if (mask.empty()) throw ConfigError("cannot score an empty mask");
  Metrics m;
  for (const auto& [v, t] : mask.held_out) {
    if (v < 0 || v >= truth.V() || t < 0 || t >= truth.T())
      throw ConfigError("mask cell outside the data");
    const double n = static_cast<double>(truth.values(v, t));
    const double err = std::fabs(n - estimate(v, t));
    m.mae += err;
    m.mre += err / (1.0 + n);
    ++m.n_cells;
  }
  m.mae /= static_cast<double>(m.n_cells);
  m.mre /= static_cast<double>(m.n_cells);
  return m;
}

}  // namespace nbrgds
