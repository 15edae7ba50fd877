#pragma once

#include <utility>
#include <vector>

#include "nbrgds/model.hpp"
#include "nbrgds/types.hpp"

namespace nbrgds {

enum class MaskMode { Smoothing, Forecast };

struct MaskSpec {
  MaskMode mode = MaskMode::Smoothing;
  int horizon = 0;                              // forecast only
  std::vector<std::pair<int, int>> held_out;    // (v, t), sorted, unique

  bool empty() const { return held_out.empty(); }
  /// Sorts and deduplicates `held_out`.
  void normalize();
  /// Range checks against a V x T matrix; forecast masks must cover exactly
  /// the last `horizon` columns. Throws ConfigError.
  void validate(int V, int T) const;
};

MaskSpec forecast_mask(int V, int T, int horizon);

/// Dense lookup built from a MaskSpec.
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(const MaskSpec& spec, int V, int T);

  bool masked(int v, int t) const { return flags_[static_cast<std::size_t>(t) * V_ + v] != 0; }
  const std::vector<int>& masked_in_column(int t) const { return columns_[t]; }
  bool column_fully_masked(int t) const {
    return static_cast<int>(columns_[t].size()) == V_;
  }
  std::size_t size() const { return count_; }
  int V() const { return V_; }
  int T() const { return T_; }

 private:
  int V_ = 0;
  int T_ = 0;
  std::size_t count_ = 0;
  std::vector<unsigned char> flags_;
  std::vector<std::vector<int>> columns_;
};

struct Metrics {
  double mae = 0.0;
  double mre = 0.0;
  std::size_t n_cells = 0;
};

/// MAE and MRE averaged over the held-out cells only. `estimate` is V x T;
/// entries outside the mask are ignored.
Metrics compute_metrics(const CountMatrix& truth, const Matrix& estimate, const MaskSpec& mask);

}  // namespace nbrgds
