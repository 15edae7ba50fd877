#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nbrgds/inference.hpp"
#include "nbrgds/model.hpp"

namespace nbrgds::cli {

inline constexpr const char* kTraceSchema = "nbrgds.trace/1";

/// Newline-delimited JSON: one header object, then one object per retained
/// sample.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, nlohmann::json header);
  void write_sample(int iteration, const LatentState& state);

 private:
  std::ofstream out_;
};

struct TraceFile {
  nlohmann::json header;
  ModelConfig config;
  std::vector<int> iterations;
  std::vector<LatentState> samples;
};

TraceFile read_trace(const std::filesystem::path& path);

}  // namespace nbrgds::cli
