#include "trace_io.hpp"

#include "nbrgds/errors.hpp"
#include "nbrgds/json_io.hpp"

namespace nbrgds::cli {

TraceWriter::TraceWriter(const std::filesystem::path& path, nlohmann::json header)
    : out_(path, std::ios::binary) {
  if (!out_) throw DataFormatError("cannot write " + path.string());
  header["kind"] = "header";
  header["schema"] = kTraceSchema;
  out_ << header.dump() << '\n';
}

void TraceWriter::write_sample(int iteration, const LatentState& state) {
  const nlohmann::json line{{"kind", "sample"}, {"iteration", iteration}, {"state", to_json(state)}};
  out_ << line.dump() << '\n';
  if (!out_) throw DataFormatError("write to trace failed");
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open trace " + path.string());
  TraceFile trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (line_no == 1) {
      if (j.value("kind", "") != "header" || j.value("schema", "") != kTraceSchema)
        throw DataFormatError(path.string() + ": missing trace header");
      trace.header = j;
      trace.config = model_config_from_json(j.at("config"));
      continue;
    }
    if (j.value("kind", "") != "sample")
      throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": expected a sample");
    trace.iterations.push_back(j.at("iteration").get<int>());
    trace.samples.push_back(latent_state_from_json(j.at("state")));
  }
  if (trace.header.is_null()) throw DataFormatError(path.string() + ": empty trace");
  return trace;
}

}  // namespace nbrgds::cli
