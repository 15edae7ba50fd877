#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nbrgds::cli {

/// SHA-1 of "blob <size>\0<content>", hex encoded (the hash git assigns to a
/// file with that content).
std::string blob_hash(const std::string& content);
std::string file_blob_hash(const std::filesystem::path& path);

/// Run manifest. The hash covers the command, configuration, seed and input
/// content hashes; timestamps and output paths are recorded but not hashed,
/// so reruns with the same inputs carry the same hash.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed);

  void set_config(nlohmann::json config);
  void add_input(const std::string& role, const std::filesystem::path& path);
  void add_output(const std::string& role, const std::filesystem::path& path);

  std::string hash() const;
  /// "manifest: <hash>", for CSV comment lines.
  std::string comment() const;
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  nlohmann::json hashed() const;

  std::string command_;
  std::uint64_t seed_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::object();
  nlohmann::json outputs_ = nlohmann::json::object();
  std::string started_;
};

}  // namespace nbrgds::cli
