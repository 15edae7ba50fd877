#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "nbrgds/errors.hpp"

namespace nbrgds::cli {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace

std::string blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw Error("cannot allocate a digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("SHA-1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

std::string file_blob_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return blob_hash(buf.str());
}

Manifest::Manifest(std::string command, std::uint64_t seed)
    : command_(std::move(command)), seed_(seed), started_(utc_now()) {}

void Manifest::set_config(nlohmann::json config) { config_ = std::move(config); }

void Manifest::add_input(const std::string& role, const std::filesystem::path& path) {
  inputs_[role] = {{"path", path.string()}, {"blob", file_blob_hash(path)}};
}

void Manifest::add_output(const std::string& role, const std::filesystem::path& path) {
  outputs_[role] = path.string();
}

nlohmann::json Manifest::hashed() const {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [role, entry] : inputs_.items()) inputs[role] = entry["blob"];
  return {{"command", command_}, {"seed", seed_}, {"config", config_}, {"inputs", inputs}};
}

std::string Manifest::hash() const { return blob_hash(hashed().dump()); }

std::string Manifest::comment() const { return "manifest: " + hash(); }

nlohmann::json Manifest::to_json() const {
  return {{"manifest", hash()},
          {"command", command_},
          {"seed", seed_},
          {"config", config_},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"started", started_},
          {"finished", utc_now()}};
}

void Manifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace nbrgds::cli
