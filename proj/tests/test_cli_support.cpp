#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "manifest.hpp"

using namespace nbrgds::cli;

TEST_SUITE("cli_support") {

TEST_CASE("blob hashes follow git") {
  CHECK(blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("manifest hash ignores outputs and timestamps") {
  const auto dir = std::filesystem::temp_directory_path() / "nbrgds_manifest_test";
  std::filesystem::create_directories(dir);
  const auto input = dir / "in.csv";
  std::ofstream(input) << "v,t\nx,1\n";
  Manifest a("fit", 7), b("fit", 7), c("fit", 8);
  for (Manifest* m : {&a, &b, &c}) {
    m->set_config({{"K", 3}});
    m->add_input("data", input);
  }
  b.add_output("trace", dir / "out.ndjson");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.comment() == "manifest: " + a.hash());
  CHECK(a.to_json()["inputs"]["data"]["blob"] == file_blob_hash(input));
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
