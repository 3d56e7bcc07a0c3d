// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>

#include "rangeperc/config.hpp"
#include "rangeperc/csv.hpp"
#include "rangeperc/manifest.hpp"

using namespace rangeperc;
namespace fs = std::filesystem;

TEST_CASE("seed parsing") {
  CHECK(parse_seed("0x5eed") == 0x5eed);
  CHECK(parse_seed("0XFF") == 255);
  CHECK(parse_seed("12345") == 12345);
  CHECK(parse_seed("18446744073709551615") == ~std::uint64_t{0});
  CHECK(parse_seed("0xffffffffffffffff") == ~std::uint64_t{0});
  CHECK_THROWS_AS(parse_seed("18446744073709551616"), ConfigError);
  CHECK_THROWS_AS(parse_seed("-1"), ConfigError);
  CHECK_THROWS_AS(parse_seed("0x"), ConfigError);
  CHECK_THROWS_AS(parse_seed("12abc"), ConfigError);
  CHECK_THROWS_AS(parse_seed(""), ConfigError);
  CHECK(format_seed(0x5eed) == "0x0000000000005eed");
}

TEST_CASE("config files, overrides and schemas") {
  auto cfg = Config::from_string("# comment\nd = 3\n\nR_list = 2, 4 # trailing\ntheta=0.5\n");
  cfg.apply_override("theta=0.75");
  const KeySpec schema[] = {{"d", "2", ""}, {"R_list", "", ""}, {"theta", "1", ""}, {"flag", "no", ""}};
  cfg.resolve(schema);
  CHECK(cfg.get_int("d") == 3);
  CHECK(cfg.get_int_list("R_list") == std::vector<std::int64_t>{2, 4});
  CHECK(cfg.get_double("theta") == 0.75);
  CHECK_FALSE(cfg.get_bool("flag"));
  CHECK(cfg.values().size() == 4);

  auto unknown = Config::from_string("d = 2\nbogus = 1\n");
  CHECK_THROWS_AS(unknown.resolve(schema), ConfigError);
  CHECK_THROWS_AS(Config::from_string("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(Config::from_string("bad key! = 1\n"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override("novalue"), ConfigError);
  auto bad = Config::from_string("d = 2.5\ntheta = nan\n");
  CHECK_THROWS_AS(bad.get_int("d"), ConfigError);
  CHECK_THROWS_AS(bad.get_double("theta"), ConfigError);
  CHECK_THROWS_AS(Config::from_file("/nonexistent/config.cfg"), ConfigError);
}

TEST_CASE("optional and empty values") {
  auto cfg = Config::from_string("a =\nb = 0.25\n");
  CHECK_FALSE(cfg.has("a"));
  CHECK(cfg.has("b"));
  CHECK_FALSE(cfg.get_optional_double("a").has_value());
  CHECK(*cfg.get_optional_double("b") == 0.25);
  CHECK(cfg.get_double_list("a").empty());
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(std::int64_t{-42}) == "-42");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("csv tables") {
  CsvTable t({"a", "b", "c"});
  t.add(1, 0.5, true);
  t.add("x", std::string("y"), false);
  CHECK(t.str() == "a,b,c\n1,0.5,1\nx,y,0\n");
  CHECK_THROWS(t.add(1, 2));
  CHECK_THROWS(t.add("a,b", 1, 2));
  CHECK_THROWS(t.add("q\"", 1, 2));
}

TEST_CASE("sha256 and manifest") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const fs::path dir = fs::temp_directory_path() / "rangeperc_manifest_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file_atomic(dir / "out.csv", "a\n1\n");
  CHECK(read_file(dir / "out.csv") == "a\n1\n");
  RunManifest m("demo", {{"d", "2"}}, "12", 12);
  m.add_output(dir / "out.csv");
  m.rows().push_back({{"R", 4}});
  m.write(dir / "manifest.json");
  const auto j = load_manifest(dir / "manifest.json");
  REQUIRE(j.has_value());
  CHECK((*j)["command"] == "demo");
  CHECK((*j)["master_seed"] == "12");
  CHECK((*j)["master_seed_hex"] == "0x000000000000000c");
  CHECK((*j)["config"]["d"] == "2");
  CHECK((*j)["outputs"][0]["file"] == "out.csv");
  CHECK((*j)["outputs"][0]["sha256"] == sha256_hex("a\n1\n"));
  CHECK((*j)["version"] == kToolVersion);
  CHECK((*j)["complete"] == true);
  CHECK(j->contains("start_time"));
  CHECK_FALSE(load_manifest(dir / "missing.json").has_value());
  fs::remove_all(dir);
}
