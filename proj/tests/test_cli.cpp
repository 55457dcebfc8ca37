#include <doctest.h>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "carvelab/cli.hpp"
#include "carvelab/csv.hpp"

using namespace carvelab;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kData = CARVELAB_TEST_DATA;

}  // namespace

TEST_CASE("count and bound") {
  const auto r = run({"count", "--n", "3", "--d", "2"});
  CHECK(r.code == 0);
  CHECK(r.out == "7\n");
  CHECK(r.err.find("command=count") != std::string::npos);
  CHECK(run({"count", "--n", "2", "--d", "2"}).out == "4\n");
  CHECK(run({"bound", "--widths", "3,2", "--d", "2"}).out.find("28") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"count", "--n", "x"}).code == 2);
  CHECK(run({"count", "--help"}).code == 0);
  CHECK(run({"carve", "--net", "does-not-exist.json"}).code == 1);
  CHECK(run({"carve", "--net", kData + "/small.json", "--t1", "0.2", "--t2", "0.6"}).code == 1);
  CHECK(run({"sat", "--N", "2", "--alpha", "1", "--trials", "1"}).code == 1);
}

TEST_CASE("carve reports counts") {
  const auto r = run({"carve", "--net", kData + "/small.json", "--box", "-2,2,-2,2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("regions 14\n") != std::string::npos);
  CHECK(r.out.find("after_layer 7 14 14\n") != std::string::npos);
  CHECK(r.out.find("bound 28\n") != std::string::npos);
}

TEST_CASE("CSV output is byte-identical and carries the manifest") {
  const std::vector<std::string> args{"goe", "--n", "1..3", "--trials", "2000", "--seed", "11", "--csv", "cli_goe.csv"};
  REQUIRE(run(args).code == 0);
  const auto first = read_file("cli_goe.csv");
  REQUIRE(run(args).code == 0);
  CHECK(read_file("cli_goe.csv") == first);
  const auto rows = parse_csv(first);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "n");
  const auto manifest = read_file("cli_goe.csv.manifest");
  CHECK(manifest.find("seed=11\n") != std::string::npos);
  CHECK(manifest.find("trials=2000\n") != std::string::npos);

  // The output path does not enter the config hash; the seed does.
  REQUIRE(run({"goe", "--n", "1..3", "--trials", "2000", "--seed", "11", "--csv", "cli_goe2.csv"}).code == 0);
  CHECK(read_file("cli_goe2.csv") == first);
  REQUIRE(run({"goe", "--n", "1..3", "--trials", "2000", "--seed", "12", "--csv", "cli_goe3.csv"}).code == 0);
  CHECK(read_file("cli_goe3.csv").substr(0, 60) != first.substr(0, 60));
  for (const char* f : {"cli_goe.csv", "cli_goe.csv.manifest", "cli_goe2.csv", "cli_goe2.csv.manifest", "cli_goe3.csv",
                        "cli_goe3.csv.manifest"})
    std::remove(f);
}

TEST_CASE("config files") {
  write_file("cli_run.cfg", "# a run\ncommand=count\nn=3\nd=2\n");
  const auto cfg = read_config("cli_run.cfg");
  CHECK(cfg.command == std::vector<std::string>{"count"});
  CHECK(cfg.options.size() == 2);
  CHECK(run({"--config", "cli_run.cfg"}).out == "7\n");
  // Command-line values win over the file.
  CHECK(run({"--config", "cli_run.cfg", "--n", "1"}).out == "2\n");
  CHECK(run({"--config=cli_run.cfg", "--d", "1"}).out == "4\n");
  CHECK(run({"--config", "missing.cfg"}).code != 0);
  std::remove("cli_run.cfg");
}

TEST_CASE("svg output") {
  REQUIRE(run({"carve", "--net", kData + "/small.json", "--box", "-2,2,-2,2", "--svg", "cli_small.svg"}).code == 0);
  const auto svg = read_file("cli_small.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  REQUIRE(run({"carve", "--net", kData + "/small.json", "--box", "-2,2,-2,2", "--svg", "cli_small.svg"}).code == 0);
  CHECK(read_file("cli_small.svg") == svg);
  std::remove("cli_small.svg");
  std::remove("cli_small.svg.manifest");
}
