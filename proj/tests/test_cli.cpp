#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "test_util.hpp"

using labelloc::testing::TempDir;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const TempDir& dir, const std::string& args) {
  const auto err_path = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && '" LABELLOC_CLI_PATH "' " + args +
                          " 2>'" + err_path.string() + "'";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = slurp(err_path);
  return r;
}

}  // namespace

TEST_CASE("cli end to end") {
  TempDir dir("cli");
  auto r = cli(dir, "--seed 5 gen-world --archetype DG/DA --out world");
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["landmarks"] == 24);
  CHECK(std::filesystem::exists(dir / "world/footprints.json"));
  CHECK(std::filesystem::exists(dir / "world/map.pgm"));
  CHECK(std::filesystem::exists(dir / "world/map.yaml"));

  r = cli(dir, "--seed 5 gen-dataset --world world --count 3 --out data.ndjson");
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["records"] == 3);

  r = cli(dir, "--seed 5 gen-dataset --world world --count 3 --no-labels --out bare.ndjson");
  REQUIRE(r.status == 0);
  r = cli(dir, "--seed 5 detect --world world --dataset bare.ndjson --out relabeled.ndjson");
  REQUIRE(r.status == 0);
  CHECK(slurp(dir / "relabeled.ndjson") == slurp(dir / "data.ndjson"));

  r = cli(dir, "--seed 2 --hypotheses 5000 --workers 1 localize --world world --dataset data.ndjson "
               "--out m1.csv --summary s.json");
  REQUIRE(r.status == 0);
  r = cli(dir, "--seed 2 --hypotheses 5000 --workers 8 localize --world world --dataset data.ndjson "
               "--out m8.csv");
  REQUIRE(r.status == 0);
  CHECK(slurp(dir / "m1.csv") == slurp(dir / "m8.csv"));
  CHECK(slurp(dir / "m1.csv").rfind("# labelloc metrics v1\nrecord_index,modality,", 0) == 0);
  const json summary = json::parse(slurp(dir / "s.json"));
  CHECK(summary["record_count"] == 3);

  r = cli(dir, "report --metrics m1.csv --json");
  REQUIRE(r.status == 0);
  const json rep = json::parse(r.out);
  for (const char* m : {"vision", "scan", "fused"}) {
    CHECK(rep["modalities"][m]["e_trans"]["mean"].get<double>() ==
          doctest::Approx(summary["modalities"][m]["e_trans"]["mean"].get<double>()).epsilon(1e-12));
  }

  r = cli(dir, "--hypotheses 5000 --modality vision localize --world world --dataset data.ndjson");
  REQUIRE(r.status == 0);
  CHECK(r.out.find(",scan,") == std::string::npos);
  CHECK(r.out.find(",vision,") != std::string::npos);

  r = cli(dir, "--hypotheses 5000 heatmap --world world --dataset data.ndjson --record 1 --out h.pgm");
  REQUIRE(r.status == 0);
  CHECK(slurp(dir / "h.pgm").rfind("P5\n", 0) == 0);
}

TEST_CASE("cli errors are json documents") {
  TempDir dir("cli_err");
  auto r = cli(dir, "localize --world missing --dataset nothing.ndjson");
  CHECK(r.status != 0);
  const json doc = json::parse(r.err);
  CHECK(doc["error"]["code"] == "io_error");
  CHECK_FALSE(doc["error"]["message"].get<std::string>().empty());

  r = cli(dir, "gen-world --archetype XY/ZW --out w");
  CHECK(r.status != 0);
  CHECK(json::parse(r.err)["error"]["code"] == "invalid_argument");

  r = cli(dir, "--modality sideways gen-world --out w");
  CHECK(r.status != 0);
  CHECK(json::parse(r.err)["error"]["code"] == "invalid_argument");

  r = cli(dir, "frobnicate");
  CHECK(r.status == 2);
  CHECK(json::parse(r.err)["error"]["code"] == "usage");

  r = cli(dir, "--help");
  CHECK(r.status == 0);
  CHECK(r.out.find("localize") != std::string::npos);
}
