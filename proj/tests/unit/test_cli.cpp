#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "p3o/cli.hpp"
#include "p3o/dataset.hpp"
#include "p3o/json_io.hpp"

using namespace p3o;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "p3o");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string data(const std::string& name) { return std::string(P3O_DATA_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "p3o_cli_test" / name;
  fs::create_directories(p.parent_path());
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help, version and usage errors") {
  CHECK(cli({"--help"}).code == 0);
  const Run v = cli({"--version"});
  CHECK(v.code == 0);
  CHECK_FALSE(v.out.empty());
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"simulate", data("identity_model.json")}).code == 2);
  CHECK(cli({"p3o"}).code == 2);
}

TEST_CASE("validate") {
  const Run r = cli({"validate", data("identity_model.json")});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("ok: S=2 O=2 A=2", 0) == 0);
  CHECK(cli({"validate", "/nonexistent/model.json"}).code == 2);
  const fs::path junk = scratch("junk.json");
  write(junk, "{ not json");
  CHECK(cli({"validate", junk.string()}).code == 2);
  // Well-formed JSON with a broken probability row is a validation failure.
  json m = read_json_file(data("identity_model.json"));
  m["mu1"] = {0.7, 0.7};
  const fs::path bad = scratch("bad_model.json");
  write(bad, m.dump());
  const Run b = cli({"validate", bad.string()});
  CHECK(b.code == 1);
  CHECK(b.err.find("mu1") != std::string::npos);
}

TEST_CASE("simulate writes a loadable dataset") {
  const fs::path out = scratch("sim.jsonl");
  const Run r = cli({"simulate", data("identity_model.json"), data("identity_behavior.json"), "--n", "25",
                     "--seed", "4", "--out", out.string()});
  REQUIRE(r.code == 0);
  const OfflineDataset d = load_dataset(out.string());
  CHECK(d.size() == 25);
  CHECK(d.seed == 4);
}

TEST_CASE("identify-check") {
  const Run r = cli({"identify-check", data("identity_model.json"), data("identity_behavior.json"),
                     data("identity_uniform_policy.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("policy 0: J=") != std::string::npos);
  CHECK(r.out.find("max gap") != std::string::npos);
  const Run s = cli({"identify-check", data("benchmark_model.json"), data("benchmark_behavior.json"),
                     data("benchmark_policies.json")});
  REQUIRE(s.code == 0);
  CHECK(s.out.find("policy 4: J=") != std::string::npos);
}

TEST_CASE("p3o subcommand writes its report") {
  const fs::path dir = scratch("p3o_run");
  fs::remove_all(dir);
  fs::create_directories(dir);
  json cfg = {{"model", data("benchmark_model.json")},
              {"behavior", data("benchmark_behavior.json")},
              {"policy_set", {{"path", data("benchmark_policies.json")}, {"l_pi", 5.0}}},
              {"features", {{"M_B", 3.0}}},
              {"grid", {{"perturbations", 4}}},
              {"n", 400},
              {"seed", 3},
              {"output_dir", "out"}};
  write(dir / "cfg.json", cfg.dump());
  const Run r = cli({"p3o", "--config", (dir / "cfg.json").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "out" / "p3o_report.json"));
  CHECK(fs::exists(dir / "out" / "p3o_table.txt"));
  const json rep = read_json_file((dir / "out" / "p3o_report.json").string());
  CHECK(rep.at("result").at("policies").size() == 5);

  cfg["typo"] = 1;
  write(dir / "bad.json", cfg.dump());
  CHECK(cli({"p3o", (dir / "bad.json").string()}).code == 2);
  fs::remove_all(dir);
}

}
