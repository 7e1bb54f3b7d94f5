// End-to-end checks of the command-line driver: exit codes, report fields,
// and byte-determinism of report.json for a fixed seed.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifndef DFC_CLI_PATH
#define DFC_CLI_PATH "dfc"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path sandbox() {
  fs::path p = fs::temp_directory_path() / "dfc_cli_test";
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DFC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

const char* kBaselineScenario = R"({
  "schema_version": 1,
  "flux": {"f": {"type": "builtin", "name": "burgers"},
           "g": {"type": "builtin", "name": "burgers_shifted", "shift": 1.0}},
  "T": 2.0,
  "target": {"T": 2.0, "R1": 1.4142135623730951, "R2": 0.0,
             "window": [0.0, 1.4142135623730951],
             "y": {"breakpoints": [], "values": [0.0]}},
  "knobs": {"dx": 0.004, "tol": 0.05, "seed": 7}
})";

}  // namespace

TEST_CASE("cli: check-reachable on the baseline element exits 0 with xi0/tau0") {
  fs::path dir = sandbox();
  write_file(dir / "step1.json", kBaselineScenario);
  const int rc = run_cli("check-reachable --scenario " + (dir / "step1.json").string() +
                         " --out " + (dir / "out_cr").string());
  CHECK(rc == 0);
  json rep = read_json(dir / "out_cr" / "report.json");
  CHECK(rep.at("pass").get<bool>());
  CHECK(rep.contains("xi0"));
  CHECK(rep.contains("tau0"));
  CHECK(fs::exists(dir / "out_cr" / "s_curve.csv"));
}

TEST_CASE("cli: malformed y exits 2") {
  fs::path dir = sandbox();
  write_file(dir / "bad.json", R"({
    "schema_version": 1,
    "flux": {"f": {"type": "builtin", "name": "burgers"},
             "g": {"type": "builtin", "name": "burgers_shifted"}},
    "T": 2.0,
    "target": {"T": 2.0, "R1": 1.0, "R2": 0.5, "window": [-1.0, 2.0],
               "y": {"breakpoints": [0.0], "values": [2.0, -1.0]}}
  })");
  const int rc = run_cli("check-reachable --scenario " + (dir / "bad.json").string() + " --out " +
                         (dir / "out_bad").string());
  CHECK(rc == 2);
}

TEST_CASE("cli: missing scenario field exits 2, infeasible math exits 3") {
  fs::path dir = sandbox();
  write_file(dir / "nofield.json", R"({"schema_version": 1, "T": 1.0})");
  CHECK(run_cli("backward --scenario " + (dir / "nofield.json").string() + " --out " +
                (dir / "o1").string()) == 2);
  // a rejected element makes realize_target infeasible
  write_file(dir / "rej.json", R"({
    "schema_version": 1,
    "flux": {"f": {"type": "builtin", "name": "burgers"},
             "g": {"type": "builtin", "name": "burgers_shifted"}},
    "T": 2.0,
    "target": {"T": 2.0, "R1": 4.0, "R2": 0.5, "window": [-1.0, 5.0],
               "y": {"breakpoints": [4.0], "values": [-1.0, 4.5]}}
  })");
  CHECK(run_cli("backward --scenario " + (dir / "rej.json").string() + " --out " +
                (dir / "o2").string()) == 3);
}

TEST_CASE("cli: verify-roundtrip passes and report.json is deterministic") {
  fs::path dir = sandbox();
  // a planted 6-piece target
  write_file(dir / "case1.json", R"({
    "schema_version": 1,
    "flux": {"f": {"type": "builtin", "name": "burgers"},
             "g": {"type": "builtin", "name": "burgers_shifted"}},
    "T": 2.0,
    "target": {"T": 2.0, "R1": 1.0, "R2": 0.5, "window": [-1.3, 2.4],
               "y": {"breakpoints": [-0.9, -0.2, 1.0, 1.6, 2.0],
                     "values": [-1.3, -1.0, -0.55, 0.7, 0.95, 1.3]}},
    "knobs": {"dx": 0.004, "tol": 0.05, "seed": 11}
  })");
  const std::string scenario = (dir / "case1.json").string();
  CHECK(run_cli("verify-roundtrip --scenario " + scenario + " --out " + (dir / "r1").string()) ==
        0);
  CHECK(run_cli("verify-roundtrip --scenario " + scenario + " --out " + (dir / "r2").string()) ==
        0);
  json a = read_json(dir / "r1" / "report.json");
  json b = read_json(dir / "r2" / "report.json");
  CHECK(a.at("roundtrip_l1").get<double>() < 0.05);
  a.erase("generated_at");
  b.erase("generated_at");
  CHECK(a.dump() == b.dump());  // identical scenario + seed => identical report
}

TEST_CASE("cli: backward emits u0, fan and samples") {
  fs::path dir = sandbox();
  write_file(dir / "case1b.json", R"({
    "schema_version": 1,
    "flux": {"f": {"type": "builtin", "name": "burgers"},
             "g": {"type": "builtin", "name": "burgers_shifted"}},
    "T": 2.0,
    "target": {"T": 2.0, "R1": 1.0, "R2": 0.5, "window": [-1.0, 2.0],
               "y": {"breakpoints": [1.0], "values": [-1.0, 0.6]}}
  })");
  CHECK(run_cli("backward --scenario " + (dir / "case1b.json").string() + " --out " +
                (dir / "bw").string()) == 0);
  CHECK(fs::exists(dir / "bw" / "u0.json"));
  CHECK(fs::exists(dir / "bw" / "fan.json"));
  CHECK(fs::exists(dir / "bw" / "samples.csv"));
  json rep = read_json(dir / "bw" / "report.json");
  CHECK(rep.at("residuals").at("rh_residual_max").get<double>() < 1e-8);
  json u0 = read_json(dir / "bw" / "u0.json");
  CHECK(u0.contains("pieces"));
  CHECK(u0.at("pieces").front().at("from") == "-inf");
}

TEST_CASE("cli: forward and value subcommands") {
  fs::path dir = sandbox();
  write_file(dir / "fw.json", R"({
    "schema_version": 1,
    "flux": {"f": {"type": "builtin", "name": "burgers"},
             "g": {"type": "builtin", "name": "burgers_shifted"}},
    "T": 1.0,
    "u0": {"breakpoints": [0.0], "values": [0.0, 0.0]},
    "probes": [[0.5, 1.0], [-0.5, 1.0]],
    "knobs": {"dx": 0.004}
  })");
  CHECK(run_cli("forward --scenario " + (dir / "fw.json").string() + " --out " +
                (dir / "fo").string()) == 0);
  CHECK(fs::exists(dir / "fo" / "snapshots.csv"));
  CHECK(run_cli("value --scenario " + (dir / "fw.json").string() + " --out " +
                (dir / "vo").string()) == 0);
  json rep = read_json(dir / "vo" / "report.json");
  CHECK(rep.at("samples").size() == 2);
}

TEST_CASE("cli: exact-control and optimal-control run end to end") {
  fs::path dir = sandbox();
  write_file(dir / "ec.json", R"({
    "schema_version": 1,
    "flux": {"f": {"type": "builtin", "name": "burgers"},
             "g": {"type": "builtin", "name": "burgers_shifted"}},
    "T": 2.0,
    "target": {"T": 2.0, "R1": 1.0, "R2": 0.5, "window": [-1.0, 2.0],
               "y": {"breakpoints": [1.0], "values": [-1.0, 0.6]}},
    "outer_data": {"breakpoints": [0.0], "values": [0.4, 0.4]},
    "B": [-4.0, 4.0], "C": [-3.0, 3.0],
    "knobs": {"dx": 0.006, "tol": 0.08}
  })");
  CHECK(run_cli("exact-control --scenario " + (dir / "ec.json").string() + " --out " +
                (dir / "eo").string()) == 0);
  json rep = read_json(dir / "eo" / "report.json");
  CHECK(rep.at("buffers_used").get<bool>());
  CHECK(rep.at("lambda1").get<double>() < 0.0);

  write_file(dir / "oc.json", R"({
    "schema_version": 1,
    "flux": {"f": {"type": "builtin", "name": "burgers"},
             "g": {"type": "builtin", "name": "burgers_shifted"}},
    "T": 2.0,
    "target_k": {"k": {"breakpoints": [0.0], "values": [0.0, 0.0]}, "c": 1.0},
    "knobs": {"dx": 0.006, "knots": 6, "starts": 3, "sweeps": 8, "seed": 3}
  })");
  CHECK(run_cli("optimal-control --scenario " + (dir / "oc.json").string() + " --out " +
                (dir / "oo").string()) == 0);
  json orep = read_json(dir / "oo" / "report.json");
  CHECK(orep.at("J").get<double>() <= orep.at("M1").get<double>() + 1e-6);
  CHECK(fs::exists(dir / "oo" / "trace.csv"));
}
