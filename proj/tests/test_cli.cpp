// End-to-end checks of the twinboot CLI surface: run, sweep, report,
// exit codes and the emitted file set.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code;
  std::string output;
};

CmdResult run_cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "twinboot_cli_capture.txt";
  const std::string cmd =
      std::string(TWINBOOT_BIN) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(out);
  return {WEXITSTATUS(status), ss.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("run subcommand writes the artifact set and exits zero") {
  const fs::path dir = fresh_dir("twinboot_cli_run");
  const CmdResult res = run_cli("run --preset figure1 --seed 7 --out " +
                                dir.string());
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "seed_7/history.csv"));
  CHECK(fs::exists(dir / "seed_7/summary.json"));
  CHECK(fs::exists(dir / "seed_7/weights.csv"));
  // history has the mandatory header
  std::ifstream in(dir / "seed_7/history.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("epoch,step,twin1_loss,twin2_loss", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("run honors --set overrides and multiple seeds") {
  const fs::path dir = fresh_dir("twinboot_cli_set");
  const CmdResult res = run_cli(
      "run --preset figure1 --seeds 1..3 --set epochs=2 --set twin_boot=false "
      "--out " + dir.string());
  CHECK(res.exit_code == 0);
  for (int s = 1; s <= 3; ++s) {
    const fs::path summary = dir / ("seed_" + std::to_string(s)) /
                             "summary.json";
    REQUIRE(fs::exists(summary));
    std::ifstream in(summary);
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["config"]["epochs"] == 2);
    CHECK(j["config"]["twin_boot"] == false);
  }
  fs::remove_all(dir);
}

TEST_CASE("invalid input fails with a machine-readable error line") {
  const CmdResult bad_key =
      run_cli("run --preset figure1 --set not_a_key=1 --out /tmp/x");
  CHECK(bad_key.exit_code != 0);
  CHECK(bad_key.output.find("error: {\"error\":") != std::string::npos);

  const CmdResult bad_preset = run_cli("run --preset figure9");
  CHECK(bad_preset.exit_code != 0);

  const CmdResult bad_axis = run_cli(
      "sweep --preset figure3 --axis bogus --values 1,2 --seeds 1 --out /tmp/x");
  CHECK(bad_axis.exit_code != 0);
  CHECK(bad_axis.output.find("valid axes") != std::string::npos);
}

TEST_CASE("sweep and report close the loop") {
  const fs::path dir = fresh_dir("twinboot_cli_sweep");
  const CmdResult sweep = run_cli(
      "sweep --preset figure3 --axis dataset_size --values 50,100 "
      "--seeds 1..2 --set epochs=4 --out " + dir.string());
  CHECK(sweep.exit_code == 0);
  REQUIRE(fs::exists(dir / "sweep.csv"));
  std::ifstream in(dir / "sweep.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "axis_value,sigma_mean,sigma_std,sigma_theory,n_seeds");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 2);

  // report over run outputs
  const fs::path run_dir = fresh_dir("twinboot_cli_report");
  CHECK(run_cli("run --preset figure1 --seeds 1..3 --set epochs=2 --out " +
                run_dir.string())
            .exit_code == 0);
  const CmdResult rep = run_cli("report --in " + run_dir.string());
  CHECK(rep.exit_code == 0);
  CHECK(rep.output.find("mode: twin-boot") != std::string::npos);
  CHECK(rep.output.find("final_sigma_avg") != std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(run_dir);
}

TEST_CASE("config file plus flag override, flags win") {
  const fs::path dir = fresh_dir("twinboot_cli_cfg");
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "cfg.json";
  {
    const CmdResult seeded = run_cli("run --preset figure1 --seed 2 --out " +
                                     (dir / "seeded").string());
    REQUIRE(seeded.exit_code == 0);
    std::ifstream in(dir / "seeded/seed_2/summary.json");
    nlohmann::json j = nlohmann::json::parse(in);
    nlohmann::json cfg = j["config"];
    cfg["epochs"] = 4;
    std::ofstream out(cfg_path);
    out << cfg.dump();
  }
  const CmdResult res = run_cli("run --config " + cfg_path.string() +
                                " --set epochs=1 --seed 2 --out " +
                                (dir / "o").string());
  CHECK(res.exit_code == 0);
  std::ifstream in(dir / "o/seed_2/summary.json");
  const nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["config"]["epochs"] == 1);  // the flag beat the file
  fs::remove_all(dir);
}
