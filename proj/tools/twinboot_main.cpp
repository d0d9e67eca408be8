// twinboot CLI: run presets, sweep config axes, aggregate run records.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twinboot/experiment.hpp"

namespace {

twinboot::ExperimentConfig resolve_config(
    const std::string& preset, const std::string& config_file,
    const std::vector<std::string>& overrides) {
  twinboot::ExperimentConfig cfg = twinboot::preset_config(preset);
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) {
      throw std::runtime_error("cannot open config file: " + config_file);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = twinboot::config_from_json_text(buf.str());
  }
  // flags win over the config file
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    twinboot::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::vector<double> parse_values(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) {
    throw std::invalid_argument("no values in '" + spec + "'");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-Bootstrap Gradient Descent experiments"};
  app.require_subcommand(1);

  std::string preset = "custom";
  std::string config_file;
  std::string seed_spec = "0";
  std::string out_dir = "out";
  std::vector<std::string> overrides;

  CLI::App* run = app.add_subcommand("run", "run one experiment per seed");
  run->add_option("--preset", preset, "named preset");
  run->add_option("--config", config_file, "JSON config file");
  run->add_option("--seed,--seeds", seed_spec, "seed, list a,b,c or range a..b");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--set", overrides, "config override key=value");

  std::string axis;
  std::string values_spec;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep one config axis");
  sweep->add_option("--preset", preset, "named preset");
  sweep->add_option("--config", config_file, "JSON config file");
  sweep->add_option("--axis", axis, "config field to sweep")->required();
  sweep->add_option("--values", values_spec, "comma-separated values")->required();
  sweep->add_option("--seeds", seed_spec, "seed list or range");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--set", overrides, "config override key=value");

  std::string in_dir;
  CLI::App* report = app.add_subcommand("report", "aggregate run records");
  report->add_option("--in", in_dir, "directory containing summary.json files")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const twinboot::ExperimentConfig cfg =
          resolve_config(preset, config_file, overrides);
      const auto seeds = twinboot::parse_seed_spec(seed_spec);
      const auto records = twinboot::run_experiment(cfg, seeds);
      for (const auto& rec : records) {
        twinboot::emit_run_outputs(out_dir, cfg, rec);
        std::cout << "seed " << rec.seed << ": "
                  << (rec.diverged ? "DIVERGED" : "ok");
        if (!rec.diverged) {
          for (const auto& [name, value] : rec.metrics) {
            std::cout << " " << name << "=" << twinboot::format_double(value);
          }
        }
        std::cout << "\n";
      }
      std::cout << "wrote " << records.size() << " run(s) to " << out_dir
                << "\n";
      return 0;
    }
    if (sweep->parsed()) {
      const twinboot::ExperimentConfig cfg =
          resolve_config(preset, config_file, overrides);
      const auto seeds = twinboot::parse_seed_spec(seed_spec);
      const auto values = parse_values(values_spec);
      const twinboot::SweepTable table =
          twinboot::run_sweep(cfg, axis, values, seeds);
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      const std::string path =
          (std::filesystem::path(out_dir) / "sweep.csv").string();
      twinboot::write_sweep_csv(path, table);
      std::cout << "axis=" << table.axis << "\n";
      for (const auto& p : table.points) {
        std::cout << "  " << twinboot::format_double(p.axis_value)
                  << ": sigma=" << twinboot::format_double(p.sigma_mean)
                  << " +/- " << twinboot::format_double(p.sigma_std)
                  << " theory=" << twinboot::format_double(p.sigma_theory)
                  << " (n=" << p.n_seeds << ")\n";
      }
      std::cout << "wrote " << path << "\n";
      return 0;
    }
    if (report->parsed()) {
      const auto summary = twinboot::aggregate_report(in_dir);
      std::cout << twinboot::render_report(summary);
      return 0;
    }
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << "error: " << err.dump() << "\n";
    return 1;
  }
  return 2;
}
