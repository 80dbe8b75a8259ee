#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "arefs/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"weighted-flow acceleration toolkit"};
  app.get_formatter()->column_width(26);

  std::string op, config_path, outdir = "out", resolution;
  long long seed = -1;
  std::string names;
  for (const auto& n : arefs::scenario_names()) names += "\n  " + n;
  app.add_option("operation", op,
                 "scenario name, or 'validate' to check a config" + names)
      ->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", outdir, "output directory (default: out)");
  app.add_option("--resolution", resolution, "override resolution, e.g. 256x256");

  CLI11_PARSE(app, argc, argv);

  nlohmann::json cfg;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config " << config_path << "\n";
      return 2;
    }
    try {
      in >> cfg;
    } catch (const std::exception& e) {
      std::cerr << "config parse error: " << e.what() << "\n";
      return 2;
    }
  }
  if (seed >= 0) cfg["seed"] = uint64_t(seed);
  if (!resolution.empty()) {
    auto x = resolution.find('x');
    int rx = std::stoi(resolution.substr(0, x));
    int ry = x == std::string::npos ? rx : std::stoi(resolution.substr(x + 1));
    if (rx != ry) {
      std::cerr << "only square resolutions are supported\n";
      return 2;
    }
    cfg["resolution"] = rx;
  }

  try {
    if (op == "validate") {
      std::string name = cfg.value("scenario", "");
      auto errs = arefs::validate_config(name, cfg);
      if (errs.empty()) {
        std::cout << "ok\n";
        return 0;
      }
      for (const auto& e : errs) std::cerr << e << "\n";
      return 1;
    }
    auto manifest = arefs::run_scenario(op, cfg, outdir);
    std::cout << manifest["summary"].dump(2) << "\n";
    std::cout << "wrote " << outdir << "/manifest.json\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
