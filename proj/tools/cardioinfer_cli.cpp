// Command-line front end: recover / compare-manifold / embed / simulate /
// plot. Exit codes: 0 success, 2 configuration or input error, 3 runtime
// failure.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cardioinfer/experiment.hpp"

namespace {

using cardioinfer::ConfigError;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

json load_config_json(const std::string& config_path) {
  if (config_path.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_file(config_path));
  } catch (const json::exception& e) {
    throw ConfigError("config '" + config_path + "' is not valid JSON: " +
                      e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config '" + config_path + "' must be a JSON object");
  }
  return j;
}

void apply_overrides(json* j, const std::vector<std::string>& sets,
                     std::optional<std::uint64_t> seed,
                     const std::string& out_dir) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    std::string path = "/" + kv.substr(0, eq);
    for (char& c : path) {
      if (c == '.') c = '/';
    }
    const std::string value = kv.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;  // unquoted strings pass through
    }
    (*j)[json::json_pointer(path)] = parsed;
  }
  if (seed.has_value()) (*j)["seed"] = *seed;
  if (!out_dir.empty()) (*j)["out_dir"] = out_dir;
}

Eigen::VectorXd parse_theta(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ConfigError("--theta component '" + tok + "' is not a number");
    }
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size()) {
      throw ConfigError("--theta component '" + tok + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError("--theta is empty");
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<int>(values.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cardioinfer: simulation-based cardiac parameter inference"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string theta_text;
  std::uint64_t seed_value = 0;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "JSON run configuration");
  auto* seed_opt = app.add_option("--seed", seed_value, "override the seed");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_option("--set", sets,
                 "dotted-path config override, e.g. stage1.budget=40");

  auto* recover =
      app.add_subcommand("recover", "two-stage fit against a synthetic truth");
  auto* compare = app.add_subcommand(
      "compare-manifold", "stage-1 search: manifold versus Cartesian");
  auto* embed = app.add_subcommand("embed", "write the isomap chart as CSV");
  auto* simulate =
      app.add_subcommand("simulate", "forward-simulate one parameter point");
  simulate->add_option("--theta", theta_text,
                       "comma-separated constrained parameters");
  auto* plot =
      app.add_subcommand("plot", "render SVG figures for a run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json j = load_config_json(config_path);
    apply_overrides(&j, sets,
                    seed_opt->count() > 0
                        ? std::optional<std::uint64_t>(seed_value)
                        : std::nullopt,
                    out_dir);

    if (plot->parsed()) {
      std::string dir = out_dir;
      if (dir.empty() && j.contains("out_dir") && j["out_dir"].is_string()) {
        dir = j["out_dir"].get<std::string>();
      }
      if (dir.empty()) {
        throw ConfigError("plot needs --out or an out_dir in the config");
      }
      cardioinfer::emit_plots(dir);
      std::cout << "wrote figures to " << dir << "\n";
      return 0;
    }

    const cardioinfer::RunConfig cfg =
        cardioinfer::RunConfig::from_json_text(j.dump());

    if (recover->parsed()) {
      const cardioinfer::RecoveryReport rep = cardioinfer::run_recovery(cfg);
      std::cout << "prior_mean_mse " << rep.prior_mean_mse << "\n"
                << "final_mse " << rep.final_mse << "\n"
                << "mse_ratio "
                << (rep.prior_mean_mse > 0.0
                        ? rep.final_mse / rep.prior_mean_mse
                        : 0.0)
                << "\n"
                << "wall_clock_s " << rep.wall_clock_s << "\n";
      if (!cfg.out_dir.empty()) {
        std::cout << "artifacts in " << cfg.out_dir << "\n";
      }
    } else if (compare->parsed()) {
      const cardioinfer::ComparisonResult res =
          cardioinfer::run_manifold_comparison(cfg);
      std::cout << "manifold_best_mse " << res.manifold.best_value << "\n"
                << "cartesian_best_mse " << res.cartesian.best_value << "\n";
      if (!cfg.out_dir.empty()) {
        std::cout << "artifacts in " << cfg.out_dir << "\n";
      }
    } else if (embed->parsed()) {
      cardioinfer::write_embedding(cfg);
      std::cout << "wrote embedding.csv to " << cfg.out_dir << "\n";
    } else if (simulate->parsed()) {
      std::optional<Eigen::VectorXd> theta;
      if (!theta_text.empty()) theta = parse_theta(theta_text);
      cardioinfer::write_simulation(cfg, theta);
      std::cout << "wrote simulated_ecg.csv to " << cfg.out_dir << "\n";
    }
    return 0;
  } catch (const cardioinfer::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cardioinfer::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cardioinfer::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}
