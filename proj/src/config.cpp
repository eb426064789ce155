#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cardioinfer/experiment.hpp"

namespace cardioinfer {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void config_fail(const std::string& field,
                              const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) config_fail(where.empty() ? key : where + "." + key,
                            "unknown key");
  }
}

double get_num(const json& j, const std::string& field) {
  if (!j.is_number()) config_fail(field, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) config_fail(field, "expected an integer");
  return j.get<int>();
}

Eigen::Vector3d get_vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    config_fail(field, "expected an array of 3 numbers");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v[i] = get_num(j[i], field);
  return v;
}

void parse_stage(const json& j, const std::string& where, BoConfig* cfg) {
  check_keys(j, where,
             {"budget", "n_init", "acquisition", "xi", "n_acq_starts",
              "hyper_refit_period"});
  if (j.contains("budget")) cfg->budget = get_int(j["budget"], where);
  if (j.contains("n_init")) cfg->n_init = get_int(j["n_init"], where);
  if (j.contains("acquisition")) {
    const json& a = j["acquisition"];
    if (a == "ei") {
      cfg->acquisition = AcquisitionKind::EI;
    } else if (a == "aei") {
      cfg->acquisition = AcquisitionKind::AugmentedEI;
    } else {
      config_fail(where + ".acquisition", "expected \"ei\" or \"aei\"");
    }
  }
  if (j.contains("xi")) cfg->xi = get_num(j["xi"], where + ".xi");
  if (j.contains("n_acq_starts")) {
    cfg->n_acq_starts = get_int(j["n_acq_starts"], where + ".n_acq_starts");
  }
  if (j.contains("hyper_refit_period")) {
    cfg->hyper_refit_period =
        get_int(j["hyper_refit_period"], where + ".hyper_refit_period");
  }
}

}  // namespace

RunConfig::RunConfig() : electrodes(LeadConfig::default_torso().electrodes) {}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j, "",
             {"seed", "out_dir", "mesh", "electrodes", "space", "ecg",
              "isomap_k", "noise_std", "observation_noise_std", "n_mc",
              "stage1", "stage2"});

  RunConfig cfg;
  if (!j.contains("seed")) {
    throw ConfigError("config field 'seed' is required");
  }
  if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) {
    config_fail("seed", "expected a non-negative integer");
  }
  cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.has_seed = true;
  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) config_fail("out_dir", "expected a string");
    cfg.out_dir = j["out_dir"].get<std::string>();
  }

  if (j.contains("mesh")) {
    const json& m = j["mesh"];
    check_keys(m, "mesh", {"file", "synthetic"});
    if (m.contains("file") == m.contains("synthetic")) {
      config_fail("mesh", "expected exactly one of 'file' or 'synthetic'");
    }
    if (m.contains("file")) {
      if (!m["file"].is_string()) config_fail("mesh.file", "expected a string");
      cfg.mesh_file = m["file"].get<std::string>();
    } else {
      const json& s = m["synthetic"];
      check_keys(s, "mesh.synthetic",
                 {"n_theta", "n_phi", "inner_radii", "wall_thickness",
                  "n_layers", "seed"});
      SyntheticMeshSpec& spec = cfg.synthetic;
      if (s.contains("n_theta")) {
        spec.n_theta = get_int(s["n_theta"], "mesh.synthetic.n_theta");
      }
      if (s.contains("n_phi")) {
        spec.n_phi = get_int(s["n_phi"], "mesh.synthetic.n_phi");
      }
      if (s.contains("inner_radii")) {
        spec.inner_radii =
            get_vec3(s["inner_radii"], "mesh.synthetic.inner_radii");
      }
      if (s.contains("wall_thickness")) {
        spec.wall_thickness =
            get_num(s["wall_thickness"], "mesh.synthetic.wall_thickness");
      }
      if (s.contains("n_layers")) {
        spec.n_layers = get_int(s["n_layers"], "mesh.synthetic.n_layers");
      }
      if (s.contains("seed")) {
        spec.seed = static_cast<std::uint64_t>(
            get_int(s["seed"], "mesh.synthetic.seed"));
      }
    }
  }

  if (j.contains("electrodes")) {
    const json& e = j["electrodes"];
    if (!e.is_object()) config_fail("electrodes", "expected an object");
    check_keys(e, "electrodes",
               {"RA", "LA", "LL", "V1", "V2", "V3", "V4", "V5", "V6"});
    for (int i = 0; i < kNumElectrodes; ++i) {
      const std::string name = kElectrodeNames[i];
      if (!e.contains(name)) {
        config_fail("electrodes." + name, "missing electrode");
      }
      cfg.electrodes[i] = get_vec3(e[name], "electrodes." + name);
    }
  }

  if (j.contains("space")) {
    const json& s = j["space"];
    check_keys(s, "space", {"n_stimuli", "endo_reference", "aniso_reference"});
    if (s.contains("n_stimuli")) {
      cfg.n_stimuli = get_int(s["n_stimuli"], "space.n_stimuli");
      if (cfg.n_stimuli < 1) config_fail("space.n_stimuli", "must be >= 1");
    }
    if (s.contains("endo_reference")) {
      const json& er = s["endo_reference"];
      if (!er.is_array() || er.size() != 2) {
        config_fail("space.endo_reference", "expected an array of 2 numbers");
      }
      cfg.endo_reference[0] = get_num(er[0], "space.endo_reference");
      cfg.endo_reference[1] = get_num(er[1], "space.endo_reference");
    }
    if (s.contains("aniso_reference")) {
      cfg.aniso_reference =
          get_num(s["aniso_reference"], "space.aniso_reference");
    }
  }

  if (j.contains("ecg")) {
    const json& e = j["ecg"];
    check_keys(e, "ecg", {"duration_ms", "dt_ms", "template_sigma_ms"});
    if (e.contains("duration_ms")) {
      cfg.duration_ms = get_num(e["duration_ms"], "ecg.duration_ms");
    }
    if (e.contains("dt_ms")) cfg.dt_ms = get_num(e["dt_ms"], "ecg.dt_ms");
    if (e.contains("template_sigma_ms")) {
      cfg.template_sigma_ms =
          get_num(e["template_sigma_ms"], "ecg.template_sigma_ms");
    }
  }

  if (j.contains("isomap_k")) cfg.isomap_k = get_int(j["isomap_k"], "isomap_k");
  if (j.contains("noise_std")) {
    cfg.noise_std = get_num(j["noise_std"], "noise_std");
  }
  if (j.contains("observation_noise_std")) {
    cfg.observation_noise_std =
        get_num(j["observation_noise_std"], "observation_noise_std");
  }
  if (j.contains("n_mc")) {
    cfg.n_mc = get_int(j["n_mc"], "n_mc");
    if (cfg.n_mc < 1) config_fail("n_mc", "must be >= 1");
  }

  if (j.contains("stage1")) parse_stage(j["stage1"], "stage1", &cfg.stage1);
  if (j.contains("stage2")) parse_stage(j["stage2"], "stage2", &cfg.stage2);

  // Defaults scale with the parameter dimension; seeds derive from the
  // run seed so the stages use distinct streams.
  const int p = 5 + 2 * cfg.n_stimuli;
  if (cfg.stage1.budget == 0) cfg.stage1.budget = 10 * p;
  if (cfg.stage1.n_init == 0) cfg.stage1.n_init = 2 * p;
  if (cfg.stage2.budget == 0) cfg.stage2.budget = 4 * p;
  if (cfg.stage2.n_init == 0) cfg.stage2.n_init = p;
  cfg.stage1.seed = derive_seed(cfg.seed, /*tag=*/1);
  cfg.stage2.seed = derive_seed(cfg.seed, /*tag=*/2);

  cfg.stage1.validate(p);
  cfg.stage2.validate(p);
  if (cfg.isomap_k < 1) config_fail("isomap_k", "must be >= 1");
  if (!(cfg.duration_ms > 0.0) || !(cfg.dt_ms > 0.0) ||
      !(cfg.template_sigma_ms > 0.0)) {
    config_fail("ecg", "durations must be positive");
  }
  return cfg;
}

namespace {

ordered_json stage_json(const BoConfig& cfg) {
  ordered_json s;
  s["budget"] = cfg.budget;
  s["n_init"] = cfg.n_init;
  s["acquisition"] =
      cfg.acquisition == AcquisitionKind::EI ? "ei" : "aei";
  s["xi"] = cfg.xi;
  s["n_acq_starts"] = cfg.n_acq_starts;
  s["hyper_refit_period"] = cfg.hyper_refit_period;
  return s;
}

}  // namespace

std::string RunConfig::canonical_json() const {
  // out_dir is deliberately left out: it cannot affect the results, and
  // hashing it would make re-runs into different directories look like
  // different experiments.
  ordered_json j;
  j["seed"] = seed;
  if (!mesh_file.empty()) {
    j["mesh"]["file"] = mesh_file;
  } else {
    ordered_json s;
    s["n_theta"] = synthetic.n_theta;
    s["n_phi"] = synthetic.n_phi;
    s["inner_radii"] = {synthetic.inner_radii[0], synthetic.inner_radii[1],
                        synthetic.inner_radii[2]};
    s["wall_thickness"] = synthetic.wall_thickness;
    s["n_layers"] = synthetic.n_layers;
    s["seed"] = synthetic.seed;
    j["mesh"]["synthetic"] = s;
  }
  ordered_json e;
  for (int i = 0; i < kNumElectrodes; ++i) {
    e[kElectrodeNames[i]] = {electrodes[i][0], electrodes[i][1],
                             electrodes[i][2]};
  }
  j["electrodes"] = e;
  j["space"]["n_stimuli"] = n_stimuli;
  j["space"]["endo_reference"] = {endo_reference[0], endo_reference[1]};
  j["space"]["aniso_reference"] = aniso_reference;
  j["ecg"]["duration_ms"] = duration_ms;
  j["ecg"]["dt_ms"] = dt_ms;
  j["ecg"]["template_sigma_ms"] = template_sigma_ms;
  j["isomap_k"] = isomap_k;
  j["noise_std"] = noise_std;
  j["observation_noise_std"] = observation_noise_std;
  j["n_mc"] = n_mc;
  j["stage1"] = stage_json(stage1);
  j["stage2"] = stage_json(stage2);
  return j.dump();
}

HeartMesh make_mesh(const RunConfig& cfg) {
  if (!cfg.mesh_file.empty()) {
    std::ifstream in(cfg.mesh_file, std::ios::binary);
    if (!in) {
      throw ConfigError("mesh file '" + cfg.mesh_file + "' cannot be opened");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return load_mesh(text.str());
  }
  return generate_ellipsoid_shell(cfg.synthetic.n_theta, cfg.synthetic.n_phi,
                                  cfg.synthetic.inner_radii,
                                  cfg.synthetic.wall_thickness,
                                  cfg.synthetic.n_layers, cfg.synthetic.seed);
}

LeadConfig make_lead_config(const RunConfig& cfg) {
  LeadConfig lead;
  lead.electrodes = cfg.electrodes;
  lead.duration_ms = cfg.duration_ms;
  lead.dt_ms = cfg.dt_ms;
  lead.template_sigma_ms = cfg.template_sigma_ms;
  return lead;
}

}  // namespace cardioinfer
