#include "exp_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rspread::tools {

using nlohmann::json;

namespace {

const std::set<std::string> kExperiments = {
    "trajectory", "k_sweep", "mc_validate", "oracle_validate", "allocation",
    "timing_sweep"};

const std::set<std::string> kCommonKeys = {
    "schema_version", "experiment", "seed", "threads", "out_dir", "decimate"};

std::set<std::string> allowed_keys(const std::string& experiment) {
  std::set<std::string> keys = kCommonKeys;
  auto add = [&keys](std::initializer_list<const char*> names) {
    for (const char* name : names) keys.insert(name);
  };
  if (experiment == "trajectory") {
    add({"profile", "n0", "r0", "atom_count", "overshoot"});
  } else if (experiment == "k_sweep") {
    add({"k_grid", "n0", "r0", "atom_count", "mode", "overshoot"});
  } else if (experiment == "mc_validate") {
    add({"profile", "n0", "r0", "atom_count", "replicas", "steps", "write_traces"});
  } else if (experiment == "oracle_validate") {
    add({"instances", "max_nodes", "replicas"});
  } else if (experiment == "allocation") {
    add({"k_grid", "n0", "r0", "atom_count", "mode", "supplies", "granularity",
         "vacc_step", "regions"});
  } else if (experiment == "timing_sweep") {
    add({"k_grid", "n0", "r0", "atom_count", "mode", "vaccines", "timings"});
  }
  return keys;
}

const std::set<std::string> kProfileKeys = {"family", "sigma", "iota", "shape",
                                            "scale", "mode", "atoms"};
const std::set<std::string> kRegionKeys = {"name", "profile", "n0", "r0"};

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (const auto& item : object.items()) {
    if (!allowed.contains(item.key())) {
      throw ConfigError(context.empty() ? item.key() : context + "." + item.key(),
                        "unknown key");
    }
  }
}

template <typename T>
T get_or(const json& object, const std::string& key, const T& fallback,
         const std::string& context = "") {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(context.empty() ? key : context + "." + key, "wrong type");
  }
}

template <typename T>
T require(const json& object, const std::string& key, const std::string& context = "") {
  if (!object.contains(key)) {
    throw ConfigError(context.empty() ? key : context + "." + key, "missing");
  }
  return get_or<T>(object, key, T{}, context);
}

ProfileConfig parse_profile(const json& object, const std::string& context) {
  if (!object.is_object()) throw ConfigError(context, "must be an object");
  reject_unknown_keys(object, kProfileKeys, context);
  ProfileConfig profile;
  profile.family = require<std::string>(object, "family", context);
  if (profile.family == "homogeneous") {
    profile.sigma = require<double>(object, "sigma", context);
    profile.iota = require<double>(object, "iota", context);
  } else if (profile.family == "gamma") {
    profile.shape = require<double>(object, "shape", context);
    if (object.contains("scale")) profile.scale = get_or<double>(object, "scale", 0.0, context);
    profile.mode = get_or<std::string>(object, "mode", "equal", context);
  } else if (profile.family == "explicit") {
    profile.atoms = require<std::vector<std::array<double, 3>>>(object, "atoms", context);
  } else {
    throw ConfigError(context + ".family", "must be homogeneous, gamma or explicit");
  }
  return profile;
}

json profile_to_json(const ProfileConfig& profile) {
  json object;
  object["family"] = profile.family;
  if (profile.family == "homogeneous") {
    object["sigma"] = profile.sigma;
    object["iota"] = profile.iota;
  } else if (profile.family == "gamma") {
    object["shape"] = profile.shape;
    if (profile.scale) object["scale"] = *profile.scale;
    object["mode"] = profile.mode;
  } else {
    object["atoms"] = profile.atoms;
  }
  return object;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& error) {
    throw ConfigError("<document>", std::string("not valid JSON: ") + error.what());
  }
  if (!root.is_object()) throw ConfigError("<document>", "top level must be an object");

  ExperimentConfig config;
  config.schema_version = require<int>(root, "schema_version");
  if (config.schema_version != 1) {
    throw ConfigError("schema_version", "unsupported version (expected 1)");
  }
  config.experiment = require<std::string>(root, "experiment");
  if (!kExperiments.contains(config.experiment)) {
    throw ConfigError("experiment", "unknown experiment kind '" + config.experiment + "'");
  }
  reject_unknown_keys(root, allowed_keys(config.experiment), "");

  config.seed = get_or<count_t>(root, "seed", config.seed);
  config.threads = get_or<unsigned>(root, "threads", config.threads);
  config.out_dir = get_or<std::string>(root, "out_dir", config.out_dir);
  config.decimate = get_or<count_t>(root, "decimate", config.decimate);

  config.n0 = get_or<count_t>(root, "n0", config.n0);
  config.r0 = get_or<double>(root, "r0", config.r0);
  config.atom_count = get_or<count_t>(root, "atom_count", config.atom_count);
  config.overshoot = get_or<count_t>(root, "overshoot", config.overshoot);
  config.mode = get_or<std::string>(root, "mode", config.mode);

  if (root.contains("profile")) config.profile = parse_profile(root.at("profile"), "profile");
  config.k_grid = get_or<std::vector<double>>(root, "k_grid", config.k_grid);

  config.replicas = get_or<count_t>(root, "replicas", config.replicas);
  config.steps = get_or<count_t>(root, "steps", config.steps);
  config.write_traces = get_or<bool>(root, "write_traces", config.write_traces);

  config.instances = get_or<count_t>(root, "instances", config.instances);
  config.max_nodes = get_or<count_t>(root, "max_nodes", config.max_nodes);

  config.supplies = get_or<std::vector<count_t>>(root, "supplies", config.supplies);
  config.granularity = get_or<count_t>(root, "granularity", config.granularity);
  config.vacc_step = get_or<count_t>(root, "vacc_step", config.vacc_step);
  if (root.contains("regions")) {
    const json& regions = root.at("regions");
    if (!regions.is_array()) throw ConfigError("regions", "must be an array");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const std::string context = "regions[" + std::to_string(i) + "]";
      const json& entry = regions.at(i);
      if (!entry.is_object()) throw ConfigError(context, "must be an object");
      reject_unknown_keys(entry, kRegionKeys, context);
      RegionConfig region;
      region.name = require<std::string>(entry, "name", context);
      region.profile = parse_profile(entry.at("profile"), context + ".profile");
      region.n0 = require<count_t>(entry, "n0", context);
      region.r0 = get_or<double>(entry, "r0", 0.0, context);
      config.regions.push_back(std::move(region));
    }
  }

  config.vaccines = get_or<count_t>(root, "vaccines", config.vaccines);
  config.timings = get_or<std::vector<count_t>>(root, "timings", config.timings);

  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  json root;
  root["schema_version"] = config.schema_version;
  root["experiment"] = config.experiment;
  root["seed"] = config.seed;
  root["threads"] = config.threads;
  root["out_dir"] = config.out_dir;
  root["decimate"] = config.decimate;

  const auto allowed = allowed_keys(config.experiment);
  auto put_if = [&](const char* key, const json& value) {
    if (allowed.contains(key)) root[key] = value;
  };
  put_if("n0", config.n0);
  put_if("r0", config.r0);
  put_if("atom_count", config.atom_count);
  put_if("overshoot", config.overshoot);
  put_if("mode", config.mode);
  if (config.profile && allowed.contains("profile")) {
    root["profile"] = profile_to_json(*config.profile);
  }
  put_if("k_grid", config.k_grid);
  if (config.experiment == "mc_validate") {
    root["replicas"] = config.replicas;
    root["steps"] = config.steps;
    root["write_traces"] = config.write_traces;
  }
  if (config.experiment == "oracle_validate") {
    root["replicas"] = config.replicas;
    root["instances"] = config.instances;
    root["max_nodes"] = config.max_nodes;
  }
  if (config.experiment == "allocation") {
    root["supplies"] = config.supplies;
    root["granularity"] = config.granularity;
    root["vacc_step"] = config.vacc_step;
    if (!config.regions.empty()) {
      json regions = json::array();
      for (const auto& region : config.regions) {
        json entry;
        entry["name"] = region.name;
        entry["profile"] = profile_to_json(region.profile);
        entry["n0"] = region.n0;
        entry["r0"] = region.r0;
        regions.push_back(entry);
      }
      root["regions"] = regions;
    }
  }
  if (config.experiment == "timing_sweep") {
    root["vaccines"] = config.vaccines;
    root["timings"] = config.timings;
  }
  return root.dump(2) + "\n";
}

namespace {

void validate_profile(const ProfileConfig& profile, const std::string& context) {
  if (profile.family == "homogeneous") {
    if (!(profile.sigma >= 0.0 && profile.sigma <= 1.0)) {
      throw ConfigError(context + ".sigma", "must be in [0, 1]");
    }
    if (!(profile.iota >= 0.0 && profile.iota <= 1.0)) {
      throw ConfigError(context + ".iota", "must be in [0, 1]");
    }
  } else if (profile.family == "gamma") {
    if (!(profile.shape > 0.0)) throw ConfigError(context + ".shape", "must be > 0");
    if (profile.scale && !(*profile.scale > 0.0)) {
      throw ConfigError(context + ".scale", "must be > 0");
    }
    if (profile.mode != "equal" && profile.mode != "independent") {
      throw ConfigError(context + ".mode", "must be equal or independent");
    }
  } else if (profile.family == "explicit") {
    if (profile.atoms.empty()) throw ConfigError(context + ".atoms", "must not be empty");
    for (const auto& atom : profile.atoms) {
      if (!(atom[0] >= 0.0 && atom[0] <= 1.0) || !(atom[1] >= 0.0 && atom[1] <= 1.0) ||
          !(atom[2] > 0.0)) {
        throw ConfigError(context + ".atoms", "each atom needs s, phi in [0, 1] and w > 0");
      }
    }
  }
}

void require_positive(count_t value, const char* field) {
  if (value == 0) throw ConfigError(field, "must be positive");
}

void require_r0(double r0) {
  if (!(r0 > 0.0)) throw ConfigError("r0", "must be > 0");
}

void require_k_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("k_grid", "must not be empty");
  for (const double k : grid) {
    if (!(k > 0.0)) throw ConfigError("k_grid", "entries must be > 0");
  }
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  const std::string& kind = config.experiment;

  if (kind == "trajectory" || kind == "mc_validate") {
    if (!config.profile) throw ConfigError("profile", "missing");
    validate_profile(*config.profile, "profile");
    if (config.n0 < 2) throw ConfigError("n0", "must be at least 2");
    require_r0(config.r0);
    require_positive(config.atom_count, "atom_count");
  }
  if (kind == "k_sweep" || kind == "timing_sweep") {
    require_k_grid(config.k_grid);
    if (config.n0 < 2) throw ConfigError("n0", "must be at least 2");
    require_r0(config.r0);
    require_positive(config.atom_count, "atom_count");
    if (config.mode != "equal" && config.mode != "independent") {
      throw ConfigError("mode", "must be equal or independent");
    }
  }
  if (kind == "mc_validate") {
    if (config.replicas < 2) throw ConfigError("replicas", "must be at least 2");
    if (config.steps > config.n0) throw ConfigError("steps", "cannot exceed n0");
  }
  if (kind == "oracle_validate") {
    require_positive(config.instances, "instances");
    if (config.max_nodes < 3 || config.max_nodes > 9) {
      throw ConfigError("max_nodes", "must be between 3 and 9 (enumeration cap)");
    }
    if (config.replicas < 2) throw ConfigError("replicas", "must be at least 2");
  }
  if (kind == "allocation") {
    if (config.supplies.empty()) throw ConfigError("supplies", "must not be empty");
    if (config.regions.empty()) {
      require_k_grid(config.k_grid);
      if (config.n0 < 2) throw ConfigError("n0", "must be at least 2");
      require_r0(config.r0);
      require_positive(config.atom_count, "atom_count");
      if (config.mode != "equal" && config.mode != "independent") {
        throw ConfigError("mode", "must be equal or independent");
      }
      for (const count_t supply : config.supplies) {
        if (supply >= 2 * config.n0) {
          throw ConfigError("supplies", "supply exceeds the total population");
        }
      }
    } else {
      for (std::size_t i = 0; i < config.regions.size(); ++i) {
        const auto& region = config.regions[i];
        const std::string context = "regions[" + std::to_string(i) + "]";
        if (region.n0 < 2) throw ConfigError(context + ".n0", "must be at least 2");
        validate_profile(region.profile, context + ".profile");
        if (region.r0 < 0.0) throw ConfigError(context + ".r0", "must be >= 0");
      }
    }
    if (config.regions.empty() && config.vacc_step >= config.n0) {
      throw ConfigError("vacc_step", "must be below n0");
    }
  }
  if (kind == "timing_sweep") {
    require_positive(config.vaccines, "vaccines");
    if (config.vaccines >= config.n0) throw ConfigError("vaccines", "must be below n0");
    if (config.timings.empty()) throw ConfigError("timings", "must not be empty");
    for (const count_t timing : config.timings) {
      if (timing >= config.n0) throw ConfigError("timings", "entries must be below n0");
    }
  }
}

ProfileSpec to_profile_spec(const ProfileConfig& profile, count_t n0,
                            std::optional<double> target_r0, count_t atom_count) {
  ProfileSpec spec;
  spec.n0 = n0;
  spec.target_r0 = target_r0;
  spec.atom_count = atom_count;
  if (profile.family == "homogeneous") {
    spec.family = HomogeneousSpec{profile.sigma, profile.iota};
  } else if (profile.family == "gamma") {
    GammaSpec gamma;
    gamma.shape = profile.shape;
    gamma.scale = profile.scale;
    gamma.mode = profile.mode == "independent" ? Correlation::independent : Correlation::equal;
    spec.family = gamma;
  } else {
    ExplicitSpec atoms;
    for (const auto& entry : profile.atoms) {
      atoms.atoms.push_back({entry[0], entry[1], entry[2]});
    }
    spec.family = atoms;
  }
  return spec;
}

count_t effective_decimation(const ExperimentConfig& config) {
  if (config.decimate > 0) return config.decimate;
  return config.n0 >= 100000 ? 1000 : 1;
}

}  // namespace rspread::tools
