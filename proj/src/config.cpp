#include "minnaert/config.hpp"

#include <json.hpp>

#include <fstream>

namespace minnaert {

namespace {

using nlohmann::json;

class KeyCollector {
 public:
  explicit KeyCollector(const json& root) : root_(&root) {}

  const json* find(const std::string& dotted) const {
    const json* node = root_;
    std::size_t pos = 0;
    while (pos < dotted.size()) {
      const std::size_t dot = dotted.find('.', pos);
      const std::string key = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
      if (!node->is_object() || !node->contains(key)) return nullptr;
      node = &(*node)[key];
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    return node;
  }

  template <typename T>
  T require(const std::string& key) {
    const json* node = find(key);
    if (node == nullptr) {
      missing_.push_back(key);
      return T{};
    }
    try {
      return node->get<T>();
    } catch (const json::exception&) {
      invalid_.push_back(key);
      return T{};
    }
  }

  template <typename T>
  T optional(const std::string& key, T fallback) {
    const json* node = find(key);
    if (node == nullptr) return fallback;
    try {
      return node->get<T>();
    } catch (const json::exception&) {
      invalid_.push_back(key);
      return fallback;
    }
  }

  Vec3 require_vec3(const std::string& key) {
    const auto v = require<std::vector<double>>(key);
    if (v.size() != 3) {
      if (find(key) != nullptr) invalid_.push_back(key);
      return Vec3::Zero();
    }
    return Vec3(v[0], v[1], v[2]);
  }

  Vec3 optional_vec3(const std::string& key, const Vec3& fallback) {
    if (find(key) == nullptr) return fallback;
    return require_vec3(key);
  }

  Index3 require_index3(const std::string& key) {
    const auto v = require<std::vector<int>>(key);
    if (v.size() != 3) {
      if (find(key) != nullptr) invalid_.push_back(key);
      return Index3::Zero();
    }
    return Index3(v[0], v[1], v[2]);
  }

  void finish(const std::string& path) const {
    if (missing_.empty() && invalid_.empty()) return;
    std::string msg = "config error in " + path + ":";
    std::vector<std::string> keys;
    for (const auto& k : missing_) {
      msg += " missing key '" + k + "';";
      keys.push_back(k);
    }
    for (const auto& k : invalid_) {
      msg += " invalid value for key '" + k + "';";
      keys.push_back(k);
    }
    throw ConfigError(msg, keys);
  }

  void flag_invalid(const std::string& key) { invalid_.push_back(key); }

 private:
  const json* root_;
  std::vector<std::string> missing_;
  std::vector<std::string> invalid_;
};

std::vector<GaussianBump> parse_bumps(const json& arr, const std::string& which) {
  std::vector<GaussianBump> out;
  for (const auto& b : arr) {
    if (!b.contains("field") || b["field"].get<std::string>() != which) continue;
    GaussianBump g;
    g.amplitude = b.at("amplitude").get<double>();
    const auto c = b.at("center").get<std::vector<double>>();
    g.center = Vec3(c.at(0), c.at(1), c.at(2));
    g.width_sq = b.at("width_sq").get<double>();
    out.push_back(g);
  }
  return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot open " + path, {path});
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: not valid JSON: ") + e.what(), {path});
  }
  KeyCollector keys(root);
  RunConfig cfg;

  // grid
  cfg.phantom.grid_dims = keys.require_index3("grid.dims");
  cfg.phantom.grid_spacing = keys.require<double>("grid.spacing");
  cfg.phantom.grid_origin = keys.require_vec3("grid.origin");

  // medium
  const std::string kind = keys.require<std::string>("medium.kind");
  if (kind == "homogeneous")
    cfg.phantom.kind = MediumKind::homogeneous;
  else if (kind == "uniform")
    cfg.phantom.kind = MediumKind::uniform;
  else if (kind == "plateau")
    cfg.phantom.kind = MediumKind::plateau;
  else if (kind == "bumps")
    cfg.phantom.kind = MediumKind::bumps;
  else if (!kind.empty())
    keys.flag_invalid("medium.kind");
  cfg.phantom.k0_value = keys.optional<double>("medium.k0", 1.0);
  cfg.phantom.rho0_value = keys.optional<double>("medium.rho0", 1.0);
  cfg.phantom.collar_fraction = keys.optional<double>("medium.collar_fraction", 0.1);
  cfg.phantom.contrast_bound = keys.optional<double>("medium.contrast_bound", 10.0);
  cfg.phantom.omega =
      Box3(keys.optional_vec3("medium.omega.lo", Vec3(-0.5, -0.5, -0.5)),
           keys.optional_vec3("medium.omega.hi", Vec3(0.5, 0.5, 0.5)));
  if (const auto* bumps = keys.find("medium.bumps"); bumps != nullptr && bumps->is_array()) {
    try {
      cfg.phantom.k0_bumps = parse_bumps(*bumps, "k0");
      cfg.phantom.rho0_bumps = parse_bumps(*bumps, "rho0");
    } catch (const json::exception&) {
      keys.flag_invalid("medium.bumps");
    }
  }

  // bubble
  cfg.bubble.radius = keys.require<double>("bubble.radius");
  cfg.bubble.kappa_k = keys.optional<double>("bubble.kappa_k", 1.0);
  cfg.bubble.kappa_rho = keys.optional<double>("bubble.kappa_rho", 1.0);
  const std::string shape = keys.optional<std::string>("bubble.shape", "ball");
  if (shape == "ball") {
    cfg.bubble.shape = BubbleShape::ball;
  } else if (shape == "ellipsoid") {
    cfg.bubble.shape = BubbleShape::tabulated;
    const Vec3 axes = keys.optional_vec3("bubble.semi_axes", Vec3(1.0, 1.0, 1.0));
    cfg.bubble.ref = ellipsoid_reference(axes);
  } else {
    keys.flag_invalid("bubble.shape");
  }

  // source
  const std::string skind = keys.require<std::string>("source.kind");
  cfg.p = keys.require<int>("source.p");
  const double t_flat = keys.optional<double>("source.t_flat", 1e6);
  const double t_cut = keys.optional<double>("source.t_cut", 2e6);
  if (skind == "separable_power") {
    SeparablePowerSource s;
    s.p = cfg.p;
    s.psi = {t_flat, t_cut};
    s.phi.base = keys.optional<double>("source.phi.base", 0.0);
    if (const auto* bumps = keys.find("source.phi.bumps"); bumps != nullptr && bumps->is_array()) {
      try {
        for (const auto& b : *bumps) {
          GaussianBump g;
          g.amplitude = b.at("amplitude").get<double>();
          const auto c = b.at("center").get<std::vector<double>>();
          g.center = Vec3(c.at(0), c.at(1), c.at(2));
          g.width_sq = b.at("width_sq").get<double>();
          s.phi.bumps.push_back(g);
        }
      } catch (const json::exception&) {
        keys.flag_invalid("source.phi.bumps");
      }
    }
    if (keys.optional<bool>("source.phi.support_omega", true)) {
      s.phi.has_support = true;
      s.phi.support = cfg.phantom.omega;
      s.phi.support_collar = keys.optional<double>("source.phi.support_collar", 0.1);
    }
    cfg.source = s;
  } else if (skind == "point") {
    PointSource s;
    s.p = cfg.p;
    s.psi = {t_flat, t_cut};
    s.location = keys.require_vec3("source.location");
    s.scale = keys.optional<double>("source.scale", 1.0);
    cfg.source = s;
  } else if (!skind.empty()) {
    keys.flag_invalid("source.kind");
  }

  // time
  const double dt = keys.require<double>("time.dt");
  const double T = keys.require<double>("time.T");
  if (dt > 0.0 && T > dt) cfg.tg = TimeGrid::from_horizon(dt, T);
  else if (keys.find("time.dt") != nullptr && keys.find("time.T") != nullptr)
    keys.flag_invalid("time.dt");

  // receiver and scan
  cfg.x0 = keys.require_vec3("receiver.x0");
  if (keys.find("receiver.xc") != nullptr) {
    cfg.has_xc = true;
    cfg.xc = keys.require_vec3("receiver.xc");
  }
  cfg.scan.origin = keys.require_vec3("scan.origin");
  cfg.scan.spacing = keys.require<double>("scan.spacing");
  cfg.scan.dims = keys.require_index3("scan.dims");

  // synthesis and bookkeeping
  cfg.noise_scale = keys.optional<double>("synthesis.noise_scale", 0.0);
  cfg.omit_regular_part = keys.optional<bool>("synthesis.omit_regular_part", false);
  cfg.pulse_half_width_steps = keys.optional<int>("synthesis.pulse_half_width_steps", 16);
  cfg.green_pad_cells = keys.optional<int>("synthesis.green_pad_cells", 12);
  cfg.detect_kappa = keys.optional<double>("reconstruct.kappa", 10.0);
  cfg.seed = keys.optional<unsigned long long>("seed", 0);
  cfg.output_dir = keys.optional<std::string>("output_dir", "out");
  cfg.data_dir = keys.optional<std::string>("data_dir", "");
  cfg.jobs = keys.optional<int>("jobs", 1);

  keys.finish(path);
  return cfg;
}

}  // namespace minnaert
