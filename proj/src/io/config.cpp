#include "otpl/io/config.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "otpl/common/errors.hpp"
#include "otpl/io/formats.hpp"

extern char** environ;

namespace otpl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const FormatError&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    return parse_int(v);
  } catch (const FormatError&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

template <typename F>
auto wrap(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const InvalidInput& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

std::string events_to_text(const std::vector<IlluminationEvent>& events) {
  std::string out;
  for (const IlluminationEvent& e : events) {
    if (!out.empty()) out += ", ";
    out += std::to_string(e.frame) + ":" + format_double(e.gain) + ":" + format_double(e.bias);
  }
  return out;
}

std::vector<IlluminationEvent> events_from_text(const std::string& key, const std::string& v) {
  std::vector<IlluminationEvent> events;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto a = item.find(':');
    const auto b = a == std::string::npos ? a : item.find(':', a + 1);
    if (b == std::string::npos) {
      throw ConfigError("config key '" + key + "': expected frame:gain:bias, got '" + item + "'");
    }
    events.push_back({static_cast<int>(to_int(key, item.substr(0, a))),
                      to_double(key, item.substr(a + 1, b - a - 1)),
                      to_double(key, item.substr(b + 1))});
  }
  return events;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Field real(std::string key, Member member) {
  return {key,
          [key, member](RunConfig& c, const std::string& v) { member(c) = to_double(key, v); },
          [member](const RunConfig& c) { return format_double(member(const_cast<RunConfig&>(c))); }};
}

template <typename Member>
Field integer(std::string key, Member member) {
  return {key,
          [key, member](RunConfig& c, const std::string& v) {
            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_int(key, v));
          },
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    // scene
    f.push_back(integer("scene.seed", [](RunConfig& c) -> auto& { return c.scene.seed; }));
    f.push_back(integer("scene.n_points", [](RunConfig& c) -> auto& { return c.scene.n_points; }));
    f.push_back(integer("scene.n_lines", [](RunConfig& c) -> auto& { return c.scene.n_lines; }));
    f.push_back(real("scene.extent", [](RunConfig& c) -> auto& { return c.scene.extent; }));
    f.push_back(real("scene.texture_density",
                     [](RunConfig& c) -> auto& { return c.scene.texture_density; }));
    f.push_back({"scene.trajectory",
                 [](RunConfig& c, const std::string& v) {
                   c.scene.trajectory = wrap("scene.trajectory",
                                             [&] { return trajectory_kind_from_string(v); });
                 },
                 [](const RunConfig& c) { return to_string(c.scene.trajectory); }});
    f.push_back(integer("scene.n_frames", [](RunConfig& c) -> auto& { return c.scene.n_frames; }));
    f.push_back(real("scene.frame_rate", [](RunConfig& c) -> auto& { return c.scene.frame_rate; }));
    f.push_back(real("scene.short_line_fraction",
                     [](RunConfig& c) -> auto& { return c.scene.short_line_fraction; }));
    // camera
    auto cam = [](RunConfig& c) -> CameraModel& { return c.pipeline.camera; };
    f.push_back(real("camera.fx", [cam](RunConfig& c) -> auto& { return cam(c).fx; }));
    f.push_back(real("camera.fy", [cam](RunConfig& c) -> auto& { return cam(c).fy; }));
    f.push_back(real("camera.cx", [cam](RunConfig& c) -> auto& { return cam(c).cx; }));
    f.push_back(real("camera.cy", [cam](RunConfig& c) -> auto& { return cam(c).cy; }));
    f.push_back(real("camera.baseline", [cam](RunConfig& c) -> auto& { return cam(c).baseline; }));
    f.push_back(integer("camera.width", [cam](RunConfig& c) -> auto& { return cam(c).width; }));
    f.push_back(integer("camera.height", [cam](RunConfig& c) -> auto& { return cam(c).height; }));
    // noise
    f.push_back(real("noise.pixel_sigma", [](RunConfig& c) -> auto& { return c.noise.pixel_sigma; }));
    f.push_back(real("noise.detection_dropout",
                     [](RunConfig& c) -> auto& { return c.noise.detection_dropout; }));
    f.push_back({"noise.line_dropout",
                 [](RunConfig& c, const std::string& v) {
                   if (v.empty() || v == "none") {
                     c.noise.line_dropout.reset();
                   } else {
                     c.noise.line_dropout = to_double("noise.line_dropout", v);
                   }
                 },
                 [](const RunConfig& c) {
                   return c.noise.line_dropout ? format_double(*c.noise.line_dropout)
                                               : std::string("none");
                 }});
    f.push_back({"noise.illumination_events",
                 [](RunConfig& c, const std::string& v) {
                   c.noise.illumination_events = events_from_text("noise.illumination_events", v);
                 },
                 [](const RunConfig& c) { return events_to_text(c.noise.illumination_events); }});
    f.push_back(real("noise.descriptor_noise_sigma",
                     [](RunConfig& c) -> auto& { return c.noise.descriptor_noise_sigma; }));
    f.push_back(real("noise.short_line_sigma",
                     [](RunConfig& c) -> auto& { return c.noise.short_line_sigma; }));
    f.push_back(real("noise.short_line_length_px",
                     [](RunConfig& c) -> auto& { return c.noise.short_line_length_px; }));
    // features
    auto feat = [](RunConfig& c) -> FeatureSpec& { return c.pipeline.features; };
    f.push_back(integer("features.depth", [feat](RunConfig& c) -> auto& { return feat(c).depth; }));
    f.push_back(real("features.scale", [feat](RunConfig& c) -> auto& { return feat(c).scale; }));
    f.push_back(real("features.background_sigma",
                     [feat](RunConfig& c) -> auto& { return feat(c).background_sigma; }));
    f.push_back(real("features.falloff_radius",
                     [feat](RunConfig& c) -> auto& { return feat(c).falloff_radius; }));
    f.push_back(real("features.min_segment_px",
                     [feat](RunConfig& c) -> auto& { return feat(c).min_segment_px; }));
    f.push_back(real("features.near_plane",
                     [feat](RunConfig& c) -> auto& { return feat(c).near_plane; }));
    // descriptor
    auto desc = [](RunConfig& c) -> DescriptorConfig& { return c.pipeline.descriptor; };
    f.push_back(integer("descriptor.n_samples",
                        [desc](RunConfig& c) -> auto& { return desc(c).n_samples; }));
    f.push_back(real("descriptor.neighbor_radius_px",
                     [desc](RunConfig& c) -> auto& { return desc(c).neighbor_radius_px; }));
    f.push_back(real("descriptor.rho_0", [desc](RunConfig& c) -> auto& { return desc(c).rho_0; }));
    // ot
    auto ot = [](RunConfig& c) -> OTConfig& { return c.pipeline.ot; };
    f.push_back(real("ot.tau", [ot](RunConfig& c) -> auto& { return ot(c).tau; }));
    f.push_back(real("ot.epsilon", [ot](RunConfig& c) -> auto& { return ot(c).epsilon; }));
    f.push_back(real("ot.eta", [ot](RunConfig& c) -> auto& { return ot(c).eta; }));
    f.push_back(real("ot.delta", [ot](RunConfig& c) -> auto& { return ot(c).delta; }));
    f.push_back(integer("ot.max_iters", [ot](RunConfig& c) -> auto& { return ot(c).max_iters; }));
    f.push_back(real("ot.tol", [ot](RunConfig& c) -> auto& { return ot(c).tol; }));
    // weight
    auto wt = [](RunConfig& c) -> WeightConfig& { return c.pipeline.weight; };
    f.push_back(real("weight.sigma_base", [wt](RunConfig& c) -> auto& { return wt(c).sigma_base; }));
    f.push_back(real("weight.kappa", [wt](RunConfig& c) -> auto& { return wt(c).kappa; }));
    f.push_back(real("weight.lambda", [wt](RunConfig& c) -> auto& { return wt(c).lambda; }));
    f.push_back(real("weight.w_min", [wt](RunConfig& c) -> auto& { return wt(c).w_min; }));
    f.push_back(integer("weight.tau_trk", [wt](RunConfig& c) -> auto& { return wt(c).tau_trk; }));
    f.push_back({"weight.form",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "variance") {
                     c.pipeline.weight.form = WeightForm::Variance;
                   } else if (v == "stddev") {
                     c.pipeline.weight.form = WeightForm::Stddev;
                   } else {
                     throw ConfigError("config key 'weight.form': expected variance or stddev, got '" +
                                       v + "'");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::string(c.pipeline.weight.form == WeightForm::Variance ? "variance"
                                                                                     : "stddev");
                 }});
    // solver
    auto sv = [](RunConfig& c) -> SolverConfig& { return c.pipeline.solver; };
    f.push_back(integer("solver.max_iterations",
                        [sv](RunConfig& c) -> auto& { return sv(c).max_iterations; }));
    f.push_back(real("solver.initial_damping",
                     [sv](RunConfig& c) -> auto& { return sv(c).initial_damping; }));
    f.push_back(real("solver.relative_decrease",
                     [sv](RunConfig& c) -> auto& { return sv(c).relative_decrease; }));
    f.push_back(real("solver.gradient_tolerance",
                     [sv](RunConfig& c) -> auto& { return sv(c).gradient_tolerance; }));
    f.push_back(real("solver.huber_delta_px",
                     [sv](RunConfig& c) -> auto& { return sv(c).huber_delta_px; }));
    f.push_back(real("solver.max_damping", [sv](RunConfig& c) -> auto& { return sv(c).max_damping; }));
    // pipeline
    auto pl = [](RunConfig& c) -> PipelineConfig& { return c.pipeline; };
    f.push_back({"pipeline.matcher",
                 [](RunConfig& c, const std::string& v) {
                   c.pipeline.matcher =
                       wrap("pipeline.matcher", [&] { return matcher_kind_from_string(v); });
                 },
                 [](const RunConfig& c) { return to_string(c.pipeline.matcher); }});
    f.push_back({"pipeline.weighting",
                 [](RunConfig& c, const std::string& v) {
                   c.pipeline.weighting =
                       wrap("pipeline.weighting", [&] { return weighting_kind_from_string(v); });
                 },
                 [](const RunConfig& c) { return to_string(c.pipeline.weighting); }});
    f.push_back(integer("pipeline.keyframe_interval",
                        [pl](RunConfig& c) -> auto& { return pl(c).keyframe_interval; }));
    f.push_back(integer("pipeline.window_size",
                        [pl](RunConfig& c) -> auto& { return pl(c).window_size; }));
    f.push_back(real("pipeline.point_sigma_px",
                     [pl](RunConfig& c) -> auto& { return pl(c).point_sigma_px; }));
    f.push_back(real("pipeline.min_plane_sine",
                     [pl](RunConfig& c) -> auto& { return pl(c).min_plane_sine; }));
    f.push_back(real("pipeline.min_line_parallax_px",
                     [pl](RunConfig& c) -> auto& { return pl(c).min_line_parallax_px; }));
    f.push_back(real("pipeline.max_depth", [pl](RunConfig& c) -> auto& { return pl(c).max_depth; }));
    return f;
  }();
  return table;
}

const Field& field(const std::string& key) {
  for (const Field& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  auto check = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("invalid ") + section + " config: " + e.what());
    }
  };
  check("scene", [&] { scene.validate(); });
  check("noise", [&] { noise.validate(); });
  check("pipeline", [&] { pipeline.validate(); });
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  field(key).set(cfg, trim(value));
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) {
  return field(key).get(cfg);
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_env_overrides(RunConfig& cfg, const std::map<std::string, std::string>& env) {
  const std::string prefix = kEnvPrefix;
  for (const auto& [name, value] : env) {
    if (name.rfind(prefix, 0) != 0) continue;
    std::string key = name.substr(prefix.size());
    const auto sep = key.find("__");
    if (sep == std::string::npos) {
      throw ConfigError("environment variable '" + name + "' does not name a config key");
    }
    key = key.substr(0, sep) + "." + key.substr(sep + 2);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("environment variable '" + name + "': " + e.what());
    }
  }
}

std::map<std::string, std::string> otpl_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry = *e;
    if (entry.rfind(kEnvPrefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    env[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return env;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace otpl
