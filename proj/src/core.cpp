#include "slicerl/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace slicerl {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value,
                    std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || value.empty()) {
    throw ConfigError("invalid number for key '" + key + "' (line " +
                      std::to_string(line) + ")");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value,
              std::size_t line) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || value.empty()) {
    throw ConfigError("invalid integer for key '" + key + "' (line " +
                      std::to_string(line) + ")");
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value,
                std::size_t line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid boolean for key '" + key + "' (line " +
                    std::to_string(line) + ")");
}

}  // namespace

void SliceConfig::validate() const {
  if (!(cpu_min_mc > 0.0) || !(cpu_min_mc <= cpu_max_mc))
    throw ConfigError("require 0 < cpu_min_mc <= cpu_max_mc");
  if (!(cpu_grid_mc > 0.0)) throw ConfigError("require cpu_grid_mc > 0");
  if (!(load_norm_max_mc > 0.0))
    throw ConfigError("require load_norm_max_mc > 0");
  if (!(traffic_norm_max > 0.0))
    throw ConfigError("require traffic_norm_max > 0");
  if (!(qos_threshold_mbps > 0.0))
    throw ConfigError("require qos_threshold_mbps > 0");
  if (!(degradation_exponent >= 1.0))
    throw ConfigError("require degradation_exponent >= 1");
  if (!(traffic_std >= 0.0)) throw ConfigError("require traffic_std >= 0");
  if (!(traffic_mean >= 0.0)) throw ConfigError("require traffic_mean >= 0");
  if (session_len_s < 1) throw ConfigError("require session_len_s >= 1");
  if (!(per_ue_demand_mc >= 0.0))
    throw ConfigError("require per_ue_demand_mc >= 0");
  if (!(per_ue_target_rate_mbps > 0.0))
    throw ConfigError("require per_ue_target_rate_mbps > 0");
  if (!(usage_noise_rel >= 0.0))
    throw ConfigError("require usage_noise_rel >= 0");
  if (control_period_s != 1) throw ConfigError("control_period_s is fixed at 1");
}

std::string SliceConfig::to_text() const {
  std::ostringstream out;
  out << "cpu_min_mc=" << fmt_double(cpu_min_mc) << '\n'
      << "cpu_max_mc=" << fmt_double(cpu_max_mc) << '\n'
      << "cpu_grid_mc=" << fmt_double(cpu_grid_mc) << '\n'
      << "snap_to_grid=" << (snap_to_grid ? "true" : "false") << '\n'
      << "traffic_mean=" << fmt_double(traffic_mean) << '\n'
      << "traffic_std=" << fmt_double(traffic_std) << '\n'
      << "session_len_s=" << session_len_s << '\n'
      << "per_ue_demand_mc=" << fmt_double(per_ue_demand_mc) << '\n'
      << "per_ue_target_rate_mbps=" << fmt_double(per_ue_target_rate_mbps)
      << '\n'
      << "degradation_exponent=" << fmt_double(degradation_exponent) << '\n'
      << "usage_noise_rel=" << fmt_double(usage_noise_rel) << '\n'
      << "qos_threshold_mbps=" << fmt_double(qos_threshold_mbps) << '\n'
      << "load_norm_max_mc=" << fmt_double(load_norm_max_mc) << '\n'
      << "traffic_norm_max=" << fmt_double(traffic_norm_max) << '\n'
      << "control_period_s=" << control_period_s << '\n';
  return out.str();
}

uint64_t SliceConfig::hash() const {
  const std::string text = to_text();
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SliceConfig SliceConfig::from_text(const std::string& text) {
  SliceConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key=value (line " + std::to_string(line_no) +
                        ")");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "cpu_min_mc") {
      cfg.cpu_min_mc = parse_double(key, value, line_no);
    } else if (key == "cpu_max_mc") {
      cfg.cpu_max_mc = parse_double(key, value, line_no);
    } else if (key == "cpu_grid_mc") {
      cfg.cpu_grid_mc = parse_double(key, value, line_no);
    } else if (key == "snap_to_grid") {
      cfg.snap_to_grid = parse_bool(key, value, line_no);
    } else if (key == "traffic_mean") {
      cfg.traffic_mean = parse_double(key, value, line_no);
    } else if (key == "traffic_std") {
      cfg.traffic_std = parse_double(key, value, line_no);
    } else if (key == "session_len_s") {
      cfg.session_len_s = parse_int(key, value, line_no);
    } else if (key == "per_ue_demand_mc") {
      cfg.per_ue_demand_mc = parse_double(key, value, line_no);
    } else if (key == "per_ue_target_rate_mbps") {
      cfg.per_ue_target_rate_mbps = parse_double(key, value, line_no);
    } else if (key == "degradation_exponent") {
      cfg.degradation_exponent = parse_double(key, value, line_no);
    } else if (key == "usage_noise_rel") {
      cfg.usage_noise_rel = parse_double(key, value, line_no);
    } else if (key == "qos_threshold_mbps") {
      cfg.qos_threshold_mbps = parse_double(key, value, line_no);
    } else if (key == "load_norm_max_mc") {
      cfg.load_norm_max_mc = parse_double(key, value, line_no);
    } else if (key == "traffic_norm_max") {
      cfg.traffic_norm_max = parse_double(key, value, line_no);
    } else if (key == "control_period_s") {
      cfg.control_period_s = parse_int(key, value, line_no);
    } else {
      throw ConfigError("unknown config key '" + key + "' (line " +
                        std::to_string(line_no) + ")");
    }
  }
  cfg.validate();
  return cfg;
}

SliceConfig SliceConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

void SliceConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path.string());
  out << to_text();
}

double map_action(NormalizedAction a, const SliceConfig& cfg) {
  const double clamped = std::clamp(a.value, 0.0, 1.0);
  double mc = std::clamp(clamped * cfg.load_norm_max_mc, cfg.cpu_min_mc,
                         cfg.cpu_max_mc);
  if (cfg.snap_to_grid) {
    mc = std::round(mc / cfg.cpu_grid_mc) * cfg.cpu_grid_mc;
    mc = std::clamp(mc, cfg.cpu_min_mc, cfg.cpu_max_mc);
  }
  return mc;
}

Observation normalize_observation(double users, double usage_mc,
                                  const SliceConfig& cfg) {
  Observation obs;
  obs.traffic_norm = std::clamp(users / cfg.traffic_norm_max, 0.0, 1.0);
  obs.cpu_usage_norm = std::clamp(usage_mc / cfg.load_norm_max_mc, 0.0, 1.0);
  return obs;
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

}  // namespace slicerl
