#pragma once

// Run configuration: `key = value` lines, `#` comments. The `schema` key is required and must
// name a supported version; unknown keys are rejected.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "elastoslab/scenarios.hpp"

namespace elastoslab {

inline constexpr const char* kConfigSchema = "elastoslab-config/1";

struct GridSpec {
  int n1 = 32, n2 = 32;
  int levels = 33;  ///< vertical node count, nz + 1

  int nz() const { return levels - 1; }
  SlabGrid make() const { return SlabGrid::make(n1, n2, nz()); }
};

struct RunConfig {
  std::string scenario = "elastic-mode";
  GridSpec grid;
  ScenarioOptions options = default_options("elastic-mode");
  double T = 1.0;
  double dt = 0.0;  ///< <= 0: stable_dt_bound of the prepared state
  int output_every = 1;
  int snapshot_every = 0;  ///< 0: initial and final snapshots only
  std::string out = "out";
  std::uint64_t seed = 1;
  bool monitor = true;
  bool reproject = true;
  bool theta = false;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

[[noreturn]] inline void fail(const std::string& key, const std::string& msg) {
  throw Error(ErrorKind::ConfigInvalid, key + ": " + msg);
}

inline double number(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(x)) fail(key, "expected a number, got '" + v + "'");
  return x;
}

inline long long integer(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) fail(key, "expected an integer, got '" + v + "'");
  return x;
}

inline bool boolean(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

}  // namespace config_detail

/// Parses N1xN2xNz, where the last number counts vertical nodes (Nz = intervals + 1).
inline GridSpec parse_grid(const std::string& text, const std::string& key = "grid") {
  GridSpec g;
  int* dims[3] = {&g.n1, &g.n2, &g.levels};
  std::size_t pos = 0;
  for (int d = 0; d < 3; ++d) {
    const auto next = d < 2 ? text.find('x', pos) : text.size();
    if (next == std::string::npos) config_detail::fail(key, "expected N1xN2xNz, got '" + text + "'");
    *dims[d] = static_cast<int>(config_detail::integer(key, text.substr(pos, next - pos)));
    pos = next + 1;
  }
  if (g.n1 < 4 || g.n2 < 4 || g.n1 % 2 || g.n2 % 2) config_detail::fail(key, "N1 and N2 must be even and >= 4");
  if (g.levels < 3) config_detail::fail(key, "Nz must be >= 3");
  return g;
}

/// Parses `all`, `none`, or rectangles `[a,b]x[c,d]` separated by `;`.
inline Region parse_region(const std::string& text, const std::string& key) {
  const auto t = config_detail::trim(text);
  if (t == "all") return Region::whole();
  if (t == "none") return Region{};
  Region r;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = config_detail::trim(item);
    double v[4];
    char tail = 0;
    if (std::sscanf(item.c_str(), " [ %lf , %lf ] x [ %lf , %lf ] %c", &v[0], &v[1], &v[2], &v[3], &tail) != 4)
      config_detail::fail(key, "expected [a,b]x[c,d], got '" + item + "'");
    if (!(v[0] < v[1]) || !(v[2] < v[3])) config_detail::fail(key, "empty rectangle '" + item + "'");
    r.rects.push_back({v[0], v[1], v[2], v[3]});
  }
  if (r.rects.empty()) config_detail::fail(key, "no rectangles given");
  return r;
}

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {"schema", "scenario", "grid",   "s",           "eps",
                                             "c0",     "amplitude", "c",     "gamma1",      "gamma2",
                                             "T",      "dt",        "out",   "output_every", "snapshot_every",
                                             "seed",   "monitor",   "reproject", "theta"};
  return keys;
}

inline RunConfig parse_config(const std::string& text) {
  using namespace config_detail;
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno);
    if (eq == std::string::npos) fail(where, "expected key = value");
    const auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!config_keys().count(key)) fail(where, "unknown key '" + key + "'");
    if (value.empty()) fail(key, "missing value");
    if (!kv.emplace(key, value).second) fail(key, "given twice");
  }
  if (!kv.count("schema")) fail("schema", "required (use '" + std::string(kConfigSchema) + "')");
  if (kv["schema"] != kConfigSchema) fail("schema", "unsupported '" + kv["schema"] + "', expected '" + kConfigSchema + "'");

  RunConfig c;
  if (kv.count("scenario")) {
    c.scenario = kv["scenario"];
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), c.scenario) == names.end()) fail("scenario", "unknown scenario '" + c.scenario + "'");
  }
  c.options = default_options(c.scenario);
  auto& o = c.options;
  for (const auto& [key, v] : kv) {
    if (key == "grid") c.grid = parse_grid(v);
    else if (key == "s") {
      o.s = static_cast<int>(integer(key, v));
      if (o.s < 4) fail(key, "must be >= 4");
    } else if (key == "eps") {
      o.eps = number(key, v);
      if (o.eps < 0) fail(key, "must be >= 0");
    } else if (key == "c0") {
      o.c0 = number(key, v);
      if (o.c0 <= 0 || o.c0 >= 1) fail(key, "must lie in (0, 1)");
    } else if (key == "amplitude") o.amplitude = number(key, v);
    else if (key == "c") o.c = number(key, v);
    else if (key == "gamma1") o.gamma1 = parse_region(v, key);
    else if (key == "gamma2") o.gamma2 = parse_region(v, key);
    else if (key == "T") {
      c.T = number(key, v);
      if (c.T <= 0) fail(key, "must be > 0");
    } else if (key == "dt") c.dt = number(key, v);
    else if (key == "out") c.out = v;
    else if (key == "output_every") {
      c.output_every = static_cast<int>(integer(key, v));
      if (c.output_every < 1) fail(key, "must be >= 1");
    } else if (key == "snapshot_every") {
      c.snapshot_every = static_cast<int>(integer(key, v));
      if (c.snapshot_every < 0) fail(key, "must be >= 0");
    } else if (key == "seed") {
      const auto s = integer(key, v);
      if (s < 0) fail(key, "must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "monitor") c.monitor = boolean(key, v);
    else if (key == "reproject") c.reproject = boolean(key, v);
    else if (key == "theta") c.theta = boolean(key, v);
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace elastoslab
