#include "satmm/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

namespace satmm {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string msg = "invalid scenario:";
  for (const auto& e : errors) msg += "\n  " + e;
  return msg;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_blank_or_comment(const std::string& line) {
  const auto b = line.find_first_not_of(" \t\r");
  return b == std::string::npos || line[b] == '#';
}

// Reads typed fields out of a JSON object, recording errors under dotted paths.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(&errors) {}

  void error(const std::string& path, const std::string& what) { errors_->push_back(path + ": " + what); }

  const json* object(const json& parent, const std::string& key, const std::string& path) {
    if (!parent.contains(key)) return nullptr;
    const json& v = parent.at(key);
    if (!v.is_object()) {
      error(path, "expected an object");
      return nullptr;
    }
    return &v;
  }

  template <typename T>
  void get(const json* obj, const std::string& key, const std::string& path, T& out) {
    if (!obj || !obj->contains(key) || obj->at(key).is_null()) return;
    const json& v = obj->at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return error(path, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return error(path, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
          out = v.get<T>();
        } else {
          error(path, "expected a non-negative integer");
        }
      } else {
        out = v.get<T>();
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return error(path, "expected a number");
      out = v.get<T>();
    } else {
      if (!v.is_string()) return error(path, "expected a string");
      out = v.get<T>();
    }
  }

  void unknown_keys(const json* obj, const std::string& path, std::initializer_list<const char*> known) {
    if (!obj) return;
    std::set<std::string> k(known.begin(), known.end());
    for (const auto& [key, _] : obj->items()) {
      if (!k.contains(key)) error(path.empty() ? key : path + "." + key, "unknown field");
    }
  }

 private:
  std::vector<std::string>* errors_;
};

GroundPoint read_point(Reader& r, const json& v, const std::string& path) {
  GroundPoint p;
  r.get(&v, "lat", path + ".lat", p.latitude_deg);
  r.get(&v, "lon", path + ".lon", p.longitude_deg);
  r.get(&v, "alt_m", path + ".alt_m", p.altitude_m);
  if (!v.contains("lat") || !v.contains("lon")) r.error(path, "lat and lon are required");
  return p;
}

// FNV-1a, 64 bit.
std::uint64_t digest(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ScenarioFileError::ScenarioFileError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<Waypoint> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioFileError({fmt::format("{}: cannot open trace", path.string())});
  std::vector<Waypoint> out;
  std::vector<std::string> errors;
  std::string line;
  int lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    const auto f = split_csv(line);
    const auto t = f.empty() ? std::nullopt : to_double(f[0]);
    if (!seen_data && !t) continue;  // header
    seen_data = true;
    if (f.size() < 3 || f.size() > 4) {
      errors.push_back(fmt::format("{}:{}: expected 3 or 4 fields", path.string(), lineno));
      continue;
    }
    const auto lat = to_double(f[1]);
    const auto lon = to_double(f[2]);
    const auto alt = f.size() == 4 ? to_double(f[3]) : std::optional<double>(0.0);
    if (!t || !lat || !lon || !alt) {
      errors.push_back(fmt::format("{}:{}: non-numeric field", path.string(), lineno));
      continue;
    }
    if (!out.empty() && *t <= out.back().seconds) {
      errors.push_back(fmt::format("{}:{}: timestamps must be strictly increasing", path.string(), lineno));
    }
    out.push_back({*t, GroundPoint{*lat, *lon, *alt}});
  }
  if (out.empty() && errors.empty()) errors.push_back(fmt::format("{}: trace has no rows", path.string()));
  if (!errors.empty()) throw ScenarioFileError(std::move(errors));
  const double t0 = out.front().seconds;
  for (auto& w : out) w.seconds -= t0;
  return out;
}

std::vector<GroundStation> read_ground_stations(const std::filesystem::path& path, double default_server_ms) {
  std::ifstream in(path);
  if (!in) throw ScenarioFileError({fmt::format("{}: cannot open ground-station list", path.string())});
  std::vector<GroundStation> out;
  std::vector<std::string> errors;
  std::string line;
  int lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    const auto f = split_csv(line);
    const auto id = f.empty() ? std::nullopt : to_double(f[0]);
    if (!seen_data && !id) continue;
    seen_data = true;
    if (f.size() < 4 || f.size() > 5) {
      errors.push_back(fmt::format("{}:{}: expected 4 or 5 fields", path.string(), lineno));
      continue;
    }
    const auto lat = to_double(f[2]);
    const auto lon = to_double(f[3]);
    const auto server = f.size() == 5 ? to_double(f[4]) : std::optional<double>(default_server_ms);
    if (!id || *id != std::floor(*id) || !lat || !lon || !server) {
      errors.push_back(fmt::format("{}:{}: malformed row", path.string(), lineno));
      continue;
    }
    out.push_back({node(static_cast<std::int32_t>(*id)), f[1], GroundPoint{*lat, *lon, 0.0}, *server});
  }
  if (!errors.empty()) throw ScenarioFileError(std::move(errors));
  return out;
}

LoadedScenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  std::vector<std::string> errors;
  Reader r(errors);
  LoadedScenario out;
  Scenario& s = out.scenario;
  if (!doc.is_object()) throw ScenarioFileError({"document: expected an object"});
  r.unknown_keys(&doc, "", {"name", "shell", "ada", "sim", "gs", "users", "random_users", "mechanisms"});

  const json* shell = r.object(doc, "shell", "shell");
  r.unknown_keys(shell, "shell", {"X", "Y", "altitude_km", "inclination_deg", "phase_offset", "min_elevation_deg"});
  r.get(shell, "X", "shell.X", s.shell.num_orbits);
  r.get(shell, "Y", "shell.Y", s.shell.sats_per_orbit);
  r.get(shell, "altitude_km", "shell.altitude_km", s.shell.altitude_km);
  r.get(shell, "inclination_deg", "shell.inclination_deg", s.shell.inclination_deg);
  r.get(shell, "phase_offset", "shell.phase_offset", s.shell.phase_offset);
  r.get(shell, "min_elevation_deg", "shell.min_elevation_deg", s.shell.min_elevation_deg);

  const json* ada = r.object(doc, "ada", "ada");
  r.unknown_keys(ada, "ada", {"H", "discovery_window", "reference_point"});
  s.mechanism.ada.H = -1;
  s.mechanism.ada.discovery_window = 0;
  r.get(ada, "H", "ada.H", s.mechanism.ada.H);
  r.get(ada, "discovery_window", "ada.discovery_window", s.mechanism.ada.discovery_window);
  if (const json* ref = ada ? r.object(*ada, "reference_point", "ada.reference_point") : nullptr) {
    s.reference_point = read_point(r, *ref, "ada.reference_point");
  }

  const json* sim = r.object(doc, "sim", "sim");
  r.unknown_keys(sim, "sim",
                 {"horizon_slots", "slot_seconds", "per_hop_ms", "latency_mode", "convergence_slots", "rng_seed",
                  "reanchor_hysteresis_slots", "ground_anchor_uplink", "server_latency_ms"});
  r.get(sim, "horizon_slots", "sim.horizon_slots", s.horizon);
  r.get(sim, "slot_seconds", "sim.slot_seconds", s.slot_seconds);
  if (sim && sim->contains("per_hop_ms") && sim->at("per_hop_ms").is_string()) {
    if (sim->at("per_hop_ms") == "geometric") {
      s.latency_mode = LatencyMode::Geometric;
    } else {
      r.error("sim.per_hop_ms", "expected a number or \"geometric\"");
    }
  } else {
    r.get(sim, "per_hop_ms", "sim.per_hop_ms", s.per_hop_ms);
  }
  std::string mode;
  r.get(sim, "latency_mode", "sim.latency_mode", mode);
  if (mode == "geometric") {
    s.latency_mode = LatencyMode::Geometric;
  } else if (mode == "per-hop") {
    s.latency_mode = LatencyMode::PerHop;
  } else if (!mode.empty()) {
    r.error("sim.latency_mode", "expected \"per-hop\" or \"geometric\"");
  }
  r.get(sim, "convergence_slots", "sim.convergence_slots", s.convergence.convergence_slots);
  r.get(sim, "rng_seed", "sim.rng_seed", s.rng_seed);
  r.get(sim, "reanchor_hysteresis_slots", "sim.reanchor_hysteresis_slots", s.reanchor_hysteresis_slots);
  std::string uplink = "anchor";
  r.get(sim, "ground_anchor_uplink", "sim.ground_anchor_uplink", uplink);
  if (uplink == "anchor" || uplink == "nearest") {
    s.ground_anchor_uplink_via_anchor = uplink == "anchor";
  } else {
    r.error("sim.ground_anchor_uplink", "expected \"anchor\" or \"nearest\"");
  }
  double server_ms = 5.0;
  r.get(sim, "server_latency_ms", "sim.server_latency_ms", server_ms);

  if (doc.contains("gs")) {
    const json& gs = doc.at("gs");
    if (gs.is_object() && gs.contains("file") && gs.at("file").is_string()) {
      try {
        s.ground_stations = read_ground_stations(base_dir / gs.at("file").get<std::string>(), server_ms);
      } catch (const ScenarioFileError& e) {
        for (const auto& msg : e.errors()) errors.push_back("gs.file: " + msg);
      }
    } else if (gs.is_array()) {
      for (std::size_t i = 0; i < gs.size(); ++i) {
        const std::string path = fmt::format("gs[{}]", i);
        const json& g = gs[i];
        if (!g.is_object()) {
          r.error(path, "expected an object");
          continue;
        }
        r.unknown_keys(&g, path, {"id", "name", "lat", "lon", "alt_m", "server_latency_ms"});
        GroundStation st;
        std::int32_t id = 0;
        if (!g.contains("id")) r.error(path, "id is required");
        r.get(&g, "id", path + ".id", id);
        st.id = node(id);
        st.name = fmt::format("gs{}", id);
        r.get(&g, "name", path + ".name", st.name);
        st.location = read_point(r, g, path);
        st.server_latency_ms = server_ms;
        r.get(&g, "server_latency_ms", path + ".server_latency_ms", st.server_latency_ms);
        s.ground_stations.push_back(std::move(st));
      }
    } else {
      r.error("gs", "expected a list or {\"file\": ...}");
    }
  }

  if (doc.contains("users")) {
    const json& users = doc.at("users");
    if (!users.is_array()) r.error("users", "expected a list");
    for (std::size_t i = 0; users.is_array() && i < users.size(); ++i) {
      const std::string path = fmt::format("users[{}]", i);
      const json& u = users[i];
      if (!u.is_object()) {
        r.error(path, "expected an object");
        continue;
      }
      r.unknown_keys(&u, path, {"id", "name", "trace_path", "lat", "lon", "alt_m", "waypoints"});
      UserTrace t;
      std::int32_t id = 0;
      if (!u.contains("id")) r.error(path, "id is required");
      r.get(&u, "id", path + ".id", id);
      t.id = node(id);
      t.name = fmt::format("user{}", id);
      r.get(&u, "name", path + ".name", t.name);
      const int forms = u.contains("trace_path") + u.contains("waypoints") + (u.contains("lat") || u.contains("lon"));
      if (forms != 1) {
        r.error(path, "exactly one of trace_path, waypoints or lat/lon is required");
      } else if (u.contains("trace_path")) {
        std::string trace;
        r.get(&u, "trace_path", path + ".trace_path", trace);
        try {
          if (!trace.empty()) t.waypoints = read_trace(base_dir / trace);
        } catch (const ScenarioFileError& e) {
          for (const auto& msg : e.errors()) errors.push_back(path + ".trace_path: " + msg);
        }
      } else if (u.contains("waypoints")) {
        const json& w = u.at("waypoints");
        bool ok = w.is_array();
        for (std::size_t k = 0; ok && k < w.size(); ++k) {
          const json& row = w[k];
          ok = row.is_array() && row.size() == 4 &&
               std::all_of(row.begin(), row.end(), [](const json& x) { return x.is_number(); });
          if (ok) {
            t.waypoints.push_back({row[0].get<double>(), {row[1].get<double>(), row[2].get<double>(),
                                                          row[3].get<double>()}});
          }
        }
        if (!ok) r.error(path + ".waypoints", "expected a list of [seconds, lat, lon, alt_m]");
      } else {
        t.waypoints.push_back({0.0, read_point(r, u, path)});
      }
      s.users.push_back(std::move(t));
    }
  }

  const json* random = r.object(doc, "random_users", "random_users");
  r.unknown_keys(random, "random_users", {"count", "radius_km", "first_id"});
  r.get(random, "count", "random_users.count", s.random_users.count);
  r.get(random, "radius_km", "random_users.radius_km", s.random_users.radius_km);
  r.get(random, "first_id", "random_users.first_id", s.random_users.first_id);

  if (doc.contains("mechanisms")) {
    const json& m = doc.at("mechanisms");
    if (!m.is_array() || m.empty()) r.error("mechanisms", "expected a non-empty list");
    for (std::size_t i = 0; m.is_array() && i < m.size(); ++i) {
      const auto kind = m[i].is_string() ? parse_mechanism(m[i].get<std::string>()) : std::nullopt;
      if (!kind) {
        r.error(fmt::format("mechanisms[{}]", i), "expected cluster-anchor, ground-anchor or fixed-sat-anchor");
      } else if (std::find(out.mechanisms.begin(), out.mechanisms.end(), *kind) != out.mechanisms.end()) {
        r.error(fmt::format("mechanisms[{}]", i), "duplicate mechanism");
      } else {
        out.mechanisms.push_back(*kind);
      }
    }
  } else {
    out.mechanisms = {MechanismKind::ClusterAnchor, MechanismKind::GroundAnchor, MechanismKind::FixedSatAnchor};
  }
  if (!out.mechanisms.empty()) s.mechanism.kind = out.mechanisms.front();

  // Semantic checks only make sense once the shell itself parsed.
  for (auto& e : s.validate()) errors.push_back(std::move(e));
  if (!errors.empty()) throw ScenarioFileError(std::move(errors));
  return out;
}

LoadedScenario parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    std::string what = e.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ScenarioFileError({fmt::format("line {}: {}", line, what)});
  }
  return parse_scenario(doc, base_dir);
}

LoadedScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioFileError({fmt::format("{}: cannot open scenario", path.string())});
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario_text(ss.str(), path.parent_path());
  } catch (const ScenarioFileError& e) {
    std::vector<std::string> errors;
    for (const auto& msg : e.errors()) errors.push_back(path.string() + ": " + msg);
    throw ScenarioFileError(std::move(errors));
  }
}

json to_json(const Scenario& s, const std::vector<MechanismKind>& mechanisms) {
  const AdaParams ada = effective_ada(s);
  json doc;
  doc["shell"] = {{"X", s.shell.num_orbits},
                  {"Y", s.shell.sats_per_orbit},
                  {"altitude_km", s.shell.altitude_km},
                  {"inclination_deg", s.shell.inclination_deg},
                  {"phase_offset", s.shell.phase_offset},
                  {"min_elevation_deg", s.shell.min_elevation_deg}};
  doc["ada"] = {{"H", ada.H},
                {"discovery_window", ada.discovery_window},
                {"reference_point",
                 {{"lat", s.reference_point.latitude_deg},
                  {"lon", s.reference_point.longitude_deg},
                  {"alt_m", s.reference_point.altitude_m}}}};
  doc["sim"] = {{"horizon_slots", s.horizon},
                {"slot_seconds", s.slot_seconds},
                {"per_hop_ms", s.per_hop_ms},
                {"latency_mode", to_string(s.latency_mode)},
                {"convergence_slots", s.convergence.convergence_slots},
                {"rng_seed", s.rng_seed},
                {"reanchor_hysteresis_slots", s.reanchor_hysteresis_slots},
                {"ground_anchor_uplink", s.ground_anchor_uplink_via_anchor ? "anchor" : "nearest"}};
  json gs = json::array();
  for (const auto& g : s.ground_stations) {
    gs.push_back({{"id", index_of(g.id)},
                  {"name", g.name},
                  {"lat", g.location.latitude_deg},
                  {"lon", g.location.longitude_deg},
                  {"alt_m", g.location.altitude_m},
                  {"server_latency_ms", g.server_latency_ms}});
  }
  doc["gs"] = std::move(gs);
  json users = json::array();
  for (const auto& u : resolve_users(s).users) {
    json w = json::array();
    for (const auto& p : u.waypoints) {
      w.push_back({p.seconds, p.point.latitude_deg, p.point.longitude_deg, p.point.altitude_m});
    }
    users.push_back({{"id", index_of(u.id)}, {"name", u.name}, {"waypoints", std::move(w)}});
  }
  doc["users"] = std::move(users);
  json m = json::array();
  for (auto k : mechanisms) m.push_back(to_string(k));
  doc["mechanisms"] = std::move(m);
  return doc;
}

std::string scenario_fingerprint(const Scenario& s) {
  json doc = to_json(s, {});
  doc.erase("mechanisms");
  return fmt::format("{:016x}", digest(doc.dump()));
}

}  // namespace satmm
