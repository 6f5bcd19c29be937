#include "pks/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pks::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& key, int line) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': expected a number, got '" + t + "'", line);
  }
  return v;
}

long parse_long(const std::string& text, const std::string& key, int line) {
  const std::string t = trim(text);
  long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + t + "'", line);
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& key, int line) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + t + "'", line);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (cfg.entries_.count(key) != 0) throw ConfigError("duplicate key '" + key + "'", line);
    cfg.entries_[key] = {value, line};
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

const std::string& KeyValueConfig::require(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second.first;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.first;
}

int KeyValueConfig::line_of(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  return parse_double(require(key), key, line_of(key));
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long KeyValueConfig::get_long(const std::string& key) const {
  return parse_long(require(key), key, line_of(key));
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  return has(key) ? get_long(key) : fallback;
}

std::vector<double> KeyValueConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::string text = require(key);
  std::replace(text.begin(), text.end(), ';', ',');
  for (const std::string& item : split(text, ',')) {
    out.push_back(parse_double(item, key, line_of(key)));
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  const int line = line_of(key);
  entries_[key] = {value, line};
}

void KeyValueConfig::reject_unknown(const std::vector<std::string>& allowed) const {
  for (const auto& [key, entry] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "'", entry.second);
    }
  }
}

const std::vector<std::string>& simulation_keys() {
  static const std::vector<std::string> keys = {
      "epsilon",        "A",          "dt",           "t_end",         "nx",
      "ny",             "nz",         "lx",           "ly",            "lz",
      "target_mass",    "output_every", "solver",     "out_dir",       "seed",
      "snapshot_format", "init.shape", "init.disks",  "init.center",   "init.radius",
      "init.area",      "init.inner_radius", "init.amplitude", "init.modes",
      "init.scale_to_mass"};
  return keys;
}

RunSettings settings_from(const KeyValueConfig& cfg) {
  cfg.reject_unknown(simulation_keys());
  RunSettings rs;
  SimConfig& sim = rs.sim;
  sim.epsilon = cfg.get_double("epsilon");
  sim.A = cfg.get_double("A");
  sim.t_end = cfg.get_double("t_end");
  sim.dt = cfg.get_double("dt", 0.0);
  if (cfg.has("dt") && !(sim.dt > 0.0)) {
    throw ConfigError("key 'dt' must be positive", cfg.line_of("dt"));
  }

  const long nx = cfg.get_long("nx");
  const long ny = cfg.get_long("ny");
  const long nz = cfg.get_long("nz", 1);
  const double lx = cfg.get_double("lx");
  const double ly = cfg.get_double("ly");
  if (nx < 2 || ny < 2 || nz < 1) throw ConfigError("grid needs nx, ny >= 2", cfg.line_of("nx"));
  if (!(lx > 0.0 && ly > 0.0)) throw ConfigError("lx and ly must be positive", cfg.line_of("lx"));
  const double h = lx / static_cast<double>(nx);
  auto same_spacing = [h](double l, long n) {
    return std::abs(l / static_cast<double>(n) - h) <= 1e-12 * h;
  };
  if (!same_spacing(ly, ny)) {
    throw ConfigError("cells must be square: ly/ny must equal lx/nx", cfg.line_of("ly"));
  }
  if (nz > 1) {
    const double lz = cfg.get_double("lz");
    if (!same_spacing(lz, nz)) {
      throw ConfigError("cells must be cubic: lz/nz must equal lx/nx", cfg.line_of("lz"));
    }
  }
  sim.grid = Grid(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny),
                  static_cast<std::size_t>(nz), h);
  const int dim = sim.grid.dim();

  sim.target_mass = cfg.get_double("target_mass", 1.0);
  sim.output_every = static_cast<int>(cfg.get_long("output_every", 0));
  if (auto solver = cfg.get("solver")) {
    try {
      sim.solver = parse_solver_kind(*solver);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), cfg.line_of("solver"));
    }
  }
  if (auto out = cfg.get("out_dir")) rs.out_dir = *out;
  if (auto fmt = cfg.get("snapshot_format")) {
    if (*fmt == "text") {
      rs.snapshot_format = SnapshotFormat::text;
    } else if (*fmt == "binary") {
      rs.snapshot_format = SnapshotFormat::binary;
    } else {
      throw ConfigError("snapshot_format must be text or binary", cfg.line_of("snapshot_format"));
    }
  }

  InitShape& init = sim.init;
  const long seed = cfg.get_long("seed", 1);
  if (seed < 0) throw ConfigError("seed must be nonnegative", cfg.line_of("seed"));
  init.seed = static_cast<std::uint64_t>(seed);
  const std::string shape = cfg.require("init.shape");
  const int shape_line = cfg.line_of("init.shape");
  auto read_center = [&]() {
    std::array<double, 3> c{0.5 * lx, 0.5 * ly, nz > 1 ? 0.5 * cfg.get_double("lz") : 0.0};
    if (cfg.has("init.center")) {
      const auto v = cfg.get_list("init.center");
      if (static_cast<int>(v.size()) != dim) {
        throw ConfigError("init.center needs " + std::to_string(dim) + " coordinates",
                          cfg.line_of("init.center"));
      }
      std::copy(v.begin(), v.end(), c.begin());
    }
    return c;
  };
  auto positive = [&](const std::string& key) {
    const double v = cfg.get_double(key);
    if (!(v > 0.0)) throw ConfigError("key '" + key + "' must be positive", cfg.line_of(key));
    return v;
  };
  if (shape == "disk") {
    init.kind = ShapeKind::disks;
    Ball b;
    b.center = read_center();
    if (cfg.has("init.area")) {
      const double area = positive("init.area");
      b.radius = dim == 3 ? std::cbrt(3.0 * area / (4.0 * std::numbers::pi))
                          : std::sqrt(area / std::numbers::pi);
    } else {
      b.radius = positive("init.radius");
    }
    init.balls = {b};
  } else if (shape == "disks") {
    init.kind = ShapeKind::disks;
    std::string text = cfg.require("init.disks");
    const int line = cfg.line_of("init.disks");
    for (const std::string& item : split(text, ';')) {
      std::vector<double> v;
      for (const std::string& tok : split(item, ',')) v.push_back(parse_double(tok, "init.disks", line));
      if (static_cast<int>(v.size()) != dim + 1) {
        throw ConfigError("init.disks entries are 'x, y[, z], r' separated by ';'", line);
      }
      Ball b;
      std::copy(v.begin(), v.begin() + dim, b.center.begin());
      b.radius = v[static_cast<std::size_t>(dim)];
      if (!(b.radius > 0.0)) throw ConfigError("disk radius must be positive", line);
      init.balls.push_back(b);
    }
    if (init.balls.empty()) throw ConfigError("init.disks is empty", line);
  } else if (shape == "annulus") {
    init.kind = ShapeKind::annulus;
    init.center = read_center();
    init.radius = positive("init.radius");
    init.inner_radius = positive("init.inner_radius");
  } else if (shape == "perturbed_disk") {
    init.kind = ShapeKind::perturbed_disk;
    init.center = read_center();
    init.amplitude = cfg.get_double("init.amplitude", 0.0);
    if (cfg.has("init.modes")) {
      for (double m : cfg.get_list("init.modes")) init.modes.push_back(static_cast<int>(m));
    }
    if (cfg.has("init.area")) {
      const double m = static_cast<double>(init.modes.empty() ? 5 : init.modes.size());
      init.radius = std::sqrt(positive("init.area") /
                              (std::numbers::pi * (1.0 + 0.5 * m * init.amplitude * init.amplitude)));
    } else {
      init.radius = positive("init.radius");
    }
  } else {
    throw ConfigError("init.shape must be disk, disks, annulus or perturbed_disk", shape_line);
  }
  if (cfg.has("init.scale_to_mass")) {
    rs.scale_to_mass = parse_bool(*cfg.get("init.scale_to_mass"), "init.scale_to_mass",
                                  cfg.line_of("init.scale_to_mass"));
  }
  if (rs.scale_to_mass) {
    if (init.kind != ShapeKind::disks) {
      throw ConfigError("init.scale_to_mass applies to disk shapes only",
                        cfg.line_of("init.scale_to_mass"));
    }
    scale_balls_to_volume(init, sim.target_mass, dim);
  }

  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rs;
}

// ---- CSV --------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::string& records_header() {
  static const std::string header =
      "t,ell,lambda,energy_J,energy_J_alt,dissipation_cum,mass_rho,forcing_l2_cum,area,perimeter,"
      "radius";
  return header;
}

std::string format_record(const StepRecord& r) {
  const double values[] = {r.t,           r.ell,           r.lambda,         r.energy_J,
                           r.energy_J_alt, r.dissipation_cum, r.mass_rho,     r.forcing_l2_cum,
                           r.area_over_half, r.perimeter_ms, r.radius_est};
  std::string line;
  for (std::size_t k = 0; k < std::size(values); ++k) {
    if (k > 0) line += ',';
    line += format_double(values[k]);
  }
  return line;
}

void write_records_csv(std::ostream& out, const std::vector<StepRecord>& records) {
  out << records_header() << '\n';
  for (const StepRecord& r : records) out << format_record(r) << '\n';
}

std::vector<StepRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != records_header()) {
    throw std::runtime_error("records CSV: unexpected header");
  }
  std::vector<StepRecord> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<double> v;
    std::istringstream fields(line);
    std::string tok;
    while (std::getline(fields, tok, ',')) v.push_back(parse_double(tok, "csv", row));
    if (v.size() != 11) throw std::runtime_error("records CSV: row " + std::to_string(row) + " has wrong width");
    StepRecord r;
    r.t = v[0];
    r.ell = v[1];
    r.lambda = v[2];
    r.energy_J = v[3];
    r.energy_J_alt = v[4];
    r.dissipation_cum = v[5];
    r.mass_rho = v[6];
    r.forcing_l2_cum = v[7];
    r.area_over_half = v[8];
    r.perimeter_ms = v[9];
    r.radius_est = v[10];
    out.push_back(r);
  }
  return out;
}

// ---- Snapshots --------------------------------------------------------------

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap, SnapshotFormat format) {
  const Grid& g = snap.field.grid;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
  out << "pks-snapshot v1 field=" << snap.name << " dims=" << g.dim() << " nx=" << g.nx
      << " ny=" << g.ny << " nz=" << g.nz << " h=" << format_double(g.h)
      << " t=" << format_double(snap.t) << " eps=" << format_double(snap.epsilon)
      << " A=" << format_double(snap.A) << " mass=" << format_double(snap.target_mass)
      << " format=" << (format == SnapshotFormat::text ? "text" : "binary") << '\n';
  if (format == SnapshotFormat::text) {
    for (double v : snap.field.values) out << format_double(v) << '\n';
  } else {
    static_assert(std::endian::native == std::endian::little, "binary snapshots are little-endian");
    out.write(reinterpret_cast<const char*>(snap.field.values.data()),
              static_cast<std::streamsize>(snap.field.values.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing snapshot " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "pks-snapshot" || version != "v1") {
    throw std::runtime_error("not a pks snapshot: " + path.string());
  }
  std::map<std::string, std::string> kv;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto need = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end()) throw std::runtime_error("snapshot header lacks '" + k + "'");
    return it->second;
  };
  Snapshot snap;
  snap.name = need("field");
  const Grid g(static_cast<std::size_t>(parse_long(need("nx"), "nx", 1)),
               static_cast<std::size_t>(parse_long(need("ny"), "ny", 1)),
               static_cast<std::size_t>(parse_long(need("nz"), "nz", 1)),
               parse_double(need("h"), "h", 1));
  snap.t = parse_double(need("t"), "t", 1);
  snap.epsilon = parse_double(need("eps"), "eps", 1);
  snap.A = parse_double(need("A"), "A", 1);
  if (kv.count("mass") != 0) snap.target_mass = parse_double(kv["mass"], "mass", 1);
  snap.field = ScalarField(g, 0.0);
  if (need("format") == "text") {
    std::string line;
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (!std::getline(in, line)) throw std::runtime_error("snapshot truncated");
      snap.field[n] = parse_double(line, "value", static_cast<int>(n + 2));
    }
  } else {
    in.read(reinterpret_cast<char*>(snap.field.values.data()),
            static_cast<std::streamsize>(g.size() * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot truncated");
  }
  return snap;
}

}  // namespace pks::io
