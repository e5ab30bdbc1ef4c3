#include "npsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "npsim/errors.hpp"
#include "npsim/nernst_planck.hpp"

namespace npsim {
namespace {

using json = nlohmann::json;

// Typed access to one JSON object with strict key checking.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object", path_);
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!ok.count(it.key())) throw ConfigError("unknown key '" + key(it.key()) + "'", key(it.key()));
    }
  }

  bool has(const char* k) const { return j_.contains(k); }
  const json& raw(const char* k) const { return j_.at(k); }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  Node child(const char* k) const { return Node(j_.at(k), key(k)); }

  double number(const char* k, std::optional<double> fallback = std::nullopt) const {
    if (!has(k)) return require(k, fallback);
    const auto& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(key(k) + " must be a number", key(k));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k) + " must be finite", key(k));
    return d;
  }

  long long integer(const char* k, std::optional<long long> fallback = std::nullopt) const {
    if (!has(k)) return require(k, fallback);
    const auto& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError(key(k) + " must be an integer", key(k));
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const char* k, std::uint64_t fallback) const {
    if (!has(k)) return fallback;
    const auto& v = j_.at(k);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      throw ConfigError(key(k) + " must be a nonnegative integer", key(k));
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* k, bool fallback) const {
    if (!has(k)) return fallback;
    const auto& v = j_.at(k);
    if (!v.is_boolean()) throw ConfigError(key(k) + " must be true or false", key(k));
    return v.get<bool>();
  }

  std::string string(const char* k, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(k)) return require(k, fallback);
    const auto& v = j_.at(k);
    if (!v.is_string()) throw ConfigError(key(k) + " must be a string", key(k));
    return v.get<std::string>();
  }

  const std::string& path() const noexcept { return path_; }

 private:
  template <class T>
  T require(const char* k, const std::optional<T>& fallback) const {
    if (!fallback) throw ConfigError("missing required key '" + key(k) + "'", key(k));
    return *fallback;
  }
  std::string where() const { return path_.empty() ? std::string("config") : path_; }

  const json& j_;
  std::string path_;
};

template <class T>
std::vector<T> array_of(const Node& n, const char* k, std::size_t expected) {
  const auto key = n.key(k);
  if (!n.has(k)) throw ConfigError("missing required key '" + key + "'", key);
  const auto& v = n.raw(k);
  if (!v.is_array() || v.size() != expected) {
    throw ConfigError(key + " must be an array of " + std::to_string(expected) + " entries", key);
  }
  std::vector<T> out;
  for (const auto& e : v) {
    if constexpr (std::is_integral_v<T>) {
      if (!e.is_number_integer()) throw ConfigError(key + " entries must be integers", key);
    } else {
      if (!e.is_number()) throw ConfigError(key + " entries must be numbers", key);
    }
    out.push_back(e.get<T>());
  }
  return out;
}

template <class E>
E pick(const std::string& value, const std::string& key, std::initializer_list<std::pair<const char*, E>> options) {
  std::string lower = value;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  std::string names;
  for (const auto& [name, e] : options) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
    if (n == lower) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(key + ": unknown value '" + value + "' (expected one of " + names + ")", key);
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(text.size(), byte > 0 ? byte - 1 : 0);
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

GridConfig read_grid(const Node& n) {
  n.allow({"dim", "cells", "lengths"});
  GridConfig g;
  g.dim = static_cast<int>(n.integer("dim", 2));
  if (g.dim != 2 && g.dim != 3) throw ConfigError("grid.dim must be 2 or 3", "grid.dim");
  const auto cells = array_of<int>(n, "cells", static_cast<std::size_t>(g.dim));
  std::vector<double> lengths(static_cast<std::size_t>(g.dim), 1.0);
  if (n.has("lengths")) lengths = array_of<double>(n, "lengths", static_cast<std::size_t>(g.dim));
  for (int a = 0; a < g.dim; ++a) {
    g.cells[a] = cells[a];
    g.lengths[a] = lengths[a];
  }
  return g;
}

PhysicalParams read_params(const Node& n) {
  n.allow({"epsilon", "K", "nu", "tau", "fluid_model"});
  PhysicalParams p;
  p.epsilon = n.number("epsilon", 1.0);
  p.K = n.number("K", 1.0);
  p.nu = n.number("nu", 1.0);
  p.tau = n.number("tau", 1.0);
  p.fluid_model = pick<FluidModel>(n.string("fluid_model", std::string("NPS")), n.key("fluid_model"),
                                   {{"NPNS", FluidModel::NPNS}, {"NPS", FluidModel::NPS}, {"Frozen", FluidModel::Frozen}});
  return p;
}

ProfileSpec read_profile(const Node& n) {
  n.allow({"profile", "base", "amplitude", "center", "width", "modes"});
  ProfileSpec p;
  p.kind = pick<ProfileKind>(n.string("profile", std::string("uniform")), n.key("profile"),
                             {{"uniform", ProfileKind::Uniform},
                              {"gaussian", ProfileKind::Gaussian},
                              {"cosine", ProfileKind::Cosine},
                              {"checkerboard", ProfileKind::Checkerboard},
                              {"random", ProfileKind::Random}});
  p.base = n.number("base", 1.0);
  p.amplitude = n.number("amplitude", 0.0);
  p.width = n.number("width", 0.1);
  if (!(p.width > 0.0)) throw ConfigError(n.key("width") + " must be > 0", n.key("width"));
  if (n.has("center")) {
    const auto& v = n.raw("center");
    if (!v.is_array() || v.size() < 2 || v.size() > 3) {
      throw ConfigError(n.key("center") + " must list 2 or 3 coordinates", n.key("center"));
    }
    for (std::size_t a = 0; a < v.size(); ++a) {
      if (!v[a].is_number()) throw ConfigError(n.key("center") + " entries must be numbers", n.key("center"));
      p.center[a] = v[a].get<double>();
    }
  }
  if (n.has("modes")) {
    const auto& v = n.raw("modes");
    if (!v.is_array() || v.size() < 2 || v.size() > 3) {
      throw ConfigError(n.key("modes") + " must list 2 or 3 integers", n.key("modes"));
    }
    for (std::size_t a = 0; a < v.size(); ++a) {
      if (!v[a].is_number_integer()) throw ConfigError(n.key("modes") + " entries must be integers", n.key("modes"));
      p.modes[a] = v[a].get<int>();
    }
  }
  return p;
}

SpeciesSpec read_species(const Node& n, std::size_t i) {
  n.allow({"name", "valence", "diffusivity", "bc", "gamma", "initial"});
  SpeciesSpec s;
  s.name = n.string("name", "c" + std::to_string(i));
  s.valence = n.number("valence");
  s.diffusivity = n.number("diffusivity", 1.0);
  s.bc = pick<SpeciesBc>(n.string("bc", std::string("blocking")), n.key("bc"),
                         {{"blocking", SpeciesBc::Blocking}, {"dirichlet", SpeciesBc::Dirichlet}});
  if (s.bc == SpeciesBc::Dirichlet) {
    s.gamma = n.number("gamma");
  } else if (n.has("gamma")) {
    throw ConfigError(n.key("gamma") + " only applies to dirichlet walls", n.key("gamma"));
  }
  if (n.has("initial")) s.initial = read_profile(n.child("initial"));
  if (!(s.diffusivity > 0.0)) {
    throw ConfigError(n.key("diffusivity") + " must be > 0", n.key("diffusivity"));
  }
  if (s.bc == SpeciesBc::Dirichlet && !(s.gamma > 0.0)) {
    throw ConfigError(n.key("gamma") +
                          " must be > 0: a selective membrane holds a strictly positive wall concentration",
                      n.key("gamma"));
  }
  return s;
}

XiSpec read_xi(const Node& n) {
  n.allow({"kind", "value", "axis", "slope", "amplitude", "wavenumber", "path"});
  XiSpec x;
  x.kind = pick<XiKind>(n.string("kind", std::string("constant")), n.key("kind"),
                        {{"constant", XiKind::Constant},
                         {"linear", XiKind::Linear},
                         {"sinusoidal", XiKind::Sinusoidal},
                         {"table", XiKind::Table}});
  x.value = n.number("value", 0.0);
  x.axis = static_cast<int>(n.integer("axis", 0));
  x.slope = n.number("slope", 0.0);
  x.amplitude = n.number("amplitude", 0.0);
  x.wavenumber = n.number("wavenumber", 1.0);
  x.path = n.string("path", std::string());
  if (x.kind == XiKind::Table && x.path.empty()) {
    throw ConfigError(n.key("path") + " is required for a tabulated xi", n.key("path"));
  }
  return x;
}

RunConfig read_run(const Node& n) {
  n.allow({"dt", "t_end", "sample_every", "seed", "rho_sigma_shadow"});
  RunConfig r;
  if (n.has("dt")) {
    const auto& v = n.raw("dt");
    if (v.is_string()) {
      if (v.get<std::string>() != "auto") throw ConfigError("run.dt must be a number or \"auto\"", "run.dt");
    } else {
      r.dt = n.number("dt");
    }
  }
  r.t_end = n.number("t_end");
  r.sample_every = static_cast<int>(n.integer("sample_every", 10));
  r.seed = n.unsigned_integer("seed", 0);
  r.rho_sigma_shadow = n.boolean("rho_sigma_shadow", false);
  return r;
}

OutputConfig read_output(const Node& n) {
  n.allow({"directory", "formats", "field_every"});
  OutputConfig o;
  o.directory = n.string("directory", std::string("out"));
  if (n.has("formats")) {
    const auto& v = n.raw("formats");
    if (!v.is_array()) throw ConfigError("output.formats must be an array", "output.formats");
    o.diagnostics = false;
    o.fields = false;
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError("output.formats entries must be strings", "output.formats");
      const auto s = e.get<std::string>();
      if (s == "diagnostics") {
        o.diagnostics = true;
      } else if (s == "fields") {
        o.fields = true;
      } else {
        throw ConfigError("output.formats: unknown format '" + s + "' (expected diagnostics, fields)",
                          "output.formats");
      }
    }
  }
  o.field_every = static_cast<int>(n.integer("field_every", 0));
  return o;
}

CheckpointConfig read_checkpoint(const Node& n) {
  n.allow({"every_n_steps", "path"});
  CheckpointConfig c;
  c.every_n_steps = n.unsigned_integer("every_n_steps", 0);
  c.path = n.string("path", std::string());
  return c;
}

SimConfig from_json(const json& doc) {
  Node root(doc, "");
  root.allow({"grid", "params", "species", "boundary", "run", "output", "checkpoint"});
  SimConfig c;
  if (!root.has("grid")) throw ConfigError("missing required key 'grid'", "grid");
  c.grid = read_grid(root.child("grid"));
  if (root.has("params")) c.params = read_params(root.child("params"));
  if (!root.has("species")) throw ConfigError("missing required key 'species'", "species");
  const auto& sp = root.raw("species");
  if (!sp.is_array() || sp.empty()) throw ConfigError("species must be a non-empty array", "species");
  for (std::size_t i = 0; i < sp.size(); ++i) {
    c.species.push_back(read_species(Node(sp[i], "species[" + std::to_string(i) + "]"), i));
  }
  if (root.has("boundary")) {
    const Node b = root.child("boundary");
    b.allow({"xi"});
    if (b.has("xi")) c.xi = read_xi(b.child("xi"));
  }
  if (!root.has("run")) throw ConfigError("missing required key 'run'", "run");
  c.run = read_run(root.child("run"));
  if (root.has("output")) c.output = read_output(root.child("output"));
  if (root.has("checkpoint")) c.checkpoint = read_checkpoint(root.child("checkpoint"));
  validate(c);
  return c;
}

}  // namespace

Grid GridConfig::make() const {
  return make_grid(dim, std::span<const int>(cells.data(), static_cast<std::size_t>(dim)),
                   std::span<const double>(lengths.data(), static_cast<std::size_t>(dim)));
}

std::string SimConfig::checkpoint_path() const {
  if (!checkpoint.path.empty()) return checkpoint.path;
  return output.directory + "/checkpoint.bin";
}

void validate(const SimConfig& c) {
  (void)c.grid.make();
  if (!(c.params.epsilon > 0.0)) throw ConfigError("params.epsilon must be > 0", "params.epsilon");
  if (!(c.params.K > 0.0)) throw ConfigError("params.K must be > 0", "params.K");
  if (!(c.params.nu > 0.0)) throw ConfigError("params.nu must be > 0", "params.nu");
  if (!(c.params.tau > 0.0)) {
    throw ConfigError(
        "params.tau must be > 0: the Robin wall capacitance must be positive for the potential to be unique",
        "params.tau");
  }
  if (c.species.empty()) throw ConfigError("at least one species is required", "species");
  for (std::size_t i = 0; i < c.species.size(); ++i) {
    try {
      validate(c.species[i]);
    } catch (const ConfigError& e) {
      const auto field = e.key().substr(e.key().find('.') + 1);
      throw ConfigError(e.what(), "species[" + std::to_string(i) + "]." + field);
    }
  }
  if (c.xi.axis < 0 || c.xi.axis >= c.grid.dim) {
    throw ConfigError("boundary.xi.axis must name a grid axis", "boundary.xi.axis");
  }
  if (!(c.run.t_end > 0.0)) throw ConfigError("run.t_end must be > 0", "run.t_end");
  if (c.run.dt && !(*c.run.dt > 0.0)) throw ConfigError("run.dt must be > 0 or \"auto\"", "run.dt");
  if (c.run.sample_every < 1) throw ConfigError("run.sample_every must be >= 1", "run.sample_every");
  if (c.output.field_every < 0) throw ConfigError("output.field_every must be >= 0", "output.field_every");
  if (c.run.rho_sigma_shadow) {
    try {
      (void)common_valence_and_diffusivity(c.species);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("run.rho_sigma_shadow: ") + e.what(), "run.rho_sigma_shadow");
    }
  }
}

SimConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + line_column(text, e.byte) + ": " + e.what());
  }
  return from_json(doc);
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const SimConfig& c, int indent) {
  json doc;
  json grid;
  grid["dim"] = c.grid.dim;
  grid["cells"] = std::vector<int>(c.grid.cells.begin(), c.grid.cells.begin() + c.grid.dim);
  grid["lengths"] = std::vector<double>(c.grid.lengths.begin(), c.grid.lengths.begin() + c.grid.dim);
  doc["grid"] = grid;
  doc["params"] = {{"epsilon", c.params.epsilon},
                   {"K", c.params.K},
                   {"nu", c.params.nu},
                   {"tau", c.params.tau},
                   {"fluid_model", to_string(c.params.fluid_model)}};
  json species = json::array();
  for (const auto& s : c.species) {
    json e{{"name", s.name}, {"valence", s.valence}, {"diffusivity", s.diffusivity}, {"bc", to_string(s.bc)}};
    if (s.bc == SpeciesBc::Dirichlet) e["gamma"] = s.gamma;
    const auto& p = s.initial;
    e["initial"] = {{"profile", to_string(p.kind)},
                    {"base", p.base},
                    {"amplitude", p.amplitude},
                    {"center", p.center},
                    {"width", p.width},
                    {"modes", p.modes}};
    species.push_back(e);
  }
  doc["species"] = species;
  json xi{{"kind", to_string(c.xi.kind)},
          {"value", c.xi.value},
          {"axis", c.xi.axis},
          {"slope", c.xi.slope},
          {"amplitude", c.xi.amplitude},
          {"wavenumber", c.xi.wavenumber}};
  if (!c.xi.path.empty()) xi["path"] = c.xi.path;
  doc["boundary"] = {{"xi", xi}};
  json run{{"t_end", c.run.t_end},
           {"sample_every", c.run.sample_every},
           {"seed", c.run.seed},
           {"rho_sigma_shadow", c.run.rho_sigma_shadow}};
  if (c.run.dt) {
    run["dt"] = *c.run.dt;
  } else {
    run["dt"] = "auto";
  }
  doc["run"] = run;
  json formats = json::array();
  if (c.output.diagnostics) formats.push_back("diagnostics");
  if (c.output.fields) formats.push_back("fields");
  doc["output"] = {{"directory", c.output.directory}, {"formats", formats}, {"field_every", c.output.field_every}};
  doc["checkpoint"] = {{"every_n_steps", c.checkpoint.every_n_steps}, {"path", c.checkpoint.path}};
  return doc.dump(indent);
}

}  // namespace npsim
