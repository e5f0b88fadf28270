#include "sns/config.hpp"

#include "sns/field_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sns {

using json = nlohmann::ordered_json;

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

FieldSpec field_from_json(const json& j, const std::string& where) {
  FieldSpec f;
  if (j.is_string()) {
    f.preset = j.get<std::string>();
    return f;
  }
  reject_unknown(j, where, {"preset", "file"});
  read(j, "preset", f.preset, where);
  read(j, "file", f.file, where);
  return f;
}

json field_to_json(const FieldSpec& f) {
  json j;
  j["preset"] = f.preset;
  j["file"] = f.file;
  return j;
}

TestFunctionSpec function_from_json(const json& j, const std::string& where) {
  reject_unknown(j, where, {"kind", "center", "direction", "scale", "amplitude", "value", "projection"});
  TestFunctionSpec f;
  read(j, "kind", f.kind, where);
  if (j.contains("center")) f.center = field_from_json(j["center"], where + ".center");
  if (j.contains("direction")) f.direction = field_from_json(j["direction"], where + ".direction");
  read(j, "scale", f.scale, where);
  read(j, "amplitude", f.amplitude, where);
  read(j, "value", f.value, where);
  read(j, "projection", f.projection, where);
  return f;
}

json function_to_json(const TestFunctionSpec& f) {
  json j;
  j["kind"] = f.kind;
  j["center"] = field_to_json(f.center);
  j["direction"] = field_to_json(f.direction);
  j["scale"] = f.scale;
  j["amplitude"] = f.amplitude;
  j["value"] = f.value;
  j["projection"] = f.projection;
  return j;
}

std::vector<FieldSpec> fields_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<FieldSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(field_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void require_times(const std::vector<double>& ts, double dt, const std::string& name) {
  try {
    (void)time_nodes(ts, dt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

}  // namespace

Field FieldSpec::resolve(const GridPtr& grid, const std::filesystem::path& base) const {
  if (!file.empty()) {
    std::filesystem::path p(file);
    if (p.is_relative() && !base.empty()) p = base / p;
    return read_field_csv(p.string(), grid);
  }
  const double r = std::sqrt(0.5);
  if (preset == "zero") return Field::zero(grid);
  if (preset == "small") return Field::single_mode(grid, Wavevector(1, 1), {0.05, 0.05});
  if (preset == "e10") return Field::single_mode(grid, Wavevector(1, 0), {r, 0.0});
  if (preset == "e01") return Field::single_mode(grid, Wavevector(0, 1), {r, 0.0});
  throw ConfigError("unknown field preset '" + preset + "'");
}

TestFunction TestFunctionSpec::resolve(const GridPtr& grid, const std::filesystem::path& base) const {
  TestFunction f;
  if (kind == "gauss_bump") {
    f = TestFunction::gauss_bump(center.resolve(grid, base), scale, amplitude, projection);
  } else if (kind == "coordinate_sigmoid") {
    const Field e = direction.resolve(grid, base);
    if (norm(e) == 0.0) throw ConfigError("coordinate_sigmoid: zero direction");
    f = TestFunction::coordinate_sigmoid(center.resolve(grid, base), e, scale, amplitude);
  } else if (kind == "constant") {
    f = TestFunction::constant(grid, value);
  } else {
    throw ConfigError("unknown test function kind '" + kind + "'");
  }
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("test function: ") + e.what());
  }
  return f;
}

std::vector<TestFunctionSpec> ExperimentConfig::default_test_functions() {
  TestFunctionSpec sigmoid;
  sigmoid.kind = "coordinate_sigmoid";
  sigmoid.center = FieldSpec{"zero", ""};
  sigmoid.direction = FieldSpec{"e10", ""};
  sigmoid.scale = 0.09;
  sigmoid.amplitude = 0.5;

  TestFunctionSpec bump;
  bump.kind = "gauss_bump";
  bump.center = FieldSpec{"zero", ""};
  bump.scale = 0.3;
  bump.amplitude = 0.5;
  bump.projection = 2;
  return {sigmoid, bump};
}

Model ExperimentConfig::model() const {
  auto grid = SpectralGrid::make(N);
  Eigen::ArrayXd qk = Eigen::ArrayXd::Zero(grid->size());
  for (Index i = 0; i < grid->size(); ++i) {
    if (grid->k2()[i] <= double(N0) * N0) qk[i] = q;
  }
  for (const ModeAmplitude& m : q_modes) {
    const auto loc = grid->locate(Wavevector(m.k1, m.k2));
    if (!loc) throw ConfigError("noise.modes: wavevector outside truncation");
    qk[loc->half] = m.q;
  }
  return Model(grid, PhysicsParams{nu, N0}, NoiseOperator(grid, N0, qk));
}

Field ExperimentConfig::x0_field(const GridPtr& grid) const { return x0.resolve(grid, base_dir); }

Field ExperimentConfig::direction_field(const GridPtr& grid) const {
  Field e = direction.resolve(grid, base_dir);
  const double n = norm(e);
  if (n == 0.0) throw ConfigError("initial.direction: zero field");
  return (1.0 / n) * e;
}

std::vector<TestFunction> ExperimentConfig::functions(const GridPtr& grid) const {
  std::vector<TestFunction> out;
  for (const auto& f : test_functions) out.push_back(f.resolve(grid, base_dir));
  return out;
}

SimConfig ExperimentConfig::sim() const {
  SimConfig s;
  s.dt = dt;
  s.n_paths = n_paths;
  s.seed = seed;
  s.step.nonlinear = nonlinear;
  s.step.blowup_norm = blowup_norm;
  s.control.nu_in_control = nu_in_control;
  s.bootstrap_resamples = bootstrap_resamples;
  return s;
}

void ExperimentConfig::validate() const {
  if (N < 1) throw ConfigError("grid.N must be >= 1");
  if (!(nu > 0.0)) throw ConfigError("physics.nu must be > 0");
  if (N0 < 1 || N0 > N) throw ConfigError("physics.N0 must lie in [1, N]");
  if (!(q >= 0.0)) throw ConfigError("noise.q must be >= 0");
  for (const auto& m : q_modes) {
    if (!(m.q >= 0.0)) throw ConfigError("noise.modes: q must be >= 0");
    if (m.k1 * m.k1 + m.k2 * m.k2 > N0 * N0) throw ConfigError("noise.modes: mode above N0");
  }
  if (!(dt > 0.0)) throw ConfigError("integrator.dt must be > 0");
  try {
    (void)step_count(T, dt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("integrator.T: ") + e.what());
  }
  if (!(blowup_norm > 0.0)) throw ConfigError("integrator.blowup_norm must be > 0");
  if (n_paths < 2) throw ConfigError("estimators.n_paths must be >= 2");
  if (bootstrap_resamples < 1) throw ConfigError("estimators.bootstrap_resamples must be >= 1");
  for (double s : separations) {
    if (!(s >= 0.0)) throw ConfigError("initial.separations must be >= 0");
  }
  if (!(zh_separation >= 0.0)) throw ConfigError("estimators.zh_separation must be >= 0");
  require_times(t_grid, dt, "estimators.t_grid");
  require_times(exp_moment_times, dt, "estimators.exp_moment_times");
  require_times(zh_t_grid, dt, "estimators.zh_t_grid");
  require_times(dgamma_times, dt, "estimators.dgamma_times");
  require_times(probe_times, dt, "estimators.probe_times");
  for (int p : p_list) {
    if (p < 1) throw ConfigError("estimators.p_list entries must be >= 1");
  }
  for (double g : gammas) {
    if (!(g > 0.0)) throw ConfigError("estimators.gammas must be > 0");
  }
  for (double e : probe_eps) {
    if (!(e > 0.0)) throw ConfigError("estimators.probe_eps must be > 0");
  }
  if (dictionary_size < 1) throw ConfigError("estimators.dictionary_size must be >= 1");
  if (!(constant_scale > 0.0)) throw ConfigError("estimators.constant_scale must be > 0");
  if (identity_trials < 1) throw ConfigError("identities.trials must be >= 1");
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, "config", {"grid", "physics", "noise", "integrator", "initial", "estimators",
                               "test_functions", "experiments", "identities"});
  ExperimentConfig c;
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, "grid", {"N"});
    read(g, "N", c.N, "grid");
  }
  if (j.contains("physics")) {
    const json& p = j["physics"];
    reject_unknown(p, "physics", {"nu", "N0"});
    read(p, "nu", c.nu, "physics");
    read(p, "N0", c.N0, "physics");
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    reject_unknown(n, "noise", {"q", "modes"});
    read(n, "q", c.q, "noise");
    if (n.contains("modes")) {
      if (!n["modes"].is_array()) throw ConfigError("noise.modes: expected an array");
      for (const json& m : n["modes"]) {
        reject_unknown(m, "noise.modes", {"k", "q"});
        ModeAmplitude a;
        std::vector<int> k;
        read(m, "k", k, "noise.modes");
        if (k.size() != 2) throw ConfigError("noise.modes.k: expected [k1, k2]");
        a.k1 = k[0];
        a.k2 = k[1];
        read(m, "q", a.q, "noise.modes");
        c.q_modes.push_back(a);
      }
    }
  }
  if (j.contains("integrator")) {
    const json& i = j["integrator"];
    reject_unknown(i, "integrator", {"dt", "T", "nonlinear", "blowup_norm", "nu_in_control"});
    read(i, "dt", c.dt, "integrator");
    read(i, "T", c.T, "integrator");
    read(i, "nonlinear", c.nonlinear, "integrator");
    read(i, "blowup_norm", c.blowup_norm, "integrator");
    read(i, "nu_in_control", c.nu_in_control, "integrator");
  }
  if (j.contains("initial")) {
    const json& i = j["initial"];
    reject_unknown(i, "initial", {"x0", "direction", "separations"});
    if (i.contains("x0")) c.x0 = field_from_json(i["x0"], "initial.x0");
    if (i.contains("direction")) c.direction = field_from_json(i["direction"], "initial.direction");
    read(i, "separations", c.separations, "initial");
  }
  if (j.contains("estimators")) {
    const json& e = j["estimators"];
    const std::string w = "estimators";
    reject_unknown(e, w, {"n_paths", "seed", "bootstrap_resamples", "t_grid", "exp_moment_times",
                          "zh_t_grid", "zh_separation", "p_list", "dgamma_times", "gammas",
                          "dictionary_size", "probe_directions", "probe_eps", "probe_times",
                          "constant_scale"});
    read(e, "n_paths", c.n_paths, w);
    read(e, "seed", c.seed, w);
    read(e, "bootstrap_resamples", c.bootstrap_resamples, w);
    read(e, "t_grid", c.t_grid, w);
    read(e, "exp_moment_times", c.exp_moment_times, w);
    read(e, "zh_t_grid", c.zh_t_grid, w);
    read(e, "zh_separation", c.zh_separation, w);
    read(e, "p_list", c.p_list, w);
    read(e, "dgamma_times", c.dgamma_times, w);
    read(e, "gammas", c.gammas, w);
    read(e, "dictionary_size", c.dictionary_size, w);
    if (e.contains("probe_directions")) {
      c.probe_directions = fields_from_json(e["probe_directions"], w + ".probe_directions");
    }
    read(e, "probe_eps", c.probe_eps, w);
    read(e, "probe_times", c.probe_times, w);
    read(e, "constant_scale", c.constant_scale, w);
  }
  if (j.contains("test_functions")) {
    const json& fs = j["test_functions"];
    if (!fs.is_array()) throw ConfigError("test_functions: expected an array");
    c.test_functions.clear();
    for (std::size_t i = 0; i < fs.size(); ++i) {
      c.test_functions.push_back(function_from_json(fs[i], "test_functions[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("experiments")) {
    const json& x = j["experiments"];
    reject_unknown(x, "experiments", {"entropy", "mlh", "gradient_probe"});
    read(x, "entropy", c.run_entropy, "experiments");
    read(x, "mlh", c.run_mlh, "experiments");
    read(x, "gradient_probe", c.run_gradient_probe, "experiments");
  }
  if (j.contains("identities")) {
    const json& d = j["identities"];
    reject_unknown(d, "identities", {"trials", "corrupt_projection"});
    read(d, "trials", c.identity_trials, "identities");
    read(d, "corrupt_projection", c.corrupt_projection, "identities");
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["grid"]["N"] = c.N;
  j["physics"]["nu"] = c.nu;
  j["physics"]["N0"] = c.N0;
  j["noise"]["q"] = c.q;
  j["noise"]["modes"] = json::array();
  for (const auto& m : c.q_modes) {
    json row;
    row["k"] = {m.k1, m.k2};
    row["q"] = m.q;
    j["noise"]["modes"].push_back(row);
  }
  j["integrator"]["dt"] = c.dt;
  j["integrator"]["T"] = c.T;
  j["integrator"]["nonlinear"] = c.nonlinear;
  j["integrator"]["blowup_norm"] = c.blowup_norm;
  j["integrator"]["nu_in_control"] = c.nu_in_control;
  j["initial"]["x0"] = field_to_json(c.x0);
  j["initial"]["direction"] = field_to_json(c.direction);
  j["initial"]["separations"] = c.separations;
  json& e = j["estimators"];
  e["n_paths"] = c.n_paths;
  e["seed"] = c.seed;
  e["bootstrap_resamples"] = c.bootstrap_resamples;
  e["t_grid"] = c.t_grid;
  e["exp_moment_times"] = c.exp_moment_times;
  e["zh_t_grid"] = c.zh_t_grid;
  e["zh_separation"] = c.zh_separation;
  e["p_list"] = c.p_list;
  e["dgamma_times"] = c.dgamma_times;
  e["gammas"] = c.gammas;
  e["dictionary_size"] = c.dictionary_size;
  e["probe_directions"] = json::array();
  for (const auto& d : c.probe_directions) e["probe_directions"].push_back(field_to_json(d));
  e["probe_eps"] = c.probe_eps;
  e["probe_times"] = c.probe_times;
  e["constant_scale"] = c.constant_scale;
  j["test_functions"] = json::array();
  for (const auto& f : c.test_functions) j["test_functions"].push_back(function_to_json(f));
  j["experiments"]["entropy"] = c.run_entropy;
  j["experiments"]["mlh"] = c.run_mlh;
  j["experiments"]["gradient_probe"] = c.run_gradient_probe;
  j["identities"]["trials"] = c.identity_trials;
  j["identities"]["corrupt_projection"] = c.corrupt_projection;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  c.base_dir = path.parent_path();
  return c;
}

}  // namespace sns
