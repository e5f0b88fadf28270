#ifndef SNS_CONFIG_HPP
#define SNS_CONFIG_HPP

#include "sns/estimators.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace sns {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field given by preset name or by a CSV file ("k1,k2,re,im").
/// Presets: zero, small, e10, e01.
struct FieldSpec {
  std::string preset = "zero";
  std::string file;  // takes precedence when non-empty

  /// Relative files resolve against `base`.
  Field resolve(const GridPtr& grid, const std::filesystem::path& base = {}) const;
  bool operator==(const FieldSpec&) const = default;
};

struct ModeAmplitude {
  int k1 = 0;
  int k2 = 0;
  double q = 0.0;
  bool operator==(const ModeAmplitude&) const = default;
};

struct TestFunctionSpec {
  std::string kind = "gauss_bump";  // gauss_bump | coordinate_sigmoid | constant
  FieldSpec center;
  FieldSpec direction{"e10", ""};
  double scale = 0.3;
  double amplitude = 0.5;
  double value = 1.0;  // constant only
  int projection = 0;

  TestFunction resolve(const GridPtr& grid, const std::filesystem::path& base = {}) const;
  bool operator==(const TestFunctionSpec&) const = default;
};

struct ExperimentConfig {
  // grid and physics
  int N = 8;
  double nu = 0.25;
  int N0 = 2;
  double q = 0.1;  // uniform amplitude on |k| <= N0
  std::vector<ModeAmplitude> q_modes;  // per-mode overrides of q

  // integrator
  double dt = 1e-2;
  double T = 4.0;
  bool nonlinear = true;
  double blowup_norm = 1e6;
  bool nu_in_control = true;

  // initial conditions: y0 = x0 + s * direction for each separation s
  FieldSpec x0{"small", ""};
  FieldSpec direction{"e10", ""};
  std::vector<double> separations = {0.01, 0.1, 0.5};

  // estimator settings
  long n_paths = 10000;
  std::uint64_t seed = 1;
  int bootstrap_resamples = 200;
  std::vector<double> t_grid = {1.0, 2.0, 4.0};
  std::vector<double> exp_moment_times = {1.0, 2.0};
  std::vector<double> zh_t_grid = {1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0};
  double zh_separation = 0.1;
  std::vector<int> p_list = {1, 2};
  std::vector<double> dgamma_times = {0.5, 1.0, 2.0, 4.0};
  std::vector<double> gammas = {0.1, 0.5, 1.0};
  int dictionary_size = 32;
  std::vector<FieldSpec> probe_directions = {FieldSpec{"e10", ""}};
  std::vector<double> probe_eps = {0.01};
  std::vector<double> probe_times = {0.0, 1.0, 2.0, 4.0};
  double constant_scale = 1.0;
  std::vector<TestFunctionSpec> test_functions = default_test_functions();

  // experiment selection
  bool run_entropy = true;
  bool run_mlh = true;
  bool run_gradient_probe = true;

  // identity suite
  long identity_trials = 10000;
  bool corrupt_projection = false;

  /// Base directory for relative field files.
  std::filesystem::path base_dir;

  static std::vector<TestFunctionSpec> default_test_functions();

  bool operator==(const ExperimentConfig&) const = default;

  /// Grid, workspace and noise; the workspace build dominates for large N.
  Model model() const;
  Field x0_field(const GridPtr& grid) const;
  /// Unit field along `direction`.
  Field direction_field(const GridPtr& grid) const;
  std::vector<TestFunction> functions(const GridPtr& grid) const;
  SimConfig sim() const;
  /// Throws ConfigError on values no command can use.
  void validate() const;
};

/// Parses a config object. Missing keys keep their defaults; unknown keys
/// are rejected.
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& c);

/// Reads a config file; relative field files resolve against its directory.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace sns

#endif  // SNS_CONFIG_HPP
