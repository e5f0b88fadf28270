#include "sns/commands.hpp"

#include "sns/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sns {

using json = nlohmann::ordered_json;

namespace {

struct Context {
  const ExperimentConfig& cfg;
  Model model;
  BoundConstants c;
  HypothesisReport hypotheses;
  SimConfig sim;
  Field x0;
  Field direction;

  explicit Context(const ExperimentConfig& config)
      : cfg(config),
        model(config.model()),
        c(model.constants()),
        hypotheses(hypothesis_report(c, config.p_list)),
        sim(config.sim()),
        x0(config.x0_field(model.grid)),
        direction(config.direction_field(model.grid)) {}

  Field y0(double separation) const { return x0 + separation * direction; }
};

// Shortest round-trip text for doubles.
std::string cell(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}
template <typename T>
T cell(T x) requires(!std::is_floating_point_v<T>) { return x; }

class Csv {
 public:
  explicit Csv(const std::string& header) { os_ << header << '\n'; }

  template <typename T, typename... Rest>
  Csv& row(const T& first, const Rest&... rest) {
    os_ << cell(first);
    ((os_ << ',' << cell(rest)), ...);
    os_ << '\n';
    return *this;
  }

  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

json run_identities(const Context& ctx, CommandOutput& out) {
  IdentityOptions opt;
  opt.trials = ctx.cfg.identity_trials;
  opt.seed = ctx.cfg.seed;
  opt.corrupt_projection = ctx.cfg.corrupt_projection;
  const IdentityReport r = run_identity_suite(*ctx.model.ws, ctx.cfg.N0, opt);
  out.exit_code = r.pass() ? exit_pass : exit_violation;
  return to_json(r);
}

json run_moments(const Context& ctx, CommandOutput& out) {
  require(ctx.hypotheses, exp_moment_hypotheses());
  for (int p : ctx.cfg.p_list) require(ctx.hypotheses, zh_moment_hypotheses(p));

  bool pass = true;
  json exp_rows = json::array();
  Csv exp_csv("t,lhs,lhs_std_error,rhs,log_lhs,log_rhs,margin_sigmas,pass");
  for (double t : ctx.cfg.exp_moment_times) {
    const InequalityReport r = exp_moment_check(ctx.model, ctx.x0, t, ctx.sim);
    pass = pass && r.pass;
    exp_rows.push_back(to_json(r));
    exp_csv.row(t, r.lhs.mean, r.lhs.std_error, r.rhs, r.inputs.at("log_lhs"),
                r.inputs.at("log_rhs"), r.margin_sigmas, r.pass);
  }

  const Field y0 = ctx.y0(ctx.cfg.zh_separation);
  json zh_rows = json::array();
  Csv zh_csv("p,t,log_moment,log_ci_lo,log_ci_hi,log_envelope,pass");
  for (int p : ctx.cfg.p_list) {
    const ZhDecayReport r = zh_moment_decay(ctx.model, p, ctx.x0, y0, ctx.cfg.zh_t_grid, ctx.sim);
    pass = pass && r.pass;
    zh_rows.push_back(to_json(r));
    for (const auto& pt : r.points) {
      zh_csv.row(p, pt.t, pt.moment.log_mean, pt.moment.log_ci_lo, pt.moment.log_ci_hi,
                 pt.log_envelope, pt.pass);
    }
  }
  out.csv_files.emplace_back("exp_moment.csv", exp_csv.str());
  out.csv_files.emplace_back("zh_decay.csv", zh_csv.str());
  out.exit_code = pass ? exit_pass : exit_violation;

  json j;
  j["exp_moment"] = exp_rows;
  j["zh_separation"] = ctx.cfg.zh_separation;
  j["zh_decay"] = zh_rows;
  j["pass"] = pass;
  return j;
}

json run_mlh(const Context& ctx, CommandOutput& out) {
  require(ctx.hypotheses, mlh_hypotheses());
  const std::vector<TestFunction> fs = ctx.cfg.functions(ctx.model.grid);
  bool pass = true;

  json entropy_rows = json::array();
  json mlh_rows = json::array();
  Csv entropy_csv("separation,t,half_control_energy,half_control_energy_se,m_log_m,m_log_m_se,bound,within_bound,forms_agree,n_eff");
  Csv mlh_csv("separation,function,t,lhs,rhs,std_error,margin_sigmas,n_eff,pass");
  for (double s : ctx.cfg.separations) {
    const Field y0 = ctx.y0(s);
    json sep;
    sep["separation"] = s;
    sep["y_norm"] = norm(y0);
    sep["constants"] = to_json(mlh_constants(norm(y0), s, ctx.c));
    if (ctx.cfg.run_entropy) {
      json cells = json::array();
      for (const EntropyEstimate& e : entropy_estimates(ctx.model, ctx.x0, y0, ctx.cfg.t_grid, ctx.sim)) {
        pass = pass && e.within_bound && e.forms_agree;
        cells.push_back(to_json(e));
        entropy_csv.row(s, e.t, e.half_control_energy.mean, e.half_control_energy.std_error,
                        e.m_log_m.mean, e.m_log_m.std_error, e.bound, e.within_bound,
                        e.forms_agree, e.n_eff);
      }
      sep["entropy"] = cells;
    }
    if (ctx.cfg.run_mlh) {
      json cells = json::array();
      for (const MlhCell& cell : mlh_cells(ctx.model, fs, ctx.x0, y0, ctx.cfg.t_grid, ctx.sim)) {
        const InequalityReport r = cell.report(ctx.c, ctx.cfg.constant_scale);
        pass = pass && r.pass;
        json row = to_json(r);
        row["function"] = fs[cell.f_index].kind_name();
        cells.push_back(row);
        mlh_csv.row(s, cell.f_index, cell.t, r.lhs.mean, r.rhs, r.std_error, r.margin_sigmas,
                    cell.n_eff, r.pass);
      }
      sep["mlh"] = cells;
    }
    mlh_rows.push_back(sep);
  }

  json probe_rows = json::array();
  if (ctx.cfg.run_gradient_probe) {
    std::vector<Field> dirs;
    for (const auto& d : ctx.cfg.probe_directions) dirs.push_back(d.resolve(ctx.model.grid, ctx.cfg.base_dir));
    Csv probe_csv("function,direction,eps,t,quotient,quotient_se,analytic,envelope,pass");
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
      json cells = json::array();
      for (const ProbeCell& p : gradient_probe(ctx.model, fs[fi], ctx.x0, dirs, ctx.cfg.probe_times,
                                               ctx.cfg.probe_eps, ctx.sim)) {
        pass = pass && p.pass;
        cells.push_back(to_json(p));
        probe_csv.row(fi, p.direction, p.eps, p.t, p.quotient.mean, p.quotient.std_error,
                      p.analytic, p.envelope, p.pass);
      }
      json f;
      f["function"] = fi;
      f["kind"] = fs[fi].kind_name();
      f["cells"] = cells;
      probe_rows.push_back(f);
    }
    out.csv_files.emplace_back("gradient_probe.csv", probe_csv.str());
  }
  if (ctx.cfg.run_entropy) out.csv_files.emplace_back("entropy.csv", entropy_csv.str());
  if (ctx.cfg.run_mlh) out.csv_files.emplace_back("mlh.csv", mlh_csv.str());
  out.exit_code = pass ? exit_pass : exit_violation;

  json j;
  j["constant_scale"] = ctx.cfg.constant_scale;
  j["separations"] = mlh_rows;
  j["gradient_probe"] = probe_rows;
  j["pass"] = pass;
  return j;
}

json run_asf(const Context& ctx, CommandOutput& out) {
  const auto& times = ctx.cfg.dgamma_times;
  const auto& gammas = ctx.cfg.gammas;
  std::vector<std::size_t> by_gamma(gammas.size());
  std::iota(by_gamma.begin(), by_gamma.end(), std::size_t{0});
  std::stable_sort(by_gamma.begin(), by_gamma.end(),
                   [&](std::size_t a, std::size_t b) { return gammas[a] < gammas[b]; });

  bool pass = true;
  json rows = json::array();
  Csv csv("separation,t,gamma,upper,upper_se,lower,lower_se,best_function,sandwich");
  for (double s : ctx.cfg.separations) {
    const std::vector<DgammaCell> cells = dgamma_distance_bounds(
        ctx.model, ctx.x0, ctx.y0(s), times, gammas, ctx.sim, ctx.cfg.dictionary_size);
    // cells are ordered by time, then gamma
    const auto at = [&](std::size_t ti, std::size_t gi) -> const DgammaCell& {
      return cells[ti * gammas.size() + gi];
    };
    bool sandwich = true, monotone_t = true, monotone_gamma = true, zero_row = true;
    json table = json::array();
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        const DgammaCell& cell = at(ti, gi);
        sandwich = sandwich && cell.sandwich;
        zero_row = zero_row && cell.upper.mean == 0.0 && cell.lower.mean == 0.0;
        if (ti > 0 && cell.upper.mean > at(ti - 1, gi).upper.mean) monotone_t = false;
        table.push_back(to_json(cell));
        csv.row(s, cell.t, cell.gamma, cell.upper.mean, cell.upper.std_error, cell.lower.mean,
                cell.lower.std_error, cell.best_function, cell.sandwich);
      }
      for (std::size_t r = 1; r < by_gamma.size(); ++r) {
        if (at(ti, by_gamma[r]).upper.mean > at(ti, by_gamma[r - 1]).upper.mean) monotone_gamma = false;
      }
    }
    const bool row_ok = sandwich && monotone_t && monotone_gamma && (s != 0.0 || zero_row);
    pass = pass && row_ok;
    json j;
    j["separation"] = s;
    j["sandwich"] = sandwich;
    j["upper_nonincreasing_in_t"] = monotone_t;
    j["upper_nonincreasing_in_gamma"] = monotone_gamma;
    j["all_zero"] = zero_row;
    j["pass"] = row_ok;
    j["cells"] = table;
    rows.push_back(j);
  }
  out.csv_files.emplace_back("dgamma.csv", csv.str());
  out.exit_code = pass ? exit_pass : exit_violation;

  json j;
  j["dictionary_size"] = ctx.cfg.dictionary_size;
  j["rows"] = rows;
  j["pass"] = pass;
  return j;
}

json run_simulate(const Context& ctx, CommandOutput& out) {
  const ExperimentConfig& cfg = ctx.cfg;
  const SdePath path = simulate_x(*ctx.model.ws, ctx.x0, cfg.T, cfg.dt, ctx.model.params,
                                  ctx.model.noise, cfg.seed, ctx.sim.step);
  std::ostringstream path_csv;
  write_path_csv(path_csv, path);
  out.csv_files.emplace_back("path.csv", path_csv.str());

  json j;
  j["T"] = cfg.T;
  j["steps"] = path.times.size() - 1;
  j["final_norm_squared"] = number(norm_squared(path.states.back()));
  j["energy_functional"] = number(energy_functional(path, cfg.T));

  json couplings = json::array();
  int index = 0;
  for (double s : cfg.separations) {
    if (s == 0.0) continue;
    CouplingOptions opt{ctx.sim.step, ctx.sim.control};
    const CouplingTrajectory traj = run_coupled(*ctx.model.ws, ctx.x0, ctx.y0(s), cfg.T, cfg.dt,
                                                ctx.model.params, ctx.model.noise, cfg.seed, opt);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    const std::string name = "coupling_" + std::to_string(index++) + ".csv";
    out.csv_files.emplace_back(name, os.str());
    const std::size_t last = traj.log_m.size() - 1;
    json c;
    c["separation"] = s;
    c["file"] = name;
    c["final_log_m"] = number(traj.log_m[last]);
    c["control_energy"] = number(traj.v_energy[last]);
    c["final_zh_norm"] = number(norm(traj.zh[last]));
    c["final_distance"] = number(norm(traj.y(last) - traj.x_path.states[last]));
    couplings.push_back(c);
  }
  j["couplings"] = couplings;
  out.exit_code = exit_pass;
  return j;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& contents) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << contents;
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  if (name == "verify-identities") return Command::verify_identities;
  if (name == "verify-moments") return Command::verify_moments;
  if (name == "verify-mlh") return Command::verify_mlh;
  if (name == "asf-probe") return Command::asf_probe;
  if (name == "simulate") return Command::simulate;
  return std::nullopt;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::verify_identities: return "verify-identities";
    case Command::verify_moments: return "verify-moments";
    case Command::verify_mlh: return "verify-mlh";
    case Command::asf_probe: return "asf-probe";
    case Command::simulate: return "simulate";
  }
  return "unknown";
}

CommandOutput run_command(Command command, const ExperimentConfig& config) {
  CommandOutput out;
  json& r = out.report;
  r["command"] = command_name(command);
  r["config"] = config_to_json(config);
  json results;
  try {
    config.validate();
    const Context ctx(config);
    r["constants"] = to_json(ctx.c);
    r["hypotheses"] = to_json(ctx.hypotheses);
    out.constants["parameters"] = {{"N", config.N}, {"nu", config.nu}, {"N0", config.N0}, {"q", config.q}};
    out.constants["constants"] = r["constants"];
    out.constants["hypotheses"] = r["hypotheses"];
    switch (command) {
      case Command::verify_identities: results = run_identities(ctx, out); break;
      case Command::verify_moments: results = run_moments(ctx, out); break;
      case Command::verify_mlh: results = run_mlh(ctx, out); break;
      case Command::asf_probe: results = run_asf(ctx, out); break;
      case Command::simulate: results = run_simulate(ctx, out); break;
    }
    r["results"] = results;
    r["status"] = out.exit_code == exit_pass ? "pass" : "violation";
  } catch (const HypothesisError& e) {
    out.exit_code = exit_hypothesis;
    out.csv_files.clear();
    r["status"] = "hypothesis_failure";
    r["failed_hypothesis"] = to_json(e.hypothesis());
    r["message"] = e.what();
  } catch (const BlowUpError& e) {
    out.exit_code = exit_runtime;
    r["status"] = "error";
    r["blowup_time"] = e.time();
    r["message"] = e.what();
  } catch (const std::exception& e) {
    out.exit_code = exit_runtime;
    r["status"] = "error";
    r["message"] = e.what();
  }
  r["exit_code"] = out.exit_code;
  return out;
}

int execute_command(Command command, const ExperimentConfig& config,
                    const std::filesystem::path& out_dir) {
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  const CommandOutput out = run_command(command, config);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "report.json", out.report.dump(2) + "\n");
  if (!out.constants.empty()) write_file(out_dir / "constants.json", out.constants.dump(2) + "\n");
  for (const auto& [name, contents] : out.csv_files) write_file(out_dir / name, contents);

  json meta;
  meta["command"] = command_name(command);
  meta["started_utc"] = started;
  meta["finished_utc"] = utc_now();
  meta["elapsed_seconds"] = elapsed;
#ifdef _OPENMP
  meta["threads"] = omp_get_max_threads();
#else
  meta["threads"] = 1;
#endif
  meta["exit_code"] = out.exit_code;
  write_file(out_dir / "meta.json", meta.dump(2) + "\n");
  return out.exit_code;
}

}  // namespace sns
