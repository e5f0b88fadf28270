#include "sns/report.hpp"

#include <cmath>

namespace sns {

using json = nlohmann::ordered_json;

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json to_json(const Estimate& e) {
  json j;
  j["mean"] = number(e.mean);
  j["std_error"] = number(e.std_error);
  j["n"] = e.n;
  j["ci_lo"] = number(e.ci_lo);
  j["ci_hi"] = number(e.ci_hi);
  return j;
}

json to_json(const LogMeanEstimate& e) {
  json j;
  j["log_mean"] = number(e.log_mean);
  j["log_ci_lo"] = number(e.log_ci_lo);
  j["log_ci_hi"] = number(e.log_ci_hi);
  j["relative_std_error"] = number(e.relative_std_error);
  j["n"] = e.n;
  return j;
}

json to_json(const InequalityReport& r) {
  json j;
  j["name"] = r.name;
  j["lhs"] = to_json(r.lhs);
  j["rhs"] = number(r.rhs);
  j["rhs_std_error"] = number(r.rhs_std_error);
  j["std_error"] = number(r.std_error);
  j["margin"] = number(r.margin);
  j["margin_sigmas"] = number(r.margin_sigmas);
  j["pass"] = r.pass;
  json inputs = json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = number(v);
  j["inputs"] = inputs;
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const BoundConstants& c) {
  json j;
  j["nu"] = number(c.nu);
  j["N0"] = c.N0;
  j["C0"] = number(c.C0);
  j["C1"] = number(c.C1);
  j["C2"] = number(c.C2);
  j["trQQ"] = number(c.trQQ);
  j["delta_rate"] = number(c.delta_rate());
  return j;
}

json to_json(const Hypothesis& h) {
  json j;
  j["name"] = h.name;
  j["condition"] = h.condition;
  j["lhs"] = number(h.lhs);
  j["rhs"] = number(h.rhs);
  j["pass"] = h.pass;
  return j;
}

json to_json(const HypothesisReport& r) {
  json items = json::array();
  for (const auto& h : r.items) items.push_back(to_json(h));
  json j;
  j["all_pass"] = r.all_pass();
  j["items"] = items;
  return j;
}

json to_json(const EntropyEstimate& e) {
  json j;
  j["t"] = number(e.t);
  j["half_control_energy"] = to_json(e.half_control_energy);
  j["m_log_m"] = to_json(e.m_log_m);
  j["bound"] = number(e.bound);
  j["within_bound"] = e.within_bound;
  j["forms_agree"] = e.forms_agree;
  j["n_eff"] = number(e.n_eff);
  return j;
}

json to_json(const ZhDecayReport& r) {
  json j;
  j["p"] = r.p;
  j["z_norm"] = number(r.z_norm);
  j["identically_zero"] = r.identically_zero;
  j["sup_moment"] = to_json(r.sup_moment);
  j["log_sup_envelope"] = number(r.log_sup_envelope);
  j["sup_pass"] = r.sup_pass;
  json points = json::array();
  for (const auto& p : r.points) {
    json q;
    q["t"] = number(p.t);
    q["moment"] = to_json(p.moment);
    q["log_envelope"] = number(p.log_envelope);
    q["pass"] = p.pass;
    points.push_back(q);
  }
  j["points"] = points;
  j["fitted_rate"] = number(r.fitted_rate);
  j["fitted_rate_std_error"] = number(r.fitted_rate_std_error);
  j["envelope_rate"] = number(r.envelope_rate);
  j["pass"] = r.pass;
  return j;
}

json to_json(const ProbeCell& c) {
  json j;
  j["direction"] = c.direction;
  j["eps"] = number(c.eps);
  j["t"] = number(c.t);
  j["quotient"] = to_json(c.quotient);
  j["analytic"] = number(c.analytic);
  j["envelope"] = number(c.envelope);
  j["pass"] = c.pass;
  return j;
}

json to_json(const DgammaCell& c) {
  json j;
  j["t"] = number(c.t);
  j["gamma"] = number(c.gamma);
  j["upper"] = to_json(c.upper);
  j["lower"] = to_json(c.lower);
  j["best_function"] = c.best_function;
  j["sandwich"] = c.sandwich;
  return j;
}

json to_json(const IdentityCheck& c) {
  json j;
  j["name"] = c.name;
  j["tolerance"] = number(c.tolerance);
  j["evaluations"] = c.evaluations;
  j["violations"] = c.violations;
  j["worst"] = number(c.worst);
  return j;
}

json to_json(const IdentityReport& r) {
  json j;
  j["N"] = r.N;
  j["N0"] = r.N0;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["corrupt_projection"] = r.corrupt_projection;
  j["violations"] = r.violations();
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = checks;
  return j;
}

json to_json(const MlhConstants& c) {
  json j;
  j["L1"] = number(c.L.L1);
  j["L2"] = number(c.L.L2);
  j["L3"] = number(c.L.L3);
  j["L4"] = number(c.L.L4);
  j["K1"] = number(c.K1);
  j["K2"] = number(c.L.K2);
  j["C"] = number(c.C);
  j["C_tilde"] = number(c.C_tilde);
  j["delta_rate"] = number(c.delta_rate);
  return j;
}

}  // namespace sns
