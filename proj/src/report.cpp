#include "convint/report.hpp"

#include <fstream>
#include <iomanip>

#include "convint/errors.hpp"

namespace convint {

json to_json(const VerifyReport& r) {
  json j;
  j["n"] = r.n;
  j["K"] = r.K;
  j["bank_size"] = r.bank_size;
  j["incompressible"] = r.incompressible;
  j["gamma"] = r.gamma;
  j["dims"] = r.dims;
  j["mass"] = r.mass;
  j["momentum"] = r.momentum;
  j["worst_mass"] = r.worst_mass;
  j["worst_momentum"] = r.worst_momentum;
  j["energy"] = r.energy;
  j["energy_ref"] = r.energy_ref;
  j["energy_tol"] = r.energy_tol;
  j["violations"] = r.violations;
  j["certificates"] = json::object();
  for (const auto& [k, v] : r.certificates) j["certificates"][k] = v;
  return j;
}

json to_json(const EnergyCheck& e) {
  json j;
  j["reference"] = e.reference;
  j["tol"] = e.tol;
  j["violations"] = e.violations;
  j["worst_excess"] = e.worst_excess;
  j["t"] = e.t;
  j["energy"] = e.energy;
  return j;
}

json to_json(const DefectReport& r) {
  json j;
  j["sweep"] = r.sweep;
  j["int_trM"] = r.int_trM;
  j["min_lambda_M"] = r.min_lambda_M;
  j["lambda_star"] = r.lambda_star;
  j["margin"] = r.margin;
  j["l1_dV"] = r.l1_dV;
  j["coercivity_ratio"] = r.coercivity_ratio;
  j["residual_l1"] = r.residual_l1;
  j["residual_sup"] = r.residual_sup;
  j["defect_decrease"] = r.defect_decrease;
  j["budget_ok"] = r.budget_ok;
  j["delta_mode"] = r.delta_mode;
  j["cubes"] = r.cubes;
  j["cubes_skipped"] = r.cubes_skipped;
  j["k_min"] = r.k_min_used;
  j["k_max"] = r.k_max_used;
  j["min_ppw"] = r.min_ppw;
  j["l2_V"] = r.l2_V;
  return j;
}

json to_json(const StrictifyReport& r) {
  json j;
  j["lambda"] = r.lambda;
  j["floor"] = r.floor;
  j["min_eig"] = r.min_eig;
  j["min_r"] = r.min_r;
  j["initial_distance"] = r.initial_distance;
  j["max_trace_integral"] = r.max_trace_integral;
  j["halvings"] = r.halvings;
  return j;
}

json to_json(const DefectExtract& e) {
  json j;
  j["filter_width"] = e.filter_width;
  j["nu"] = e.nu;
  j["psd_projections"] = e.psd_projections;
  j["psd_removed"] = e.psd_removed;
  j["r_clips"] = e.r_clips;
  j["r_clipped"] = e.r_clipped;
  j["roundoff_projections"] = e.roundoff_projections;
  j["max_calR"] = e.max_calR;
  j["max_r"] = e.max_r;
  j["saturation_T"] = e.saturation_T;
  j["energy_excess"] = e.energy_excess;
  j["E0"] = e.sub.budget.E0;
  j["certificate"] = e.sub.certificate;
  return j;
}

json to_json(const PipelineReport& r) {
  json j;
  j["probe_T"] = r.probe_T;
  j["horizon"] = r.horizon;
  j["E0"] = r.E0;
  j["extract"] = to_json(r.extract);
  j["strictify"] = to_json(r.strictify);
  j["r_c_max"] = r.r_c_max;
  j["j0"] = r.j0;
  j["t0"] = r.t0;
  j["j_bound"] = r.j_bound;
  j["j_measured"] = r.j_measured;
  j["j_saturated"] = r.j_saturated;
  j["min_value_distance"] = r.min_value_distance;
  j["values"] = json::array();
  for (const auto& v : r.values) {
    json jv;
    jv["seed"] = v.seed;
    jv["j_tilde"] = v.j_tilde;
    jv["t_tilde"] = v.t_tilde;
    jv["saturated"] = v.saturated;
    jv["distance"] = v.distance;
    jv["min_solution_distance"] = v.min_solution_distance;
    jv["solutions"] = json::array();
    for (const auto& s : v.solutions) {
      json js;
      js["seed"] = s.seed;
      js["violations"] = s.energy.violations;
      js["worst_energy_excess"] = s.energy.worst_excess;
      js["mass_residual"] = s.weak.mass;
      js["momentum_residual"] = s.weak.momentum;
      js["residual_budget"] = s.residual_budget;
      js["final_defect_fraction"] = s.final_defect_fraction;
      js["status_before_t0"] = s.status1;
      js["status_after_t0"] = s.status2;
      js["certificates"] = json::object();
      for (const auto& [k, x] : s.candidate.certificates) js["certificates"][k] = x;
      jv["solutions"].push_back(js);
    }
    j["values"].push_back(jv);
  }
  return j;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::invalid_input, "cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n" << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  }
}

}  // namespace convint
