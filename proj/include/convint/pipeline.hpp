#pragma once
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "convint/scheme.hpp"
#include "convint/subsolution.hpp"
#include "convint/verify.hpp"
#include "convint/viscous.hpp"

namespace convint {

struct Datum {
  std::string name;
  std::function<double(const std::array<double, 3>&)> rho;
  std::function<std::array<double, 3>(const std::array<double, 3>&)> V;
};

// rho = 1 + 0.2 sin(2 pi x1), V = 0.3 (sin(2 pi x2), 0)
Datum shear_datum();
Datum rest_datum(double rho);

// spatial samples at cell centres
void sample_datum(const Grid& g, const Datum& d, Field& rho, Field& V);

struct PipelineConfig {
  int n = 2;
  int N = 48;
  int Nt = 48;
  double gamma = 2.0;
  double eps = 0.5;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int solutions_per_value = 2;
  std::vector<double> nus{4e-3, 2e-3, 1e-3};
  double filter_cells = 1.0;      // Gaussian width of the defect extraction, in cells
  double energy_tol = 1e-3;       // relative to E0
  double probe_horizon = 1.0;
  int probe_Nt = 101;
  double horizon_factor = 4.0;    // main horizon = factor * probe saturation time
  double trace_slack = 0.0;       // if positive, 1/2 sup_t int tr R0 is kept below this times energy_tol * E0
  std::string window = "measured";  // "measured" or "bound"
  int min_window = 4;             // fewest time samples before t0
  double target = 0.1;
  int max_sweeps = 8;
  int bank_K = 8;
  SchemeConfig scheme = [] {
    SchemeConfig s;
    s.fallback_cells = 4;
    return s;
  }();
};

struct WildSolution {
  std::uint64_t seed = 0;
  Candidate candidate;
  EnergyCheck energy;
  VerifyReport weak;
  double residual_budget = 0.0;
  double final_defect_fraction = 0.0;  // int tr M left over int tr R0, run 2
  std::string status1, status2;
};

struct WildValue {
  std::uint64_t seed = 0;
  int j_tilde = 0;
  double t_tilde = 0.0;
  bool saturated = false;
  double distance = 0.0;
  Field rho0, V0;  // spatial
  std::vector<WildSolution> solutions;
  double min_solution_distance = 0.0;  // smallest pairwise L2 between its solutions
};

struct PipelineReport {
  double probe_T = 0.0, horizon = 0.0;
  double E0 = 0.0;
  DefectExtract extract;
  StrictifyReport strictify;
  double r_c_max = 0.0;
  int j0 = 0;
  double t0 = 0.0;
  int j_bound = 0, j_measured = 0, j_saturated = 0;
  std::vector<WildValue> values;
  double min_value_distance = 0.0;  // smallest pairwise L2 between initial momenta
};

PipelineReport wild_data_pipeline(const Datum& d, const PipelineConfig& cfg);

// largest sample index j0 such that the window inequalities hold on [0, t(j0)]
int window_bound_index(const CompSubsolution& s, double eps);
int window_measured_index(const CompSubsolution& s, const Field& R0, double eps);

// (int |rho_a - rho_b|^g) + int |V_a/sqrt(rho_a) - V_b/sqrt(rho_b)|^2 on spatial fields
double data_distance(const Grid& g, const Field& rho_a, const Field& V_a, const Field& rho_b, const Field& V_b,
                     double gamma);

}  // namespace convint
