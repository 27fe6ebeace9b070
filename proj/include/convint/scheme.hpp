#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "convint/grid.hpp"
#include "convint/wavegen.hpp"

namespace convint {

struct FieldState {
  Grid grid;
  Field rho0, V0, U0, R0;
  Field Vtil, Util;
  std::vector<std::uint8_t> P;  // active region mask
  double Lambda = 1.0;
};

// U0 is filled from (rho0, V0); P defaults to the whole grid
FieldState make_field_state(const Grid& g, Field rho0, Field V0, Field R0, std::vector<std::uint8_t> P = {},
                            double Lambda = 0.0);
void validate_field_state(const FieldState& fs);

struct DefectField {
  Field M;
  double int_trM = 0.0;   // over P
  double min_lambda = 0.0;  // over P
};

DefectField compute_defect(const FieldState& fs);
double lambda_star(const FieldState& fs, const std::vector<std::uint8_t>& omega);
double lambda_star(const FieldState& fs, const DefectField& D, const std::vector<std::uint8_t>& omega);

struct CubeInfo {
  CubeBox box;
  Vec Vbar;
  SymMat Ubar, R0bar, RQ, MQ;
  double rho_min = 0.0, CQ = 0.0;
  double fluct_M = 0.0, fluct_R0 = 0.0, fluct_C = 0.0;
  double int_trM = 0.0;
};

struct CubePartition {
  int cells_space = 0, cells_time = 0;
  double delta = 0.0;  // spatial side
  double lambda_star = 0.0;
  double omega1_fraction = 0.0;  // int_{cubes} tr M / int_P tr M
  std::string mode = "delta";    // "delta" or "fallback"
  std::vector<CubeInfo> cubes;
};

struct SchemeConfig {
  double cutoff_width = 0.3;
  double points_per_wavelength = 8.0;
  double amplitude_reach = 0.998;  // fraction of the full symmetric reach used (1 = endpoints on the hull boundary)
  int fallback_cells = 16;
  double margin_factor = 1.0;      // margin = margin_factor * lambda_* / (64 n)
  double keep_fraction = 0.5;      // each point also keeps this fraction of its own lambda_min(M)
  double coercivity_c = 0.02;      // calibrated L1 coercivity constant
  double skip_fraction = 1e-8;     // cubes with tr M_Q below this times the mean are skipped
  double budget_fraction = 0.1;    // added residual L1 allowed per unit of defect decrease
  int stagnation_window = 5;
  double stagnation_tol = 1e-2;
};

// cubes of the given side (cells) tiling the grid from the given offsets, kept if inside P
std::vector<CubeBox> tile_cubes(const FieldState& fs, int cs, int ct, const std::array<int, 4>& offset);
CubeInfo cube_stats(const FieldState& fs, const DefectField& D, const CubeBox& box, double lambda_star);

// largest dyadic cube side passing the fluctuation bounds; throws resolution_too_coarse
CubePartition choose_delta(const FieldState& fs, double lambda_star);
CubePartition choose_delta(const FieldState& fs, const DefectField& D, double lambda_star);

struct CubePerturbation {
  CubeBox box;
  Field V, U;  // box-local
  bool skipped = false;
  std::string note;
  double tau = 0.0;
  int k = 0;
  double points_per_wavelength = 0.0;
  double residual_l1 = 0.0;
  double residual_sup = 0.0;
  double l1_V = 0.0;
  double trMQ = 0.0;
  double rho_min = 0.0;
  double min_margin = 0.0;  // min lambda_min(M) after the update on the cube
};

CubePerturbation perturb_cube(const CubeInfo& cube, const FieldState& fs, const DefectField& D, double lambda_star,
                              std::uint64_t seed, const SchemeConfig& cfg = {});

struct DefectReport {
  int sweep = 0;
  double int_trM = 0.0;
  double min_lambda_M = 0.0;
  double lambda_star = 0.0;
  double margin = 0.0;  // min lambda_min(M) - lambda_* / (64 n)
  double l1_dV = 0.0;
  double coercivity_ratio = 0.0;  // l1_dV / (int tr M_before / Lambda)
  double residual_l1 = 0.0;       // added this sweep
  double residual_sup = 0.0;
  double defect_decrease = 0.0;
  bool budget_ok = true;
  std::string delta_mode;
  int cubes = 0, cubes_skipped = 0;
  int k_min_used = 0, k_max_used = 0;
  double min_ppw = 0.0;
  double l2_V = 0.0;
};

struct SweepResult {
  FieldState next;
  DefectReport report;
  std::vector<CubePerturbation> cubes;
};

SweepResult sweep(const FieldState& fs, std::uint64_t seed, const SchemeConfig& cfg = {}, int sweep_index = 0);

struct EulerCandidate {
  FieldState state;  // final iterate
  Field Vnew, Unew;
  std::vector<DefectReport> reports;  // reports[0] describes the input
  std::string status;                 // "target", "max_sweeps", "stagnated"
  double initial_trM = 0.0, final_trM = 0.0;
  double certificate_l1 = 0.0;  // sum of wave residual L1 over all sweeps
  double certificate_sup = 0.0;
};

EulerCandidate run(const FieldState& fs, double target, int max_sweeps, std::uint64_t seed,
                   const SchemeConfig& cfg = {});

// |V_new|^2/rho0 - |V0|^2/rho0 - tr R0 pointwise
Field energy_identity_check(const EulerCandidate& c);
double energy_identity_ratio(const EulerCandidate& c);  // L1(P) of the above over L1(P) of tr R0

// spectral residuals of (div V~, d_t V~ + div U~); sup and L1 over the grid
struct LinearResidual {
  double mass_sup = 0.0, mom_sup = 0.0, l1 = 0.0;
};
LinearResidual linear_residual(const FieldState& fs);

double l2_distance_V(const FieldState& a, const FieldState& b);

}  // namespace convint
