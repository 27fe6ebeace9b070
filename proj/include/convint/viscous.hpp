#pragma once
#include <vector>

#include "convint/grid.hpp"
#include "convint/subsolution.hpp"

namespace convint {

// Output samples are the time samples of the grid (vertex layout expected);
// initial fields are spatial (one slice).

struct IncompOptions {
  double cfl = 0.5;
  long max_steps = 2000000;
};

struct IncompRun {
  Grid grid;
  double nu = 0.0;
  Field v;
  std::vector<double> energy;       // 1/2 int |v|^2 per sample
  std::vector<double> dissipated;   // nu int int |grad v|^2 up to each sample
  double max_step_increase = 0.0;   // largest per-step energy increase
  long steps = 0;
};

IncompRun solve_incomp_ns(const Grid& g, const Field& v0, double nu, const IncompOptions& opt = {});

// closed-form decaying vortex on the unit torus (n = 2), amplitude 1
Field taylor_green(const Grid& g, double nu);

struct CompOptions {
  double cfl = 0.4;
  long max_steps = 2000000;
  double rho_floor = 1e-6;
  double energy_slack = 1e-8;  // per-step increase allowed, relative to the initial energy
  int max_halvings = 40;
  // gamma = 2 only: energy conservative flux plus this fraction of the
  // Rusanov jump term (other gamma use full Rusanov)
  bool entropy_flux = true;
  double upwind = 0.1;
};

struct CompRun {
  Grid grid;
  double nu = 0.0, gamma = 2.0;
  Field rho, V;
  std::vector<double> energy;  // int E(rho, V) per sample
  std::vector<double> mass;
  double max_step_increase = 0.0;  // relative to the initial energy
  long steps = 0, rejected = 0;
  double viscous_l1 = 0.0;  // int int |nu rho Dv|, sampled
};

CompRun solve_comp_ns(const Grid& g, const Field& rho0, const Field& V0, double nu, double gamma,
                      const CompOptions& opt = {});

// nu int rho |Dv|^2 on one spatial slice
double viscous_dissipation(const Grid& g, const Field& rho, const Field& V, double nu);

struct ExtractOptions {
  double energy_tol = 1e-3;        // relative, for saturation and the energy inequality
  double max_certificate = 1e300;  // weak residual bound above which the extract is rejected
};

struct DefectExtract {
  CompSubsolution sub;
  double filter_width = 0.0;
  double nu = 0.0;
  double psd_removed = 0.0;       // largest eigenvalue mass removed by PSD projection
  double r_clipped = 0.0;         // largest negative r set to zero
  long psd_projections = 0, r_clips = 0;
  long roundoff_projections = 0;  // below the roundoff floor, not counted above
  double max_calR = 0.0, max_r = 0.0;
  double saturation_T = 0.0;
  double energy_excess = 0.0;     // C3 worst excess over E0
};

DefectExtract extract_defect(const std::vector<CompRun>& runs, double filter_width, const ExtractOptions& opt = {});

// int E(U1 | U2) over one spatial slice
double relative_entropy(const Grid& g, const Field& rho1, const Field& V1, const Field& rho2, const Field& V2,
                        double gamma);

}  // namespace convint
