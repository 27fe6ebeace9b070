#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "convint/grid.hpp"

namespace convint {

struct EnergyBudget {
  double E0 = 1.0;
  double T = 1.0;  // saturation horizon
};

struct IncompSubsolution {
  Grid grid;
  Field v, R;
  EnergyBudget budget;
  double certificate = 0.0;  // weak residual bound
};

struct CompSubsolution {
  Grid grid;
  Field rho, V, calR, r;
  double gamma = 2.0;
  EnergyBudget budget;
  double certificate = 0.0;
};

inline double pressure(double rho, double gamma) { return std::pow(rho, gamma); }

// 1 < gamma <= 1 + 2/n, else gamma-constraint
void check_gamma(int n, double gamma);

IncompSubsolution make_incomp(const Grid& g, Field v, Field R, EnergyBudget b);
CompSubsolution make_comp(const Grid& g, Field rho, Field V, Field calR, Field r, double gamma, EnergyBudget b);

// spatial quadrature on time sample j
double energy_total(const IncompSubsolution& s, int j);
double energy_total(const CompSubsolution& s, int j);
std::vector<double> energy_series(const CompSubsolution& s);

// |E(t_j) - E0| <= tol on t <= T and E <= E0 + tol after; returns the worst excess
double energy_compatibility_excess(const CompSubsolution& s, double tol);

IncompSubsolution convex_combine_incomp(const std::vector<IncompSubsolution>& family, const std::vector<double>& w);
CompSubsolution convex_combine_comp(const std::vector<CompSubsolution>& family, const std::vector<double>& w);

// space-time mollification: Gaussian in space (std alpha/2), positive weights
// over forward time shifts in [0, alpha]; the time window shrinks by the shift
IncompSubsolution mollify_subsolution(const IncompSubsolution& s, double alpha);
CompSubsolution mollify_subsolution(const CompSubsolution& s, double alpha);
// separate spatial and temporal scales
IncompSubsolution mollify_subsolution(const IncompSubsolution& s, double alpha_x, double alpha_t);
CompSubsolution mollify_subsolution(const CompSubsolution& s, double alpha_x, double alpha_t);

double strictify_lambda(double eps, double E0);  // min(eps / 6E0, 1/2)

struct StrictifyReport {
  double lambda = 0.0;
  double floor = 0.0;             // required lower bound on lambda_min (incompressible)
  double min_eig = 0.0;           // min over the grid of lambda_min(R) or lambda_min(calR + r I)
  double min_r = 0.0;
  double initial_distance = 0.0;  // measured closeness of the initial slice
  double max_trace_integral = 0.0;  // sup_t int tr(calR + r I)
  int halvings = 0;
};

IncompSubsolution strictify_incomp(const IncompSubsolution& s, double eps, StrictifyReport* rep = nullptr);

struct StrictifyCompOptions {
  double alpha = 0.0;              // spatial mollification scale; 0 picks two spatial cells
  double alpha_time = 0.0;         // temporal scale; 0 uses alpha
  double hypothesis_tol = 1e-3;    // relative to E0
  double trace_slack = 1e300;      // also halve lambda until 1/2 sup_t int tr(calR + r I) <= trace_slack
  int max_halvings = 40;
};

// mollify, mix with the rest state of energy E0, mollify again
CompSubsolution strictify_comp(const CompSubsolution& s, double eps, const StrictifyCompOptions& opt = {},
                               StrictifyReport* rep = nullptr);

// distance of the initial slice of b from a: ||rho_b - rho_a||^g_g + ||V_b/sqrt(rho_b) - V_a/sqrt(rho_a)||^2
// + int (tr calR_b + r_b/(gamma-1))
double initial_distance(const CompSubsolution& a, const CompSubsolution& b);

// spatially constant potential per time sample that turns the pressure defect
// into an isotropic stress with the same energy
std::vector<double> compensating_potential(const CompSubsolution& s);

}  // namespace convint
