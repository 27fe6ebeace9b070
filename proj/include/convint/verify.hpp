#pragma once
#include <map>
#include <string>
#include <vector>

#include "convint/grid.hpp"
#include "convint/snapshot.hpp"
#include "convint/testbank.hpp"

namespace convint {

struct Candidate {
  Grid grid;
  bool incompressible = false;
  double gamma = 2.0;
  Field rho, V;            // rho may be empty for incompressible candidates
  Field rho_init, V_init;  // spatial; empty means time sample 0
  Field stress;            // optional extra symmetric stress in the momentum flux
  std::map<std::string, double> certificates;  // carried into the report
};

struct VerifyReport {
  int n = 2;
  int K = 0;
  std::size_t bank_size = 0;
  bool incompressible = false;
  double gamma = 0.0;
  std::array<int, 4> dims{};
  double mass = 0.0;       // worst normalized residual over the bank
  double momentum = 0.0;   // compressible momentum or divergence-free momentum
  std::string worst_mass, worst_momentum;
  std::vector<double> energy;
  double energy_ref = 0.0;
  double energy_tol = 0.0;
  int violations = 0;
  std::map<std::string, double> certificates;
};

VerifyReport verify_weak(const Candidate& c, const TestBank& bank);

struct EnergyCheck {
  std::vector<double> t, energy;
  double reference = 0.0;
  double tol = 0.0;
  int violations = 0;
  double worst_excess = 0.0;
};

// energy per time sample against the energy of the initial data; tol relative
EnergyCheck verify_energy(const Candidate& c, double tol_rel = 1e-3, double E0 = 0.0);

// the full report: weak residuals plus energy series
VerifyReport verify(const Candidate& c, const TestBank& bank, double tol_rel = 1e-3, double E0 = 0.0);

// fields rho and V (or v when incompressible) over every sample; optional
// rho_init, V_init (v_init) slices and a stress field
Candidate candidate_from_snapshot(const Snapshot& s);

}  // namespace convint
