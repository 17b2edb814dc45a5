// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_BENCH_HPP
#define BIOTPREC_BENCH_HPP

#include "biotprec/krylov.hpp"
#include "biotprec/precond.hpp"
#include "biotprec/system.hpp"

#include <iosfwd>
#include <optional>

namespace biotprec {

// ---------------------------------------------------------------------------
// Mandel's consolidation problem (top-right quadrant of the classic slab)
// ---------------------------------------------------------------------------

struct MandelConfig {
  Real a = 1.0, b = 1.0;  // quadrant geometry
  Real F = 1e4;           // total vertical load on the top edge
  Real nu = 0.0, E = 1e4;
  Real alpha = 1.0, M = 1e6, mu_f = 1.0;
  Real k = 1e-6;
  Real skempton = 1.0;
  Real series_tol = 1e-12;
  bool standard_shear = false;

  Real nu_undrained() const;  // (3 nu + B(1-2 nu)) / (3 - B(1-2 nu))
  Real p0() const;            // B (1+nu_u) F / (3a)
  Real consolidation_coeff() const;  // c = (k/mu_f)(lambda + 2 mu)
  PhysicalParams physical() const;
};

/// Positive roots of tan(x) = (1-nu)/(nu_u-nu) x, one per branch
/// (n pi, n pi + pi/2), bisected to 1e-14.
std::vector<Real> mandel_roots(Real nu, Real nu_u, int n_max);

/// Series pressure p(x, t); roots must come from mandel_roots.
Real mandel_pressure(Real x, Real t, const MandelConfig& cfg, const std::vector<Real>& roots);

struct FootingConfig {
  Real sigma0 = 3e4;  // load intensity on the central patch
  Real nu = 0.2, E = 1e4;
  Real alpha = 1.0, M = 1e6, mu_f = 1.0;
  Real k = 1e-6;
};

// ---------------------------------------------------------------------------
// Benchmark runs
// ---------------------------------------------------------------------------

struct RunSpec {
  Problem problem = Problem::Mandel2D;
  int N = 8;  // cells per side, h = 1/N
  Real tau = 0.1;
  Real nu = 0.0;
  Real k = 1e-6;
  std::optional<Real> k_left;  // permeability for x < 0.5 (jump case)
  std::string precond = "bl";  // bd | bl | bu | bde | ble | bue
  bool inexact = false;
  SystemVariant variant = SystemVariant::Full;
  Real tol = 1e-8;
  int max_iters = 500;
  bool standard_shear = false;
};

struct AssembledProblem {
  SimplicialMesh mesh;
  BoundaryTag tags;
  DofMaps dofs;
  AssembledBlocks blocks;
  PhysicalParams params;
  Vec k_elem;
};

AssembledProblem assemble_problem(Problem problem, int N, Real nu, Real k,
                                  std::optional<Real> k_left, bool standard_shear);
AssembledProblem assemble_problem(Problem problem, int N, const PhysicalParams& params, Real k,
                                  std::optional<Real> k_left);

PrecFamily family_of(const std::string& precond_id);
SystemVariant variant_of(const std::string& precond_id);

/// One backward-Euler step from the zero state, solved with FGMRES.
SolveReport run_case(const RunSpec& spec);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepSpec {
  Problem problem = Problem::Mandel2D;
  std::vector<SystemVariant> variants{SystemVariant::Full};
  std::vector<bool> inexact{false};
  std::vector<std::string> preconds{"bd", "bl", "bu"};
  std::vector<int> Ns{8};
  std::vector<Real> taus{0.1};
  std::vector<Real> nus{0.0};
  std::vector<Real> ks{1e-6};
  std::vector<Real> k_lefts;  // empty: no jump
  Real tol = 1e-8;
  int max_iters = 500;
  bool standard_shear = false;
};

/// Plain key=value text; lists are comma separated, h entries may be "1/64".
SweepSpec parse_sweep_config(std::istream& is);

extern const char* kCsvHeader;
std::string csv_row(const SolveReport& report);

/// Runs the grid in deterministic spec order (rows come out in that order
/// regardless of scheduling); returns all reports.
std::vector<SolveReport> run_sweep(const SweepSpec& spec, std::ostream* csv, int jobs = 1);

// ---------------------------------------------------------------------------
// Timing and accuracy studies
// ---------------------------------------------------------------------------

struct TimingPoint {
  long elements = 0;
  double solve_seconds = 0;
  int iterations = 0;
};

struct TimingReport {
  std::vector<TimingPoint> points;
  Real slope = 0;  // least-squares slope of log(time) vs log(elements)
};

/// Solve-time scaling with inexact (hatted) preconditioners.
TimingReport timing_scaling(Problem problem, SystemVariant variant,
                            const std::string& precond_id, const std::vector<int>& Ns,
                            Real tau = 0.01, Real nu = 0.0, Real k = 1e-6);

struct AccuracyPoint {
  int N = 0;
  Real l2_error = 0;
};

/// Centroid L2 error of the discrete pressure against the series solution
/// after `steps` backward-Euler steps of size t_final/steps (direct solves).
std::vector<AccuracyPoint> mandel_pressure_convergence(const std::vector<int>& Ns, Real t_final,
                                                       int steps, const MandelConfig& cfg);

}  // namespace biotprec

#endif  // BIOTPREC_BENCH_HPP
