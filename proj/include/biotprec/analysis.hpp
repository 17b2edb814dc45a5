// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_ANALYSIS_HPP
#define BIOTPREC_ANALYSIS_HPP

#include "biotprec/core.hpp"
#include "biotprec/precond.hpp"
#include "biotprec/system.hpp"

#include <functional>

namespace biotprec {

// Desk-scale numerical verification of the well-posedness and
// field-of-values theory.  Everything here is dense and deterministic.

// ---------------------------------------------------------------------------
// Weighted norm matrices
// ---------------------------------------------------------------------------

enum class NormKind { D, DE, Dtilde };

/// Block-diagonal SPD norm matrix of the variant's well-posedness theory:
/// D for the diagonal-bubble system, D^E for the eliminated system, and the
/// fully block-diagonal auxiliary norm used by the L S L^T factorization.
SpMat norm_matrix(const BiotSystem& sys, NormKind kind);

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

struct InfSupResult {
  Real gamma = 0;     // smallest positive singular value
  Real varsigma = 0;  // largest singular value
};

/// Singular values of D^{-1/2} A D^{-1/2}, computed from the pencil
/// (A^T D^{-1} A, D); values below 1e-10 * varsigma count as zero.
InfSupResult inf_sup_constant(const Mat& A, const Mat& D, Index dense_limit = 4000);
InfSupResult inf_sup_constant(const BiotSystem& sys, const SpMat& D, Index dense_limit = 4000);

/// Extreme generalized eigenvalues of (A, B), both SPD.
std::pair<Real, Real> spectral_interval(const Mat& A, const Mat& B, Index dense_limit = 4000);
std::pair<Real, Real> spectral_interval(const SpMat& A, const SpMat& B, Index dense_limit = 4000);

struct FovResult {
  Real sigma = 0;    // lower field-of-values bound
  Real upsilon = 0;  // operator-norm upper bound
};

/// Bounds for the operator G in the inner product (x,y)_W = x^T W y:
/// sigma = lambda_min(sym(W G), W), upsilon = sqrt(lambda_max(G^T W G, W)).
FovResult fov_core(const Mat& G, const Mat& W);

/// Spec surface: preconditioner L, operator A, SPD norm-equivalent
/// preconditioner N; the inner product is N^{-1}.
FovResult fov_bounds(const Mat& L, const Mat& A, const Mat& N);

/// rho = || I - S A ||_A for a linear sub-solver S.
Real equivalence_deviation(const Mat& S, const Mat& A);

/// Sampled deviation max_v ||v - S(A v)||_A / ||v||_A for a (possibly
/// nonlinear) sub-solver, over `samples` deterministic random directions.
Real sampled_equivalence_deviation(const std::function<Vec(const Vec&)>& S, const SpMat& A,
                                   int samples = 20, unsigned seed = 7);

/// Materialize a linear operator column by column.
Mat materialize(const std::function<Vec(const Vec&)>& apply, Index n);

/// Dense matrix of a linear BlockPreconditioner (rejects inner-Krylov solves).
Mat preconditioner_matrix(const BlockPreconditioner& P);

/// FOV bounds of the paper's triangular-preconditioner theorems:
/// lower/diagonal families bound (P A x, x) in the (B_D)^{-1} inner product,
/// the upper family bounds (A P x', x') in the B_D inner product.
FovResult fov_bounds_for(const BlockPreconditioner& P, const BiotSystem& sys);

// ---------------------------------------------------------------------------
// Inequality suite
// ---------------------------------------------------------------------------

struct InequalityItem {
  std::string name;
  Real measured = 0;  // extreme generalized eigenvalue
  Real bound = 0;
  Real slack = 0;  // signed margin, >= -1e-9 passes
  bool pass = false;
};

struct InequalityReport {
  std::vector<InequalityItem> items;
  bool all_pass = true;
};

/// Evaluates the proof-chain inequalities on an assembled problem:
/// the div bounds against A_u / A_bb / D_bb, the scaled Stokes inf-sup,
/// the eliminated-system lower bound, and the pressure-weight orderings.
InequalityReport verify_paper_inequalities(const SimplicialMesh& mesh, const BoundaryTag& tags,
                                           const PhysicalParams& params);

// ---------------------------------------------------------------------------
// Structural decomposition check
// ---------------------------------------------------------------------------

struct LslReport {
  Real lsl_error = 0;       // max |L S Lt - A^D| / max |A^D|
  Real submatrix_error = 0; // max |S_sub - A^E| / max |A^E|
  Real s11_error = 0;       // max |S_11 - D_bb|
  bool pass = false;
};

/// Verifies A^D = L S L~^T with the unit block-triangular factors, that the
/// eliminated operator is the trailing submatrix of S, and that S_11 = D_bb.
LslReport lsl_decomposition_check(const BiotSystem& diag_sys, Real tol = 1e-11);

// ---------------------------------------------------------------------------
// Convergence envelope
// ---------------------------------------------------------------------------

struct EnvelopeReport {
  bool pass = false;
  Real rate = 0;                // 1 - sigma^2/upsilon^2
  std::vector<Real> residuals;  // W-norm residual history, eta_0 first
};

/// GMRES in the W inner product applied to G x = b; checks
/// eta_m <= eta_0 * rate^m for every iteration.
EnvelopeReport gmres_envelope_check(const Mat& G, const Mat& W, const Vec& b, Real sigma,
                                    Real upsilon, Real tol = 1e-8, int max_iters = 300);

}  // namespace biotprec

#endif  // BIOTPREC_ANALYSIS_HPP
