// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_FEM_HPP
#define BIOTPREC_FEM_HPP

#include "biotprec/core.hpp"
#include "biotprec/mesh.hpp"

#include <map>

namespace biotprec {

// Discrete spaces of the stable triple: continuous vector P1 enriched with
// one facet-normal bubble per facet, RT0 fluxes, P0 pressures.
enum class Space { P1Vector, Bubble, RT0, P0 };

struct DofMap {
  Space space = Space::P0;
  int count = 0;
  std::vector<uint8_t> constrained;  // essential-BC mask, size == count
};

inline int p1_dof(int vertex, int comp, int dim) { return dim * vertex + comp; }

struct DofMaps {
  int dim = 2;
  DofMap bubble;    // one dof per facet
  DofMap u_lin;     // dim dofs per vertex, interleaved
  DofMap pressure;  // one dof per element, never constrained
  DofMap flux;      // one dof per facet (net flux w.r.t. canonical normal)
};

/// What an essential boundary label pins on its facets.
struct BcRule {
  bool flux = false;    // w.n = 0
  bool bubble = false;  // normal-bubble displacement dof = 0
  std::array<bool, 3> comp{{false, false, false}};  // P1 displacement components
};

using BcPolicy = std::map<BoundaryLabel, BcRule>;

BcPolicy bc_policy(Problem problem);

DofMaps build_dof_maps(const SimplicialMesh& mesh, const BoundaryTag& tags,
                       const BcPolicy& policy);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureRule {
  int dim = 2;     // simplex dimension
  int degree = 0;  // declared polynomial exactness
  Mat points;      // nq x (dim+1), barycentric
  Vec weights;     // sum to the reference simplex volume 1/dim!
};

/// Grundmann-Moller rule of exactness >= degree on the unit simplex.
QuadratureRule simplex_quadrature(int dim, int degree);

/// Exact integral of a barycentric monomial prod lambda_i^{e_i} over a
/// simplex of measure `volume` and dimension `dim`.
Real barycentric_monomial_integral(int dim, const std::vector<int>& exps, Real volume);

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

struct ElasticityBlocks {
  SpMat A_bb;  // bubble x bubble
  SpMat A_bl;  // bubble rows, linear columns
  SpMat A_ll;  // linear x linear
};

/// a(u,v) = 2 mu (eps(u),eps(v)) + lambda (div u, div v) over the enriched
/// displacement space, split into bubble and linear parts.
ElasticityBlocks assemble_elasticity(const SimplicialMesh& mesh, Real mu, Real lambda);

/// (grad u, grad v) over the same space; the H1-seminorm matrix.
ElasticityBlocks assemble_vector_gradient(const SimplicialMesh& mesh);

struct DivBlocks {
  SpMat B_b;  // pressure rows, bubble cols:  -(div u_b, q)
  SpMat B_l;  // pressure rows, linear cols:  -(div u_l, q)
  SpMat B_w;  // pressure rows, flux cols:    -(div w, q), entries in {0,+-1}
};

DivBlocks assemble_div_coupling(const SimplicialMesh& mesh);

/// (K^{-1} mu_f w, r) with K = k I, k piecewise constant per element.
SpMat assemble_flux_mass(const SimplicialMesh& mesh, Real mu_f, const Vec& k_elem);

/// P0 mass matrix: diagonal of element volumes.
SpMat assemble_p0_mass(const SimplicialMesh& mesh);

struct TractionLoad {
  Vec bubble;  // one entry per bubble dof
  Vec u_lin;   // one entry per P1 dof
};

/// Surface load (t, v) over the facets carrying each label.
TractionLoad assemble_traction(const SimplicialMesh& mesh, const BoundaryTag& tags,
                               const std::map<BoundaryLabel, Vec>& tractions);

struct AssembledBlocks {
  SpMat A_bb, A_bl, A_ll;
  SpMat B_b, B_l, B_w;
  SpMat M_w;
  SpMat M_p;
  Vec load_bubble, load_u_lin, load_p, load_w;
};

/// Symmetric elimination of the constrained rows/columns: zeroed off-diagonal
/// entries, unit diagonal, zeroed load entries.
void apply_essential_bcs(AssembledBlocks& blocks, const DofMaps& dofs);

/// Zero rows (mask_rows) and columns (mask_cols); put 1 on eliminated
/// diagonal entries when unit_diag is set (square blocks only).
SpMat eliminate_constrained(const SpMat& A, const std::vector<uint8_t>* mask_rows,
                            const std::vector<uint8_t>* mask_cols, bool unit_diag);

}  // namespace biotprec

#endif  // BIOTPREC_FEM_HPP
