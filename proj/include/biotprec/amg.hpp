// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_AMG_HPP
#define BIOTPREC_AMG_HPP

#include "biotprec/core.hpp"

#include <optional>

namespace biotprec {

struct AmgOptions {
  Real strength = 0.08;      // |a_ij| >= strength * sqrt(a_ii a_jj)
  int block_size = 1;        // dofs aggregated per node (d for vector P1)
  Index coarsest_size = 200;
  int max_levels = 25;
  enum class Smoother { SymmetricGaussSeidel, DampedJacobi };
  Smoother smoother = Smoother::SymmetricGaussSeidel;
  Real jacobi_damping = 2.0 / 3.0;
};

/// Unsmoothed-aggregation hierarchy: piecewise-constant prolongators over
/// greedy strength-graph aggregates, Galerkin coarse operators, direct solve
/// on the coarsest level.
struct AmgHierarchy {
  AmgOptions opts;
  std::vector<SpMat> A;                       // level operators, A[0] = input
  std::vector<SpMat> P;                       // P[l]: level l+1 -> level l
  std::vector<std::vector<int>> aggregates;   // node -> aggregate per level
  std::optional<Factorization> coarse;        // absent in smoother-only fallback
  int levels() const { return static_cast<int>(A.size()); }
};

AmgHierarchy amg_setup(const SpMat& A, const AmgOptions& opts = {});

/// One V(1,1) cycle applied to the residual r with zero initial guess.
/// Linear in r; an exact solve when the hierarchy has a single level.
Vec vcycle(const AmgHierarchy& hierarchy, const Vec& r);

}  // namespace biotprec

#endif  // BIOTPREC_AMG_HPP
