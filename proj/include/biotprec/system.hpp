// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_SYSTEM_HPP
#define BIOTPREC_SYSTEM_HPP

#include "biotprec/core.hpp"
#include "biotprec/fem.hpp"

#include <functional>

namespace biotprec {

struct PhysicalParams {
  Real mu = 0;      // shear Lame coefficient
  Real lambda = 0;  // first Lame coefficient
  Real alpha = 1.0;
  Real M = 1e6;
  Real mu_f = 1.0;

  /// Lame coefficients from (E, nu).  The default shear formula is
  /// mu = E/(1+2 nu); standard_shear selects the textbook E/(2(1+nu)).
  static PhysicalParams from_youngs(Real E, Real nu, bool standard_shear = false,
                                    Real alpha = 1.0, Real M = 1e6, Real mu_f = 1.0);
  void validate() const;
};

struct DerivedParams {
  Real zeta = 0;  // sqrt(lambda + 2 mu / d)
  Real c_p = 0;   // (alpha^2/zeta^2 + 1/M)^{-1}
};

DerivedParams derived_params(const PhysicalParams& p, int dim);
/// Raw form; accepts alpha = 0 (then c_p = M).
DerivedParams derived_params_raw(Real alpha, Real M, Real zeta);

enum class SystemVariant { Full, DiagBubble, Eliminated };

const char* to_string(SystemVariant v);

/// One of the three time-discrete operators, with the flux row scaled by tau.
/// Unknown ordering: (u_bubble, u_linear, p, w) for Full/DiagBubble and
/// (u_linear, p, w) for Eliminated.
struct BiotSystem {
  SystemVariant variant = SystemVariant::Full;
  int dim = 2;
  Real tau = 0;
  PhysicalParams params;
  DerivedParams derived;

  // shared assembled blocks
  std::shared_ptr<const SpMat> A_bb, A_bl, A_ll, B_b, B_l, B_w, M_w, M_p;
  Vec D_bb_diag;  // (d+1) diag(A_bb); empty for Full

  // eliminated-system blocks (empty otherwise)
  std::shared_ptr<const SpMat> A_uE;  // A_ll - A_bl^T D^{-1} A_bl
  std::shared_ptr<const SpMat> B_uE;  // B_l - B_b D^{-1} A_bl
  std::shared_ptr<const SpMat> A_pE;  // (1/M) M_p + alpha^2 B_b D^{-1} B_b^T

  BlockOperator op{{}, {}};
  std::vector<Index> partition;  // block sizes of op

  Index size() const { return op.rows(); }
  Index n_bubble() const { return variant == SystemVariant::Eliminated ? 0 : partition[0]; }
  Index n_lin() const { return variant == SystemVariant::Eliminated ? partition[0] : partition[1]; }
  Index n_pressure() const {
    return variant == SystemVariant::Eliminated ? partition[1] : partition[2];
  }
  Index n_flux() const { return variant == SystemVariant::Eliminated ? partition[2] : partition[3]; }

  Vec apply(const Vec& x) const { return op.apply(x); }
  SpMat assemble() const { return op.assemble(); }
};

BiotSystem build_full_system(const AssembledBlocks& blocks, const PhysicalParams& params,
                             Real tau, int dim);

/// Replaces A_bb by D_bb = (d+1) diag(A_bb); everything else shared.
BiotSystem build_diag_bubble_system(const BiotSystem& full);

/// Static condensation of the (diagonalized) bubble block.
BiotSystem eliminate_bubbles(const BiotSystem& diag_sys);

/// Backward-Euler right-hand side for one step from the given state.
/// u_prev is (bubble;linear) displacement, p_prev the pressure vector,
/// f_elem the per-element integrals of the fluid source.  Loads assembled
/// into `blocks` (tractions, body forces) are included.
Vec backward_euler_rhs(const BiotSystem& sys, const AssembledBlocks& blocks, const Vec& u_prev,
                       const Vec& p_prev, const Vec& f_elem);

/// Bubble part of the solution reconstructed after static condensation.
Vec recover_bubbles(const BiotSystem& elim_sys, const Vec& rhs_bubble, const Vec& u_lin,
                    const Vec& p);

/// Matrix Market export of the monolithic operator plus a side-car text file
/// <path>.blocks.txt listing the block partition sizes.
void export_system(const BiotSystem& sys, const std::string& path_prefix);

}  // namespace biotprec

#endif  // BIOTPREC_SYSTEM_HPP
