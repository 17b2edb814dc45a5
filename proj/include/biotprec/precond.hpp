// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_PRECOND_HPP
#define BIOTPREC_PRECOND_HPP

#include "biotprec/amg.hpp"
#include "biotprec/core.hpp"
#include "biotprec/system.hpp"

#include <atomic>

namespace biotprec {

/// The three SPD blocks weighting the well-posedness norm of a system
/// variant: displacement, pressure and flux.
struct WeightedBlocks {
  std::shared_ptr<const SpMat> displacement;  // A_u, A_u^D or A_u^E
  std::shared_ptr<const SpMat> pressure;      // (a^2/z^2 + 1/M) M_p or A_p^{E*}
  std::shared_ptr<const SpMat> flux;          // tau M_w + tau^2 c_p A_w
  std::shared_ptr<const SpMat> A_w;           // B_w^T M_p^{-1} B_w
  bool pressure_diagonal = false;
};

WeightedBlocks build_weighted_blocks(const BiotSystem& sys);

/// Approximate inverse of one diagonal block.  Direct achieves a 1e-10
/// relative residual; InnerKrylov is a nonlinear tolerance-bounded solve.
class SubSolver {
 public:
  enum class Kind { Direct, DiagonalInverse, Vcycle, InnerKrylov };
  enum class InnerPrec { None, Jacobi, Amg };

  static SubSolver direct(std::shared_ptr<const SpMat> A, FactorKind kind = FactorKind::SparseLU);
  static SubSolver diagonal_inverse(std::shared_ptr<const SpMat> A);
  static SubSolver vcycle_solver(std::shared_ptr<const SpMat> A, const AmgOptions& opts = {});
  static SubSolver inner_krylov(std::shared_ptr<const SpMat> A, InnerPrec prec, Real tol = 1e-3,
                                int max_iters = 200, const AmgOptions& opts = {});

  Vec apply(const Vec& r) const;
  Vec operator()(const Vec& r) const { return apply(r); }

  Kind kind() const { return kind_; }
  bool linear() const { return kind_ != Kind::InnerKrylov; }
  Index rows() const { return n_; }
  /// Number of inner solves that hit max_iters without reaching tolerance.
  long failures() const { return failures_ ? failures_->load() : 0; }

 private:
  SubSolver() = default;
  Kind kind_ = Kind::Direct;
  Index n_ = 0;
  std::shared_ptr<const SpMat> A_;
  std::shared_ptr<const Factorization> fact_;
  Vec inv_diag_;
  std::shared_ptr<const AmgHierarchy> amg_;
  InnerPrec inner_prec_ = InnerPrec::None;
  Real tol_ = 1e-3;
  int max_iters_ = 200;
  std::shared_ptr<std::atomic<long>> failures_;
};

enum class PrecFamily { Diagonal, Lower, Upper };

const char* to_string(PrecFamily family);

/// Block diagonal/triangular preconditioner applied by block substitution.
/// With Direct sub-solvers it is the exact inverse of the corresponding
/// block diagonal or triangular matrix.
class BlockPreconditioner {
 public:
  BlockPreconditioner(const BiotSystem& sys, WeightedBlocks weights, PrecFamily family,
                      SubSolver S_u, SubSolver S_p, SubSolver S_w);

  Vec apply(const Vec& r) const;
  Vec operator()(const Vec& r) const { return apply(r); }

  /// Copy sharing all sub-solvers (and their factorizations) with a
  /// different substitution pattern.
  BlockPreconditioner with_family(PrecFamily family) const {
    BlockPreconditioner out = *this;
    out.family_ = family;
    return out;
  }

  PrecFamily family() const { return family_; }
  SystemVariant variant() const { return variant_; }
  bool linear() const { return S_u_.linear() && S_p_.linear() && S_w_.linear(); }
  long failures() const { return S_u_.failures() + S_p_.failures() + S_w_.failures(); }
  const WeightedBlocks& weights() const { return weights_; }
  Index rows() const { return n_; }

 private:
  PrecFamily family_;
  SystemVariant variant_;
  WeightedBlocks weights_;
  SubSolver S_u_, S_p_, S_w_;
  Real alpha_ = 1, tau_ = 0;
  Index nu_ = 0, np_ = 0, nw_ = 0, n_ = 0;
  // coupling blocks: full system uses (B_b, B_l), eliminated uses B_uE
  std::shared_ptr<const SpMat> B_b_, B_l_, B_uE_, B_w_;
  std::shared_ptr<const SpMat> B_b_t_, B_l_t_, B_uE_t_, B_w_t_;
  Index nb_ = 0, nl_ = 0;

  Vec apply_Bu(const Vec& zu) const;    // alpha-free  B_u z_u
  Vec apply_BuT(const Vec& zp) const;   // B_u^T z_p
};

/// Sub-solver configuration of a preconditioner build.
struct PrecOptions {
  bool inexact = false;
  Real inner_tol = 1e-3;
  int inner_max_iters = 200;
  Real amg_strength = 0.08;
  Index amg_coarsest = 200;
  /// Flux inner preconditioner: AMG when the div-div part dominates the
  /// block diagonal by more than this ratio, damped Jacobi otherwise.
  Real flux_amg_threshold = 0.1;
  int displacement_block_size = 0;  // 0: scalar aggregation
};

BlockPreconditioner make_preconditioner(PrecFamily family, const BiotSystem& sys,
                                        const WeightedBlocks& weights, SubSolver S_u,
                                        SubSolver S_p, SubSolver S_w);

/// Exact (Direct) or hatted (tolerance-bounded inner solve) preconditioner
/// with the sub-solver choices used by the benchmarks.
BlockPreconditioner make_benchmark_preconditioner(PrecFamily family, const BiotSystem& sys,
                                                  const WeightedBlocks& weights,
                                                  const PrecOptions& opts = {});

}  // namespace biotprec

#endif  // BIOTPREC_PRECOND_HPP
