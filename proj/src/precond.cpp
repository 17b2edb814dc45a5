// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#include "biotprec/precond.hpp"

#include "biotprec/krylov.hpp"

#include <cmath>

namespace biotprec {

const char* to_string(PrecFamily family) {
  switch (family) {
    case PrecFamily::Diagonal: return "bd";
    case PrecFamily::Lower: return "bl";
    case PrecFamily::Upper: return "bu";
  }
  return "?";
}

WeightedBlocks build_weighted_blocks(const BiotSystem& sys) {
  WeightedBlocks wb;
  const Real a = sys.params.alpha;
  const Real inv_cp = 1.0 / sys.derived.c_p;  // alpha^2/zeta^2 + 1/M
  const Real tau = sys.tau;

  // A_w = B_w^T M_p^{-1} B_w (M_p diagonal)
  const Vec mp_inv = sys.M_p->diagonal().cwiseInverse();
  SpMat A_w = sparse_triple_product(sparse_transpose(*sys.B_w), mp_inv, *sys.B_w);
  wb.A_w = std::make_shared<const SpMat>(std::move(A_w));

  SpMat flux = tau * (*sys.M_w) + (tau * tau * sys.derived.c_p) * (*wb.A_w);
  flux.makeCompressed();
  wb.flux = std::make_shared<const SpMat>(std::move(flux));

  if (sys.variant == SystemVariant::Eliminated) {
    wb.displacement = sys.A_uE;
    // A_p^{E*} = (alpha^2/zeta^2) M_p + A_p^E
    SpMat press = (a * a / (sys.derived.zeta * sys.derived.zeta)) * (*sys.M_p) + (*sys.A_pE);
    press.makeCompressed();
    wb.pressure = std::make_shared<const SpMat>(std::move(press));
    wb.pressure_diagonal = false;
  } else {
    const Index nb = sys.partition[0], nl = sys.partition[1];
    BlockOperator u_op({nb, nl}, {nb, nl});
    if (sys.variant == SystemVariant::Full)
      u_op.set(0, 0, sys.A_bb);
    else
      u_op.set(0, 0, std::make_shared<const SpMat>(sparse_diagonal(sys.D_bb_diag)));
    u_op.set(0, 1, sys.A_bl);
    u_op.set(1, 0, sys.A_bl, 1.0, true);
    u_op.set(1, 1, sys.A_ll);
    wb.displacement = std::make_shared<const SpMat>(u_op.assemble());
    wb.pressure = std::make_shared<const SpMat>(SpMat(inv_cp * (*sys.M_p)));
    wb.pressure_diagonal = true;
  }
  return wb;
}

// ---------------------------------------------------------------------------
// SubSolver
// ---------------------------------------------------------------------------

SubSolver SubSolver::direct(std::shared_ptr<const SpMat> A, FactorKind kind) {
  SubSolver s;
  s.kind_ = Kind::Direct;
  s.n_ = A->rows();
  s.fact_ = std::make_shared<const Factorization>(Factorization::compute(*A, kind));
  return s;
}

SubSolver SubSolver::diagonal_inverse(std::shared_ptr<const SpMat> A) {
  for (Index i = 0; i < A->outerSize(); ++i)
    for (SpMat::InnerIterator it(*A, i); it; ++it)
      if (it.col() != i && it.value() != 0.0)
        throw std::invalid_argument("SubSolver: DiagonalInverse requested for a non-diagonal block");
  SubSolver s;
  s.kind_ = Kind::DiagonalInverse;
  s.n_ = A->rows();
  s.inv_diag_ = A->diagonal().cwiseInverse();
  return s;
}

SubSolver SubSolver::vcycle_solver(std::shared_ptr<const SpMat> A, const AmgOptions& opts) {
  SubSolver s;
  s.kind_ = Kind::Vcycle;
  s.n_ = A->rows();
  s.amg_ = std::make_shared<const AmgHierarchy>(amg_setup(*A, opts));
  return s;
}

SubSolver SubSolver::inner_krylov(std::shared_ptr<const SpMat> A, InnerPrec prec, Real tol,
                                  int max_iters, const AmgOptions& opts) {
  SubSolver s;
  s.kind_ = Kind::InnerKrylov;
  s.n_ = A->rows();
  s.A_ = std::move(A);
  s.inner_prec_ = prec;
  s.tol_ = tol;
  s.max_iters_ = max_iters;
  s.failures_ = std::make_shared<std::atomic<long>>(0);
  if (prec == InnerPrec::Amg)
    s.amg_ = std::make_shared<const AmgHierarchy>(amg_setup(*s.A_, opts));
  else if (prec == InnerPrec::Jacobi)
    s.inv_diag_ = s.A_->diagonal().cwiseInverse();
  return s;
}

Vec SubSolver::apply(const Vec& r) const {
  if (r.size() != n_) throw std::invalid_argument("SubSolver: dimension mismatch");
  switch (kind_) {
    case Kind::Direct:
      return fact_->solve(r);
    case Kind::DiagonalInverse:
      return inv_diag_.cwiseProduct(r);
    case Kind::Vcycle:
      return vcycle(*amg_, r);
    case Kind::InnerKrylov: {
      auto op = [this](const Vec& v) { return spmv(*A_, v); };
      std::pair<Vec, SolveReport> out;
      if (inner_prec_ == InnerPrec::Amg) {
        out = gmres_inner(op, r, [this](const Vec& v) { return vcycle(*amg_, v); }, tol_,
                          max_iters_);
      } else if (inner_prec_ == InnerPrec::Jacobi) {
        out = gmres_inner(op, r, [this](const Vec& v) { return Vec(inv_diag_.cwiseProduct(v)); },
                          tol_, max_iters_);
      } else {
        out = gmres_inner(op, r, IdentityPrec{}, tol_, max_iters_);
      }
      if (!out.second.converged) failures_->fetch_add(1);
      return out.first;  // best iterate even on max_iters
    }
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// BlockPreconditioner
// ---------------------------------------------------------------------------

BlockPreconditioner::BlockPreconditioner(const BiotSystem& sys, WeightedBlocks weights,
                                         PrecFamily family, SubSolver S_u, SubSolver S_p,
                                         SubSolver S_w)
    : family_(family),
      variant_(sys.variant),
      weights_(std::move(weights)),
      S_u_(std::move(S_u)),
      S_p_(std::move(S_p)),
      S_w_(std::move(S_w)),
      alpha_(sys.params.alpha),
      tau_(sys.tau),
      B_w_(sys.B_w) {
  if (variant_ == SystemVariant::Eliminated) {
    B_uE_ = sys.B_uE;
    B_uE_t_ = std::make_shared<const SpMat>(sparse_transpose(*sys.B_uE));
    nu_ = sys.partition[0];
    np_ = sys.partition[1];
    nw_ = sys.partition[2];
  } else {
    B_b_ = sys.B_b;
    B_l_ = sys.B_l;
    B_b_t_ = std::make_shared<const SpMat>(sparse_transpose(*sys.B_b));
    B_l_t_ = std::make_shared<const SpMat>(sparse_transpose(*sys.B_l));
    nb_ = sys.partition[0];
    nl_ = sys.partition[1];
    nu_ = nb_ + nl_;
    np_ = sys.partition[2];
    nw_ = sys.partition[3];
  }
  B_w_t_ = std::make_shared<const SpMat>(sparse_transpose(*sys.B_w));
  n_ = nu_ + np_ + nw_;
  if (S_u_.rows() != nu_ || S_p_.rows() != np_ || S_w_.rows() != nw_)
    throw std::invalid_argument("BlockPreconditioner: sub-solver sizes do not match the system");
}

Vec BlockPreconditioner::apply_Bu(const Vec& zu) const {
  if (variant_ == SystemVariant::Eliminated) return spmv(*B_uE_, zu);
  return spmv(*B_b_, zu.head(nb_)) + spmv(*B_l_, zu.tail(nl_));
}

Vec BlockPreconditioner::apply_BuT(const Vec& zp) const {
  if (variant_ == SystemVariant::Eliminated) return spmv(*B_uE_t_, zp);
  Vec out(nu_);
  out.head(nb_) = spmv(*B_b_t_, zp);
  out.tail(nl_) = spmv(*B_l_t_, zp);
  return out;
}

Vec BlockPreconditioner::apply(const Vec& r) const {
  if (r.size() != n_) throw std::invalid_argument("BlockPreconditioner: dimension mismatch");
  const Vec r_u = r.head(nu_);
  const Vec r_p = r.segment(nu_, np_);
  const Vec r_w = r.tail(nw_);
  Vec z(n_);
  switch (family_) {
    case PrecFamily::Diagonal: {
      z.head(nu_) = S_u_(r_u);
      z.segment(nu_, np_) = S_p_(r_p);
      z.tail(nw_) = S_w_(r_w);
      break;
    }
    case PrecFamily::Lower: {
      const Vec z_u = S_u_(r_u);
      const Vec z_p = S_p_(r_p + alpha_ * apply_Bu(z_u));
      const Vec z_w = S_w_(r_w - tau_ * spmv(*B_w_t_, z_p));
      z << z_u, z_p, z_w;
      break;
    }
    case PrecFamily::Upper: {
      const Vec z_w = S_w_(r_w);
      const Vec z_p = S_p_(r_p + tau_ * spmv(*B_w_, z_w));
      const Vec z_u = S_u_(r_u - alpha_ * apply_BuT(z_p));
      z << z_u, z_p, z_w;
      break;
    }
  }
  return z;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

BlockPreconditioner make_preconditioner(PrecFamily family, const BiotSystem& sys,
                                        const WeightedBlocks& weights, SubSolver S_u,
                                        SubSolver S_p, SubSolver S_w) {
  return BlockPreconditioner(sys, weights, family, std::move(S_u), std::move(S_p),
                             std::move(S_w));
}

BlockPreconditioner make_benchmark_preconditioner(PrecFamily family, const BiotSystem& sys,
                                                  const WeightedBlocks& weights,
                                                  const PrecOptions& opts) {
  AmgOptions amg;
  amg.strength = opts.amg_strength;
  amg.coarsest_size = opts.amg_coarsest;

  if (!opts.inexact) {
    SubSolver S_u = SubSolver::direct(weights.displacement);
    SubSolver S_p = weights.pressure_diagonal ? SubSolver::diagonal_inverse(weights.pressure)
                                              : SubSolver::direct(weights.pressure);
    SubSolver S_w = SubSolver::direct(weights.flux);
    return make_preconditioner(family, sys, weights, std::move(S_u), std::move(S_p),
                               std::move(S_w));
  }

  AmgOptions amg_u = amg;
  if (opts.displacement_block_size > 1 &&
      weights.displacement->rows() % opts.displacement_block_size == 0)
    amg_u.block_size = opts.displacement_block_size;
  SubSolver S_u = SubSolver::inner_krylov(weights.displacement, SubSolver::InnerPrec::Amg,
                                          opts.inner_tol, opts.inner_max_iters, amg_u);
  SubSolver S_p = weights.pressure_diagonal
                      ? SubSolver::diagonal_inverse(weights.pressure)
                      : SubSolver::inner_krylov(weights.pressure, SubSolver::InnerPrec::Amg,
                                                opts.inner_tol, opts.inner_max_iters, amg);

  // div-div dominated flux blocks get AMG, mass dominated ones damped Jacobi
  const Real aw_scale = sys.tau * sys.tau * sys.derived.c_p * weights.A_w->diagonal().maxCoeff();
  const Real mw_scale = sys.tau * sys.M_w->diagonal().maxCoeff();
  const auto flux_prec = (aw_scale > opts.flux_amg_threshold * mw_scale)
                             ? SubSolver::InnerPrec::Amg
                             : SubSolver::InnerPrec::Jacobi;
  SubSolver S_w = SubSolver::inner_krylov(weights.flux, flux_prec, opts.inner_tol,
                                          opts.inner_max_iters, amg);
  return make_preconditioner(family, sys, weights, std::move(S_u), std::move(S_p),
                             std::move(S_w));
}

}  // namespace biotprec
