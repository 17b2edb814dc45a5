// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#include "biotprec/system.hpp"

#include <cmath>
#include <fstream>

namespace biotprec {

PhysicalParams PhysicalParams::from_youngs(Real E, Real nu, bool standard_shear, Real alpha,
                                           Real M, Real mu_f) {
  if (nu >= 0.5) throw std::invalid_argument("PhysicalParams: nu must be < 0.5");
  if (nu < 0) throw std::invalid_argument("PhysicalParams: nu must be nonnegative");
  PhysicalParams p;
  p.lambda = E * nu / ((1.0 - 2.0 * nu) * (1.0 + nu));
  p.mu = standard_shear ? E / (2.0 * (1.0 + nu)) : E / (1.0 + 2.0 * nu);
  p.alpha = alpha;
  p.M = M;
  p.mu_f = mu_f;
  p.validate();
  return p;
}

void PhysicalParams::validate() const {
  if (mu <= 0) throw std::invalid_argument("PhysicalParams: mu must be positive");
  if (lambda < 0) throw std::invalid_argument("PhysicalParams: lambda must be nonnegative");
  if (alpha <= 0 || alpha > 1) throw std::invalid_argument("PhysicalParams: alpha must be in (0,1]");
  if (M <= 0) throw std::invalid_argument("PhysicalParams: M must be positive");
  if (mu_f <= 0) throw std::invalid_argument("PhysicalParams: mu_f must be positive");
}

DerivedParams derived_params_raw(Real alpha, Real M, Real zeta) {
  DerivedParams d;
  d.zeta = zeta;
  d.c_p = 1.0 / (alpha * alpha / (zeta * zeta) + 1.0 / M);
  return d;
}

DerivedParams derived_params(const PhysicalParams& p, int dim) {
  p.validate();
  return derived_params_raw(p.alpha, p.M, std::sqrt(p.lambda + 2.0 * p.mu / dim));
}

const char* to_string(SystemVariant v) {
  switch (v) {
    case SystemVariant::Full: return "full";
    case SystemVariant::DiagBubble: return "diag";
    case SystemVariant::Eliminated: return "elim";
  }
  return "?";
}

namespace {

// shared scaffolding for the 4x4 Full/DiagBubble layouts
void fill_four_field(BiotSystem& sys, std::shared_ptr<const SpMat> displacement_bb) {
  const Index nb = displacement_bb->rows();
  const Index nl = sys.A_ll->rows();
  const Index np = sys.M_p->rows();
  const Index nw = sys.M_w->rows();
  sys.partition = {nb, nl, np, nw};
  sys.op = BlockOperator({nb, nl, np, nw}, {nb, nl, np, nw});
  const Real a = sys.params.alpha;
  const Real tau = sys.tau;
  sys.op.set(0, 0, displacement_bb);
  sys.op.set(0, 1, sys.A_bl);
  sys.op.set(0, 2, sys.B_b, a, /*transposed=*/true);
  sys.op.set(1, 0, sys.A_bl, 1.0, true);
  sys.op.set(1, 1, sys.A_ll);
  sys.op.set(1, 2, sys.B_l, a, true);
  sys.op.set(2, 0, sys.B_b, -a);
  sys.op.set(2, 1, sys.B_l, -a);
  sys.op.set(2, 2, sys.M_p, 1.0 / sys.params.M);
  sys.op.set(2, 3, sys.B_w, -tau);
  sys.op.set(3, 2, sys.B_w, tau, true);
  sys.op.set(3, 3, sys.M_w, tau);
}

}  // namespace

BiotSystem build_full_system(const AssembledBlocks& blocks, const PhysicalParams& params,
                             Real tau, int dim) {
  params.validate();
  if (tau <= 0) throw std::invalid_argument("build_full_system: tau must be positive");
  BiotSystem sys;
  sys.variant = SystemVariant::Full;
  sys.dim = dim;
  sys.tau = tau;
  sys.params = params;
  sys.derived = derived_params(params, dim);
  sys.A_bb = std::make_shared<const SpMat>(blocks.A_bb);
  sys.A_bl = std::make_shared<const SpMat>(blocks.A_bl);
  sys.A_ll = std::make_shared<const SpMat>(blocks.A_ll);
  sys.B_b = std::make_shared<const SpMat>(blocks.B_b);
  sys.B_l = std::make_shared<const SpMat>(blocks.B_l);
  sys.B_w = std::make_shared<const SpMat>(blocks.B_w);
  sys.M_w = std::make_shared<const SpMat>(blocks.M_w);
  sys.M_p = std::make_shared<const SpMat>(blocks.M_p);
  fill_four_field(sys, sys.A_bb);
  return sys;
}

BiotSystem build_diag_bubble_system(const BiotSystem& full) {
  if (full.variant != SystemVariant::Full)
    throw std::invalid_argument("build_diag_bubble_system: expects the full system");
  BiotSystem sys = full;
  sys.variant = SystemVariant::DiagBubble;
  Vec diag = full.A_bb->diagonal();
  if (diag.size() > 0 && diag.minCoeff() <= 0)
    throw std::invalid_argument("build_diag_bubble_system: zero diagonal entry in A_bb");
  sys.D_bb_diag = Real(full.dim + 1) * diag;
  fill_four_field(sys, std::make_shared<const SpMat>(sparse_diagonal(sys.D_bb_diag)));
  return sys;
}

BiotSystem eliminate_bubbles(const BiotSystem& diag_sys) {
  if (diag_sys.variant != SystemVariant::DiagBubble)
    throw std::invalid_argument("eliminate_bubbles: expects the diagonal-bubble system");
  BiotSystem sys = diag_sys;
  sys.variant = SystemVariant::Eliminated;
  const Vec inv_d = sys.D_bb_diag.cwiseInverse();
  const Real a = sys.params.alpha;

  const SpMat A_bl_t = sparse_transpose(*sys.A_bl);
  const SpMat B_b_t = sparse_transpose(*sys.B_b);
  SpMat A_uE = *sys.A_ll - sparse_triple_product(A_bl_t, inv_d, *sys.A_bl);
  SpMat B_uE = *sys.B_l - sparse_triple_product(*sys.B_b, inv_d, *sys.A_bl);
  SpMat A_pE = (1.0 / sys.params.M) * (*sys.M_p) +
               (a * a) * sparse_triple_product(*sys.B_b, inv_d, B_b_t);
  A_uE.makeCompressed();
  B_uE.makeCompressed();
  A_pE.makeCompressed();
  sys.A_uE = std::make_shared<const SpMat>(std::move(A_uE));
  sys.B_uE = std::make_shared<const SpMat>(std::move(B_uE));
  sys.A_pE = std::make_shared<const SpMat>(std::move(A_pE));

  const Index nl = sys.A_ll->rows();
  const Index np = sys.M_p->rows();
  const Index nw = sys.M_w->rows();
  sys.partition = {nl, np, nw};
  sys.op = BlockOperator({nl, np, nw}, {nl, np, nw});
  sys.op.set(0, 0, sys.A_uE);
  sys.op.set(0, 1, sys.B_uE, a, true);
  sys.op.set(1, 0, sys.B_uE, -a);
  sys.op.set(1, 1, sys.A_pE);
  sys.op.set(1, 2, sys.B_w, -sys.tau);
  sys.op.set(2, 1, sys.B_w, sys.tau, true);
  sys.op.set(2, 2, sys.M_w, sys.tau);
  return sys;
}

Vec backward_euler_rhs(const BiotSystem& sys, const AssembledBlocks& blocks, const Vec& u_prev,
                       const Vec& p_prev, const Vec& f_elem) {
  const Index nb = blocks.A_bb.rows();
  const Index nl = blocks.A_ll.rows();
  const Index np = blocks.M_p.rows();
  const Index nw = blocks.M_w.rows();
  if (u_prev.size() != nb + nl || p_prev.size() != np || f_elem.size() != np)
    throw std::invalid_argument("backward_euler_rhs: state dimension mismatch");

  const Vec u_b = u_prev.head(nb);
  const Vec u_l = u_prev.tail(nl);
  const Real a = sys.params.alpha;
  Vec f_bubble = blocks.load_bubble;
  Vec f_lin = blocks.load_u_lin;
  // tau (f,q) + (1/M)(p^{m-1},q) + alpha (div u^{m-1}, q)
  Vec f_p = sys.tau * f_elem + (1.0 / sys.params.M) * spmv(blocks.M_p, p_prev) -
            a * (spmv(blocks.B_b, u_b) + spmv(blocks.B_l, u_l));
  Vec f_w = sys.tau * blocks.load_w;

  if (sys.variant != SystemVariant::Eliminated) {
    Vec rhs(nb + nl + np + nw);
    rhs << f_bubble, f_lin, f_p, f_w;
    return rhs;
  }
  const Vec inv_d = sys.D_bb_diag.cwiseInverse();
  const Vec d_fb = inv_d.cwiseProduct(f_bubble);
  Vec rhs(nl + np + nw);
  rhs.head(nl) = f_lin - spmv(sparse_transpose(*sys.A_bl), d_fb);
  rhs.segment(nl, np) = f_p + a * spmv(*sys.B_b, d_fb);
  rhs.tail(nw) = f_w;
  return rhs;
}

Vec recover_bubbles(const BiotSystem& elim_sys, const Vec& rhs_bubble, const Vec& u_lin,
                    const Vec& p) {
  if (elim_sys.variant != SystemVariant::Eliminated)
    throw std::invalid_argument("recover_bubbles: expects the eliminated system");
  const Real a = elim_sys.params.alpha;
  const Vec r = rhs_bubble - spmv(*elim_sys.A_bl, u_lin) -
                a * spmv(sparse_transpose(*elim_sys.B_b), p);
  return elim_sys.D_bb_diag.cwiseInverse().cwiseProduct(r);
}

void export_system(const BiotSystem& sys, const std::string& path_prefix) {
  write_matrix_market(path_prefix + ".mtx", sys.assemble());
  std::ofstream os(path_prefix + ".blocks.txt");
  if (!os) throw std::runtime_error("export_system: cannot open " + path_prefix + ".blocks.txt");
  os << "variant " << to_string(sys.variant) << "\n";
  os << "tau " << sys.tau << "\n";
  os << "blocks " << sys.partition.size() << "\n";
  const char* names4[] = {"u_bubble", "u_linear", "pressure", "flux"};
  const char* names3[] = {"u_linear", "pressure", "flux"};
  for (size_t i = 0; i < sys.partition.size(); ++i)
    os << (sys.partition.size() == 4 ? names4[i] : names3[i]) << " " << sys.partition[i] << "\n";
}

}  // namespace biotprec
