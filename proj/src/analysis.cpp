// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#include "biotprec/analysis.hpp"

#include "biotprec/fem.hpp"

#include <cmath>
#include <random>

namespace biotprec {

namespace {

Mat blkdiag(const std::vector<const SpMat*>& blocks) {
  Index n = 0;
  for (const auto* b : blocks) n += b->rows();
  Mat D = Mat::Zero(n, n);
  Index off = 0;
  for (const auto* b : blocks) {
    D.block(off, off, b->rows(), b->cols()) = to_dense(*b);
    off += b->rows();
  }
  return D;
}

Vec extreme_eigs(const Mat& A, const Mat& B) {
  EigOptions opts;
  opts.with_vectors = false;
  return dense_sym_eig(A, &B, opts).values;
}

// deterministic uniform [-1,1] draws, independent of stdlib distributions
struct DetRng {
  std::mt19937 gen;
  explicit DetRng(unsigned seed) : gen(seed) {}
  Real operator()() {
    return 2.0 * (static_cast<Real>(gen()) / 4294967295.0) - 1.0;
  }
  Vec vector(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = (*this)();
    return v;
  }
};

}  // namespace

SpMat norm_matrix(const BiotSystem& sys, NormKind kind) {
  if (kind == NormKind::D && sys.variant != SystemVariant::DiagBubble)
    throw std::invalid_argument("norm_matrix: D norm needs the diagonal-bubble system");
  if (kind == NormKind::DE && sys.variant != SystemVariant::Eliminated)
    throw std::invalid_argument("norm_matrix: DE norm needs the eliminated system");
  if (kind == NormKind::Dtilde && sys.variant != SystemVariant::DiagBubble)
    throw std::invalid_argument("norm_matrix: Dtilde norm needs the diagonal-bubble system");

  if (kind == NormKind::Dtilde) {
    const BiotSystem elim = eliminate_bubbles(sys);
    const WeightedBlocks wbe = build_weighted_blocks(elim);
    const SpMat Dbb = sparse_diagonal(sys.D_bb_diag);
    BlockOperator op({Dbb.rows(), wbe.displacement->rows(), wbe.pressure->rows(),
                      wbe.flux->rows()},
                     {Dbb.rows(), wbe.displacement->rows(), wbe.pressure->rows(),
                      wbe.flux->rows()});
    op.set(0, 0, Dbb);
    op.set(1, 1, wbe.displacement);
    op.set(2, 2, wbe.pressure);
    op.set(3, 3, wbe.flux);
    return op.assemble();
  }
  const WeightedBlocks wb = build_weighted_blocks(sys);
  BlockOperator op({wb.displacement->rows(), wb.pressure->rows(), wb.flux->rows()},
                   {wb.displacement->rows(), wb.pressure->rows(), wb.flux->rows()});
  op.set(0, 0, wb.displacement);
  op.set(1, 1, wb.pressure);
  op.set(2, 2, wb.flux);
  return op.assemble();
}

InfSupResult inf_sup_constant(const Mat& A, const Mat& D, Index dense_limit) {
  if (A.rows() > dense_limit)
    throw std::invalid_argument("inf_sup_constant: size exceeds dense limit");
  Eigen::LLT<Mat> llt(0.5 * (D + D.transpose()));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("inf_sup_constant: norm matrix not SPD");
  const Mat DinvA = llt.solve(A);
  Mat M1 = A.transpose() * DinvA;
  M1 = 0.5 * (M1 + M1.transpose());
  EigOptions opts;
  opts.with_vectors = false;
  opts.dense_limit = dense_limit;
  const Vec lam = dense_sym_eig(M1, &D, opts).values;
  InfSupResult out;
  out.varsigma = std::sqrt(std::max(lam[lam.size() - 1], 0.0));
  const Real cutoff = 1e-10 * out.varsigma;
  out.gamma = out.varsigma;
  for (Index i = 0; i < lam.size(); ++i) {
    const Real sv = std::sqrt(std::max(lam[i], 0.0));
    if (sv > cutoff) {
      out.gamma = sv;
      break;
    }
  }
  return out;
}

InfSupResult inf_sup_constant(const BiotSystem& sys, const SpMat& D, Index dense_limit) {
  return inf_sup_constant(to_dense(sys.assemble()), to_dense(D), dense_limit);
}

std::pair<Real, Real> spectral_interval(const Mat& A, const Mat& B, Index dense_limit) {
  EigOptions opts;
  opts.with_vectors = false;
  opts.dense_limit = dense_limit;
  const Vec lam = dense_sym_eig(A, &B, opts).values;
  if (lam[0] <= 0)
    throw std::invalid_argument("spectral_interval: indefinite pencil");
  return {lam[0], lam[lam.size() - 1]};
}

std::pair<Real, Real> spectral_interval(const SpMat& A, const SpMat& B, Index dense_limit) {
  return spectral_interval(to_dense(A), to_dense(B), dense_limit);
}

FovResult fov_core(const Mat& G, const Mat& W) {
  FovResult out;
  const Mat WG = W * G;
  const Mat S = 0.5 * (WG + WG.transpose());
  out.sigma = extreme_eigs(S, W)[0];
  Mat T = G.transpose() * W * G;
  T = 0.5 * (T + T.transpose());
  const Vec lam = extreme_eigs(T, W);
  out.upsilon = std::sqrt(std::max(lam[lam.size() - 1], 0.0));
  return out;
}

FovResult fov_bounds(const Mat& L, const Mat& A, const Mat& N) {
  Eigen::LLT<Mat> llt(0.5 * (N + N.transpose()));
  if (llt.info() != Eigen::Success) throw std::invalid_argument("fov_bounds: N not SPD");
  const Mat W = llt.solve(Mat::Identity(N.rows(), N.cols()));
  return fov_core(L * A, 0.5 * (W + W.transpose()));
}

Real equivalence_deviation(const Mat& S, const Mat& A) {
  const Mat E = Mat::Identity(A.rows(), A.cols()) - S * A;
  Mat M1 = E.transpose() * A * E;
  M1 = 0.5 * (M1 + M1.transpose());
  const Vec lam = extreme_eigs(M1, 0.5 * (A + A.transpose()));
  return std::sqrt(std::max(lam[lam.size() - 1], 0.0));
}

Real sampled_equivalence_deviation(const std::function<Vec(const Vec&)>& S, const SpMat& A,
                                   int samples, unsigned seed) {
  DetRng rng(seed);
  Real worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec v = rng.vector(A.rows());
    const Vec e = v - S(spmv(A, v));
    const Real num = std::sqrt(std::max(e.dot(spmv(A, e)), 0.0));
    const Real den = std::sqrt(std::max(v.dot(spmv(A, v)), 0.0));
    if (den > 0) worst = std::max(worst, num / den);
  }
  return worst;
}

Mat materialize(const std::function<Vec(const Vec&)>& apply, Index n) {
  Mat M(n, n);
  Vec e = Vec::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    M.col(j) = apply(e);
    e[j] = 0.0;
  }
  return M;
}

Mat preconditioner_matrix(const BlockPreconditioner& P) {
  if (!P.linear())
    throw std::invalid_argument(
        "preconditioner_matrix: nonlinear preconditioner (inner Krylov) rejected");
  return materialize([&P](const Vec& v) { return P.apply(v); }, P.rows());
}

FovResult fov_bounds_for(const BlockPreconditioner& P, const BiotSystem& sys) {
  const Mat Pm = preconditioner_matrix(P);
  const Mat Am = to_dense(sys.assemble());
  const WeightedBlocks& wb = P.weights();
  const Mat Dm = blkdiag({wb.displacement.get(), wb.pressure.get(), wb.flux.get()});
  if (P.family() == PrecFamily::Upper) {
    Eigen::LLT<Mat> llt(Dm);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("fov_bounds_for: weighted norm not SPD");
    Mat W = llt.solve(Mat::Identity(Dm.rows(), Dm.cols()));
    return fov_core(Am * Pm, 0.5 * (W + W.transpose()));
  }
  return fov_core(Pm * Am, Dm);
}

// ---------------------------------------------------------------------------
// Inequality suite
// ---------------------------------------------------------------------------

namespace {

Real lambda_max_pencil(const Mat& A, const Mat& B) {
  const Vec lam = extreme_eigs(0.5 * (A + A.transpose()), B);
  return lam[lam.size() - 1];
}

Real lambda_min_pencil(const Mat& A, const Mat& B) {
  return extreme_eigs(0.5 * (A + A.transpose()), B)[0];
}

Real lambda_min_positive(const Mat& A, const Mat& B) {
  const Vec lam = extreme_eigs(0.5 * (A + A.transpose()), B);
  const Real cutoff = 1e-10 * std::max(lam[lam.size() - 1], 0.0);
  for (Index i = 0; i < lam.size(); ++i)
    if (lam[i] > cutoff) return lam[i];
  return 0.0;
}

InequalityItem make_item(const std::string& name, Real measured, Real bound, bool upper_bound) {
  InequalityItem item;
  item.name = name;
  item.measured = measured;
  item.bound = bound;
  const Real scale = std::max(std::abs(bound), 1e-300);
  item.slack = (upper_bound ? (bound - measured) : (measured - bound)) / scale;
  item.pass = item.slack >= -1e-9;
  return item;
}

}  // namespace

InequalityReport verify_paper_inequalities(const SimplicialMesh& mesh, const BoundaryTag& tags,
                                           const PhysicalParams& params) {
  const int d = mesh.dim;
  const Problem problem = (d == 2) ? Problem::Mandel2D : Problem::Footing3D;
  const DofMaps dofs = build_dof_maps(mesh, tags, bc_policy(problem));

  AssembledBlocks blocks;
  {
    ElasticityBlocks el = assemble_elasticity(mesh, params.mu, params.lambda);
    DivBlocks div = assemble_div_coupling(mesh);
    blocks.A_bb = std::move(el.A_bb);
    blocks.A_bl = std::move(el.A_bl);
    blocks.A_ll = std::move(el.A_ll);
    blocks.B_b = std::move(div.B_b);
    blocks.B_l = std::move(div.B_l);
    blocks.B_w = std::move(div.B_w);
    blocks.M_w = assemble_flux_mass(mesh, params.mu_f, Vec::Constant(mesh.n_elements(), 1.0));
    blocks.M_p = assemble_p0_mass(mesh);
    blocks.load_bubble = Vec::Zero(mesh.n_facets());
    blocks.load_u_lin = Vec::Zero(d * mesh.n_vertices());
    blocks.load_p = Vec::Zero(mesh.n_elements());
    blocks.load_w = Vec::Zero(mesh.n_facets());
    apply_essential_bcs(blocks, dofs);
  }

  const BiotSystem full = build_full_system(blocks, params, 1.0, d);
  const BiotSystem diag = build_diag_bubble_system(full);
  const BiotSystem elim = eliminate_bubbles(diag);
  const WeightedBlocks wb_full = build_weighted_blocks(full);
  const WeightedBlocks wb_diag = build_weighted_blocks(diag);
  const WeightedBlocks wb_elim = build_weighted_blocks(elim);
  const DerivedParams dp = full.derived;
  const Real inv_zeta2 = 1.0 / (dp.zeta * dp.zeta);

  // H1-seminorm (vector gradient) matrix over the same constrained space
  ElasticityBlocks gr = assemble_vector_gradient(mesh);
  gr.A_bb = eliminate_constrained(gr.A_bb, &dofs.bubble.constrained, &dofs.bubble.constrained, true);
  gr.A_bl = eliminate_constrained(gr.A_bl, &dofs.bubble.constrained, &dofs.u_lin.constrained, false);
  gr.A_ll = eliminate_constrained(gr.A_ll, &dofs.u_lin.constrained, &dofs.u_lin.constrained, true);

  const Index nb = blocks.A_bb.rows();
  const Index nl = blocks.A_ll.rows();
  const Mat A_u = to_dense(*wb_full.displacement);
  const Mat A_uD = to_dense(*wb_diag.displacement);
  Mat G_u(nb + nl, nb + nl);
  G_u.topLeftCorner(nb, nb) = to_dense(gr.A_bb);
  G_u.topRightCorner(nb, nl) = to_dense(gr.A_bl);
  G_u.bottomLeftCorner(nl, nb) = to_dense(gr.A_bl).transpose();
  G_u.bottomRightCorner(nl, nl) = to_dense(gr.A_ll);

  Mat B_u(blocks.M_p.rows(), nb + nl);
  B_u.leftCols(nb) = to_dense(blocks.B_b);
  B_u.rightCols(nl) = to_dense(blocks.B_l);
  const Mat M_p = to_dense(blocks.M_p);
  const Vec mp_inv = blocks.M_p.diagonal().cwiseInverse();
  const Mat A_bb = to_dense(blocks.A_bb);
  const Mat D_bb = Mat(diag.D_bb_diag.asDiagonal());
  const Mat B_b = to_dense(blocks.B_b);

  const Mat A_uE = to_dense(*elim.A_uE);
  const Mat B_uE = to_dense(*elim.B_uE);
  const Mat A_pE = to_dense(*elim.A_pE);
  const Mat A_pEs = to_dense(*wb_elim.pressure);

  InequalityReport report;
  auto add = [&report](InequalityItem item) {
    report.items.push_back(item);
    report.all_pass = report.all_pass && item.pass;
  };

  // || B v ||_{Mp^{-1}} <= (1/zeta) || v ||_{A_u} and its bubble restriction
  const Mat BtMB = B_u.transpose() * mp_inv.asDiagonal() * B_u;
  add(make_item("div_bound_Au", lambda_max_pencil(BtMB, A_u), inv_zeta2, true));
  const Mat BbtMBb = B_b.transpose() * mp_inv.asDiagonal() * B_b;
  add(make_item("div_bound_Abb", lambda_max_pencil(BbtMBb, A_bb), inv_zeta2, true));
  add(make_item("div_bound_Dbb", lambda_max_pencil(BbtMBb, D_bb), inv_zeta2, true));

  // spectral equivalence || u ||_{A_u} <= || u ||_{A_u^D} with constant eta
  add(make_item("adequiv_lower", lambda_min_pencil(A_uD, A_u), 1.0, false));
  const Real eta2 = lambda_max_pencil(A_uD, A_u);

  // scaled Stokes inf-sup: gamma_B = gamma_B^0 / sqrt(d)
  Eigen::LDLT<Mat> Gld(G_u), Ald(A_u), ADld(A_uD), AEld(A_uE);
  const Mat SG = B_u * Gld.solve(B_u.transpose());
  const Mat SA = B_u * Ald.solve(B_u.transpose());
  const Mat SAD = B_u * ADld.solve(B_u.transpose());
  const Real gamma_B0_sq = lambda_min_positive(SG, M_p);
  add(make_item("stokes_infsup_Au", lambda_min_positive(SA, M_p),
                gamma_B0_sq / (d * dp.zeta * dp.zeta), false));
  add(make_item("stokes_infsup_AuD", lambda_min_positive(SAD, M_p),
                gamma_B0_sq / (d * dp.zeta * dp.zeta * eta2), false));

  // eliminated-system lower bound
  const Mat SE = B_uE * AEld.solve(B_uE.transpose()) +
                 B_b * diag.D_bb_diag.cwiseInverse().asDiagonal() * B_b.transpose();
  add(make_item("elim_Bp_lower", lambda_min_pencil(SE, M_p),
                gamma_B0_sq / (d * dp.zeta * dp.zeta * eta2), false));

  // pressure-weight orderings
  add(make_item("ApEs_geq_cpinv_Mp", lambda_min_pencil(A_pEs, M_p), 1.0 / dp.c_p, false));
  add(make_item("ApEs_geq_ApE", lambda_min_pencil(A_pEs, A_pE), 1.0, false));

  // zeta^2 || B_u^E v ||^2_{Mp^{-1}} <= || v ||^2_{A_u^E}
  const Mat BEtMBE = B_uE.transpose() * mp_inv.asDiagonal() * B_uE;
  add(make_item("div_bound_AuE", lambda_max_pencil(BEtMBE, A_uE), inv_zeta2, true));

  return report;
}

// ---------------------------------------------------------------------------
// L S L~^T decomposition
// ---------------------------------------------------------------------------

LslReport lsl_decomposition_check(const BiotSystem& diag_sys, Real tol) {
  if (diag_sys.variant != SystemVariant::DiagBubble)
    throw std::invalid_argument("lsl_decomposition_check: expects the diagonal-bubble system");
  const Index nb = diag_sys.partition[0];
  const Index nl = diag_sys.partition[1];
  const Index np = diag_sys.partition[2];
  const Index nw = diag_sys.partition[3];
  const Index n = nb + nl + np + nw;
  const Real a = diag_sys.params.alpha;

  const Mat AD = to_dense(diag_sys.assemble());
  const BiotSystem elim = eliminate_bubbles(diag_sys);
  const Mat AE = to_dense(elim.assemble());

  Mat S = Mat::Zero(n, n);
  if (nb > 0) S.topLeftCorner(nb, nb) = Mat(diag_sys.D_bb_diag.asDiagonal());
  S.bottomRightCorner(nl + np + nw, nl + np + nw) = AE;

  Mat L = Mat::Identity(n, n);
  Mat Lt = Mat::Identity(n, n);
  if (nb > 0) {
    const Mat AblT_Dinv =
        to_dense(*diag_sys.A_bl).transpose() * diag_sys.D_bb_diag.cwiseInverse().asDiagonal();
    const Mat Bb_Dinv =
        to_dense(*diag_sys.B_b) * diag_sys.D_bb_diag.cwiseInverse().asDiagonal();
    // inverses are unit lower block-triangular with only the first block
    // column filled, so negation inverts them
    L.block(nb, 0, nl, nb) = AblT_Dinv;
    L.block(nb + nl, 0, np, nb) = -a * Bb_Dinv;
    Lt.block(nb, 0, nl, nb) = AblT_Dinv;
    Lt.block(nb + nl, 0, np, nb) = a * Bb_Dinv;
  }

  LslReport report;
  const Real scale = std::max(AD.cwiseAbs().maxCoeff(), 1.0);
  report.lsl_error = (L * S * Lt.transpose() - AD).cwiseAbs().maxCoeff() / scale;
  const Real escale = std::max(AE.cwiseAbs().maxCoeff(), 1.0);
  report.submatrix_error =
      (S.bottomRightCorner(nl + np + nw, nl + np + nw) - AE).cwiseAbs().maxCoeff() / escale;
  report.s11_error =
      nb > 0 ? (S.topLeftCorner(nb, nb) - Mat(diag_sys.D_bb_diag.asDiagonal())).cwiseAbs().maxCoeff()
             : 0.0;
  report.pass = report.lsl_error < tol && report.submatrix_error < 1e-12 && report.s11_error == 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// W-inner-product GMRES envelope
// ---------------------------------------------------------------------------

EnvelopeReport gmres_envelope_check(const Mat& G, const Mat& W, const Vec& b, Real sigma,
                                    Real upsilon, Real tol, int max_iters) {
  EnvelopeReport report;
  report.rate = 1.0 - (sigma * sigma) / (upsilon * upsilon);
  const auto wnorm = [&W](const Vec& v) { return std::sqrt(std::max(v.dot(W * v), 0.0)); };
  const auto wdot = [&W](const Vec& u, const Vec& v) { return u.dot(W * v); };

  const Real eta0 = wnorm(b);
  report.residuals.push_back(eta0);
  if (eta0 == 0.0) {
    report.pass = true;
    return report;
  }
  std::vector<Vec> V;
  V.push_back(b / eta0);
  Mat H = Mat::Zero(max_iters + 1, max_iters);
  Vec g = Vec::Zero(max_iters + 1);
  Vec cs = Vec::Zero(max_iters), sn = Vec::Zero(max_iters);
  g[0] = eta0;
  report.pass = true;
  for (int j = 0; j < max_iters; ++j) {
    Vec w = G * V[static_cast<size_t>(j)];
    for (int i = 0; i <= j; ++i) {
      const Real hij = wdot(V[static_cast<size_t>(i)], w);
      H(i, j) += hij;
      w -= hij * V[static_cast<size_t>(i)];
    }
    for (int i = 0; i <= j; ++i) {  // one reorthogonalization pass
      const Real hij = wdot(V[static_cast<size_t>(i)], w);
      H(i, j) += hij;
      w -= hij * V[static_cast<size_t>(i)];
    }
    const Real hj1 = wnorm(w);
    H(j + 1, j) = hj1;
    for (int i = 0; i < j; ++i) {
      const Real t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
      H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
      H(i, j) = t;
    }
    const Real denom = std::hypot(H(j, j), H(j + 1, j));
    cs[j] = (denom == 0.0) ? 1.0 : H(j, j) / denom;
    sn[j] = (denom == 0.0) ? 0.0 : H(j + 1, j) / denom;
    g[j + 1] = -sn[j] * g[j];
    g[j] = cs[j] * g[j];
    const Real eta = std::abs(g[j + 1]);
    report.residuals.push_back(eta);
    const Real envelope = eta0 * std::pow(std::max(report.rate, 0.0), j + 1);
    if (eta > envelope * (1.0 + 1e-8)) report.pass = false;
    if (eta / eta0 <= tol || hj1 <= 1e-14 * eta0) break;
    V.push_back(w / hj1);
  }
  return report;
}

}  // namespace biotprec
