// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_KRYLOV_HPP
#define BIOTPREC_KRYLOV_HPP

#include "biotprec/core.hpp"

#include <cmath>
#include <utility>

namespace biotprec {

/// Echo of the configuration a solve belongs to (one benchmark CSV row).
struct ReportEcho {
  std::string problem, precond, variant;
  Real h = 0, tau = 0, nu = 0, k = 0, k_jump = 0;
  bool inexact = false;
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  std::vector<Real> history;  // relative residual after each iteration
  Real final_relres = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  ReportEcho echo;
};

struct FgmresOptions {
  Real tol = 1e-8;
  int max_iters = 500;
  int restart = 0;  // 0: full recurrence
};

namespace detail {

// Arnoldi step: modified Gram-Schmidt with one reorthogonalization pass when
// cancellation is detected.  Returns ||w|| after orthogonalization.
inline Real orthogonalize(const std::vector<Vec>& V, Vec& w, Mat& H, int j) {
  const Real before = w.norm();
  for (int i = 0; i <= j; ++i) {
    const Real hij = V[static_cast<size_t>(i)].dot(w);
    H(i, j) += hij;
    w -= hij * V[static_cast<size_t>(i)];
  }
  if (w.norm() < 0.7 * before) {
    for (int i = 0; i <= j; ++i) {
      const Real hij = V[static_cast<size_t>(i)].dot(w);
      H(i, j) += hij;
      w -= hij * V[static_cast<size_t>(i)];
    }
  }
  return w.norm();
}

inline void apply_givens(Vec& cs, Vec& sn, Mat& H, Vec& g, int j) {
  for (int i = 0; i < j; ++i) {
    const Real t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
    H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
    H(i, j) = t;
  }
  const Real denom = std::hypot(H(j, j), H(j + 1, j));
  cs[j] = (denom == 0.0) ? 1.0 : H(j, j) / denom;
  sn[j] = (denom == 0.0) ? 0.0 : H(j + 1, j) / denom;
  H(j, j) = denom;
  H(j + 1, j) = 0.0;
  g[j + 1] = -sn[j] * g[j];
  g[j] = cs[j] * g[j];
}

inline Vec solve_upper(const Mat& H, const Vec& g, int m) {
  Vec y(m);
  for (int i = m - 1; i >= 0; --i) {
    Real acc = g[i];
    for (int j = i + 1; j < m; ++j) acc -= H(i, j) * y[j];
    y[i] = acc / H(i, i);
  }
  return y;
}

}  // namespace detail

/// Flexible GMRES with right preconditioning; the preconditioner may change
/// between iterations (inner Krylov solves).  Convergence is declared on the
/// Givens residual estimate relative to ||b|| and confirmed against the true
/// residual; iteration counts are deterministic for a deterministic operator
/// and preconditioner.
template <class Op, class Prec>
std::pair<Vec, SolveReport> fgmres(const Op& A, const Vec& b, const Prec& P,
                                   const FgmresOptions& opts = {}) {
  SolveReport report;
  Vec x = Vec::Zero(b.size());
  const Real bnorm = b.norm();
  if (bnorm == 0.0) {
    report.converged = true;
    return {x, report};
  }

  bool first = true;
  while (report.iterations < opts.max_iters) {
    const Vec r = first ? b : Vec(b - A(x));
    const Real beta = r.norm();
    report.final_relres = beta / bnorm;
    if (!first && report.final_relres <= opts.tol) {
      report.converged = true;
      return {x, report};
    }
    first = false;

    const int m_max = opts.restart > 0 ? std::min(opts.restart, opts.max_iters - report.iterations)
                                       : opts.max_iters - report.iterations;
    std::vector<Vec> V, Z;
    V.reserve(static_cast<size_t>(m_max) + 1);
    Z.reserve(static_cast<size_t>(m_max));
    V.push_back(r / beta);
    Mat H = Mat::Zero(m_max + 1, m_max);
    Vec g = Vec::Zero(m_max + 1);
    Vec cs = Vec::Zero(m_max), sn = Vec::Zero(m_max);
    g[0] = beta;

    int m = 0;
    bool estimate_converged = false;
    while (m < m_max) {
      const int j = m;
      Z.push_back(P(V[static_cast<size_t>(j)]));
      Vec w = A(Z.back());
      const Real hj1 = detail::orthogonalize(V, w, H, j);
      H(j + 1, j) = hj1;
      detail::apply_givens(cs, sn, H, g, j);
      ++report.iterations;
      ++m;
      const Real relres = std::abs(g[j + 1]) / bnorm;
      report.history.push_back(relres);
      if (relres <= opts.tol || hj1 <= 1e-14 * beta) {
        // happy breakdown falls through to the true-residual check above
        estimate_converged = true;
        break;
      }
      V.push_back(w / hj1);
    }
    if (m > 0) {
      const Vec y = detail::solve_upper(H, g, m);
      for (int i = 0; i < m; ++i) x += y[i] * Z[static_cast<size_t>(i)];
    }
    if (!estimate_converged && opts.restart == 0) break;  // max_iters exhausted
  }
  const Real true_relres = (b - A(x)).norm() / bnorm;
  report.final_relres = true_relres;
  report.converged = true_relres <= opts.tol;
  return {x, report};
}

struct IdentityPrec {
  Vec operator()(const Vec& v) const { return v; }
};

/// Plain right-preconditioned GMRES for inner solves; the preconditioner must
/// be a fixed linear operator.  Only the unpreconditioned basis is stored.
template <class Op, class Prec>
std::pair<Vec, SolveReport> gmres_inner(const Op& A, const Vec& b, const Prec& M, Real tol = 1e-3,
                                        int max_iters = 200) {
  SolveReport report;
  Vec x = Vec::Zero(b.size());
  const Real bnorm = b.norm();
  if (bnorm == 0.0) {
    report.converged = true;
    return {x, report};
  }
  std::vector<Vec> V;
  V.reserve(static_cast<size_t>(max_iters) + 1);
  V.push_back(b / bnorm);
  Mat H = Mat::Zero(max_iters + 1, max_iters);
  Vec g = Vec::Zero(max_iters + 1);
  Vec cs = Vec::Zero(max_iters), sn = Vec::Zero(max_iters);
  g[0] = bnorm;
  int m = 0;
  while (m < max_iters) {
    const int j = m;
    Vec w = A(M(V[static_cast<size_t>(j)]));
    const Real hj1 = detail::orthogonalize(V, w, H, j);
    H(j + 1, j) = hj1;
    detail::apply_givens(cs, sn, H, g, j);
    ++report.iterations;
    ++m;
    const Real relres = std::abs(g[j + 1]) / bnorm;
    report.history.push_back(relres);
    report.final_relres = relres;
    if (relres <= tol || hj1 <= 1e-14 * bnorm) {
      report.converged = true;
      break;
    }
    V.push_back(w / hj1);
  }
  if (m > 0) {
    const Vec y = detail::solve_upper(H, g, m);
    Vec u = Vec::Zero(b.size());
    for (int i = 0; i < m; ++i) u += y[i] * V[static_cast<size_t>(i)];
    x = M(u);
  }
  return {x, report};
}

}  // namespace biotprec

#endif  // BIOTPREC_KRYLOV_HPP
