// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#include "biotprec/amg.hpp"

#include <algorithm>
#include <cmath>

namespace biotprec {

namespace {

// node -> aggregate id via greedy aggregation on the strength graph
std::vector<int> aggregate_nodes(const SpMat& A, const AmgOptions& opts, int* n_aggregates) {
  const Index n = A.rows();
  const int bs = opts.block_size;
  const Index n_nodes = n / bs;
  const Vec diag = A.diagonal().cwiseAbs();

  // strong node-to-node adjacency, each list sorted by construction
  std::vector<std::vector<int>> nbrs(static_cast<size_t>(n_nodes));
  for (Index i = 0; i < A.outerSize(); ++i) {
    const int ni = static_cast<int>(i / bs);
    for (SpMat::InnerIterator it(A, i); it; ++it) {
      const int nj = static_cast<int>(it.col() / bs);
      if (nj == ni) continue;
      const Real thresh = opts.strength * std::sqrt(diag[i] * diag[it.col()]);
      if (std::abs(it.value()) >= thresh && thresh > 0) nbrs[ni].push_back(nj);
    }
  }
  for (auto& list : nbrs) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<int> agg(static_cast<size_t>(n_nodes), -1);
  int next = 0;
  // pass 1: aggregate a node together with its full strong neighborhood
  for (Index v = 0; v < n_nodes; ++v) {
    if (agg[v] >= 0) continue;
    bool free_nbrs = true;
    for (int w : nbrs[v])
      if (agg[w] >= 0) {
        free_nbrs = false;
        break;
      }
    if (!free_nbrs) continue;
    agg[v] = next;
    for (int w : nbrs[v]) agg[w] = next;
    ++next;
  }
  // pass 2: attach leftovers to the first aggregated strong neighbor
  for (Index v = 0; v < n_nodes; ++v) {
    if (agg[v] >= 0) continue;
    for (int w : nbrs[v])
      if (agg[w] >= 0) {
        agg[v] = agg[w];
        break;
      }
    if (agg[v] < 0) agg[v] = next++;  // isolated
  }
  *n_aggregates = next;
  return agg;
}

SpMat build_prolongator(const std::vector<int>& agg, int n_aggregates, int bs) {
  const Index n = static_cast<Index>(agg.size()) * bs;
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int node = static_cast<int>(i / bs);
    const int comp = static_cast<int>(i % bs);
    ts.emplace_back(i, static_cast<Index>(agg[node]) * bs + comp, 1.0);
  }
  return from_triplets(n, static_cast<Index>(n_aggregates) * bs, ts);
}

void gauss_seidel(const SpMat& A, const Vec& b, Vec& x, bool forward) {
  const Index n = A.rows();
  for (Index s = 0; s < n; ++s) {
    const Index i = forward ? s : n - 1 - s;
    Real acc = b[i];
    Real aii = 0.0;
    for (SpMat::InnerIterator it(A, i); it; ++it) {
      if (it.col() == i)
        aii = it.value();
      else
        acc -= it.value() * x[it.col()];
    }
    x[i] = acc / aii;
  }
}

void smooth(const AmgHierarchy& h, int level, const Vec& b, Vec& x, bool forward) {
  const SpMat& A = h.A[static_cast<size_t>(level)];
  if (h.opts.smoother == AmgOptions::Smoother::SymmetricGaussSeidel) {
    gauss_seidel(A, b, x, forward);
  } else {
    const Vec r = b - A * x;
    x += h.opts.jacobi_damping * r.cwiseQuotient(A.diagonal());
  }
}

Vec vcycle_level(const AmgHierarchy& h, int level, const Vec& b) {
  if (level == h.levels() - 1) {
    if (h.coarse) return h.coarse->solve(b);
    Vec x = Vec::Zero(b.size());  // smoother-only fallback
    smooth(h, level, b, x, true);
    smooth(h, level, b, x, false);
    return x;
  }
  const SpMat& A = h.A[static_cast<size_t>(level)];
  const SpMat& P = h.P[static_cast<size_t>(level)];
  Vec x = Vec::Zero(b.size());
  smooth(h, level, b, x, true);
  const Vec r = b - A * x;
  const Vec rc = P.transpose() * r;
  const Vec ec = vcycle_level(h, level + 1, rc);
  x += P * ec;
  smooth(h, level, b, x, false);
  return x;
}

}  // namespace

AmgHierarchy amg_setup(const SpMat& A_in, const AmgOptions& opts) {
  if (A_in.rows() != A_in.cols()) throw std::invalid_argument("amg_setup: matrix must be square");
  if (opts.block_size < 1 || A_in.rows() % opts.block_size != 0)
    throw std::invalid_argument("amg_setup: rows not divisible by block size");

  AmgHierarchy h;
  h.opts = opts;
  h.A.push_back(A_in);
  while (h.A.back().rows() > opts.coarsest_size && h.levels() < opts.max_levels) {
    const SpMat& A = h.A.back();
    int n_agg = 0;
    std::vector<int> agg = aggregate_nodes(A, opts, &n_agg);
    const Index nc = static_cast<Index>(n_agg) * opts.block_size;
    if (nc >= A.rows()) break;  // aggregation stalled
    SpMat P = build_prolongator(agg, n_agg, opts.block_size);
    SpMat Ac = P.transpose() * A * P;
    Ac.makeCompressed();
    h.aggregates.push_back(std::move(agg));
    h.P.push_back(std::move(P));
    h.A.push_back(std::move(Ac));
  }
  // direct solve on the coarsest level unless coarsening stalled far from it
  if (h.A.back().rows() <= 4 * opts.coarsest_size)
    h.coarse = Factorization::compute(h.A.back(), FactorKind::SparseLU);
  return h;
}

Vec vcycle(const AmgHierarchy& hierarchy, const Vec& r) {
  if (r.size() != hierarchy.A.front().rows())
    throw std::invalid_argument("vcycle: dimension mismatch");
  return vcycle_level(hierarchy, 0, r);
}

}  // namespace biotprec
