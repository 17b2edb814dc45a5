// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#include "biotprec/fem.hpp"

#include <cmath>
#include <functional>

namespace biotprec {

BcPolicy bc_policy(Problem problem) {
  BcPolicy policy;
  if (problem == Problem::Mandel2D) {
    // quadrant model: mirror symmetry on x=0 and y=0, drained free side at
    // x=1, impermeable rigid plate at y=1 (uniform vertical displacement)
    policy[BoundaryLabel::SymmetryX] = BcRule{true, true, {{true, false, false}}};
    policy[BoundaryLabel::SymmetryY] = BcRule{true, true, {{false, true, false}}};
    policy[BoundaryLabel::Free] = BcRule{};
    policy[BoundaryLabel::LoadPatch] = BcRule{true, true, {{false, true, false}}};
  } else {
    policy[BoundaryLabel::Clamped] = BcRule{true, true, {{true, true, true}}};
    policy[BoundaryLabel::Free] = BcRule{};      // free to drain
    policy[BoundaryLabel::LoadPatch] = BcRule{};  // loaded and drained
  }
  return policy;
}

DofMaps build_dof_maps(const SimplicialMesh& mesh, const BoundaryTag& tags,
                       const BcPolicy& policy) {
  DofMaps dofs;
  const int d = mesh.dim;
  dofs.dim = d;
  dofs.bubble = {Space::Bubble, mesh.n_facets(), std::vector<uint8_t>(mesh.n_facets(), 0)};
  dofs.u_lin = {Space::P1Vector, d * mesh.n_vertices(),
                std::vector<uint8_t>(d * mesh.n_vertices(), 0)};
  dofs.pressure = {Space::P0, mesh.n_elements(), std::vector<uint8_t>(mesh.n_elements(), 0)};
  dofs.flux = {Space::RT0, mesh.n_facets(), std::vector<uint8_t>(mesh.n_facets(), 0)};

  for (const auto& [f, label] : tags.labels) {
    auto it = policy.find(label);
    if (it == policy.end()) continue;
    const BcRule& rule = it->second;
    if (rule.flux) dofs.flux.constrained[f] = 1;
    if (rule.bubble) dofs.bubble.constrained[f] = 1;
    for (int c = 0; c < d; ++c) {
      if (!rule.comp[c]) continue;
      for (int k = 0; k < mesh.vertices_per_facet(); ++k)
        dofs.u_lin.constrained[p1_dof(mesh.facet_vertices[f][k], c, d)] = 1;
    }
  }
  return dofs;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace {

Real factorial(int n) {
  Real f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void compositions(int total, int parts, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& emit) {
  if (parts == 1) {
    cur.push_back(total);
    emit(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    cur.push_back(v);
    compositions(total - v, parts - 1, cur, emit);
    cur.pop_back();
  }
}

}  // namespace

QuadratureRule simplex_quadrature(int dim, int degree) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("simplex_quadrature: dim must be 1..3");
  const int s = std::max(0, (degree - 1 + 1) / 2);  // smallest s with 2s+1 >= degree
  const int d = 2 * s + 1;
  const int n = dim;

  std::vector<std::array<Real, 4>> pts;
  std::vector<Real> wts;
  for (int i = 0; i <= s; ++i) {
    const Real coef = ((i % 2) ? -1.0 : 1.0) * std::pow(2.0, -2.0 * s) *
                      std::pow(Real(d + n - 2 * i), d) /
                      (factorial(i) * factorial(d + n - i));
    std::vector<int> cur;
    compositions(s - i, n + 1, cur, [&](const std::vector<int>& beta) {
      std::array<Real, 4> bary{0, 0, 0, 0};
      for (int j = 0; j <= n; ++j) bary[j] = Real(2 * beta[j] + 1) / Real(d + n - 2 * i);
      pts.push_back(bary);
      wts.push_back(coef);
    });
  }

  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = d;
  rule.points.resize(static_cast<Index>(pts.size()), n + 1);
  rule.weights.resize(static_cast<Index>(wts.size()));
  for (size_t q = 0; q < pts.size(); ++q) {
    for (int j = 0; j <= n; ++j) rule.points(static_cast<Index>(q), j) = pts[q][j];
    rule.weights[static_cast<Index>(q)] = wts[q];
  }
  return rule;
}

Real barycentric_monomial_integral(int dim, const std::vector<int>& exps, Real volume) {
  int total = 0;
  Real num = 1;
  for (int e : exps) {
    num *= factorial(e);
    total += e;
  }
  return volume * factorial(dim) * num / factorial(total + dim);
}

// ---------------------------------------------------------------------------
// Element geometry
// ---------------------------------------------------------------------------

namespace {

struct ElementGeometry {
  Real volume = 0;
  Mat grads;    // (dim+1) x dim gradients of barycentric coordinates
  Mat corners;  // (dim+1) x dim vertex coordinates
};

ElementGeometry element_geometry(const SimplicialMesh& mesh, int e) {
  const int d = mesh.dim;
  ElementGeometry g;
  g.corners.resize(d + 1, d);
  for (int k = 0; k <= d; ++k) g.corners.row(k) = mesh.vertices.row(mesh.elements[e][k]);
  Mat J(d, d);
  for (int k = 0; k < d; ++k) J.col(k) = (g.corners.row(k + 1) - g.corners.row(0)).transpose();
  const Real det = J.determinant();
  g.volume = det / factorial(d);
  if (g.volume <= 0) throw std::logic_error("element_geometry: nonpositive volume");
  const Mat Jit = J.inverse().transpose();
  g.grads.resize(d + 1, d);
  for (int k = 0; k < d; ++k) g.grads.row(k + 1) = Jit.col(k).transpose();
  g.grads.row(0) = -g.grads.bottomRows(d).colwise().sum();
  return g;
}

// gradient of the facet bubble prod_{l != k} lambda_l at barycentric point bc
Vec bubble_gradient(const ElementGeometry& g, int k, const Vec& bc, int d) {
  Vec grad = Vec::Zero(d);
  for (int l = 0; l <= d; ++l) {
    if (l == k) continue;
    Real prod = 1.0;
    for (int m = 0; m <= d; ++m)
      if (m != k && m != l) prod *= bc[m];
    grad += prod * g.grads.row(l).transpose();
  }
  return grad;
}

// 2 mu eps(phi1):eps(phi2) + lambda div(phi1) div(phi2) for fields of the
// form phi = b(x) n with gradient n (x) g
inline Real elastic_pair(const Vec& n1, const Vec& g1, const Vec& n2, const Vec& g2, Real mu,
                         Real lambda) {
  return mu * (n1.dot(n2) * g1.dot(g2) + n1.dot(g2) * n2.dot(g1)) +
         lambda * n1.dot(g1) * n2.dot(g2);
}

// grad(phi1) : grad(phi2)
inline Real gradient_pair(const Vec& n1, const Vec& g1, const Vec& n2, const Vec& g2, Real,
                          Real) {
  return n1.dot(n2) * g1.dot(g2);
}

using PairKernel = Real (*)(const Vec&, const Vec&, const Vec&, const Vec&, Real, Real);

ElasticityBlocks assemble_pair_form(const SimplicialMesh& mesh, Real c1, Real c2,
                                    PairKernel kernel) {
  const int d = mesh.dim;
  const QuadratureRule quad = simplex_quadrature(d, 4);
  const Real ref_vol = 1.0 / factorial(d);

  const int nb = mesh.n_facets();
  const int nl = d * mesh.n_vertices();
  std::vector<Triplet> t_bb, t_bl, t_ll;
  const int nfpe = d + 1;

  Mat bubble_n(nfpe, d);
  std::vector<Vec> bubble_g(nfpe, Vec(d));
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementGeometry g = element_geometry(mesh, e);
    const Real scale = g.volume / ref_vol;
    for (int k = 0; k < nfpe; ++k)
      bubble_n.row(k) = mesh.facet_normal(mesh.element_facets[e][k]).transpose();

    Mat Abb = Mat::Zero(nfpe, nfpe);
    Mat Abl = Mat::Zero(nfpe, nfpe * d);
    Mat All = Mat::Zero(nfpe * d, nfpe * d);
    for (Index q = 0; q < quad.weights.size(); ++q) {
      const Vec bc = quad.points.row(q).head(d + 1).transpose();
      const Real w = quad.weights[q] * scale;
      for (int k = 0; k < nfpe; ++k) bubble_g[k] = bubble_gradient(g, k, bc, d);
      for (int k = 0; k < nfpe; ++k) {
        const Vec nk = bubble_n.row(k).transpose();
        for (int l = 0; l < nfpe; ++l) {
          const Vec nl_ = bubble_n.row(l).transpose();
          Abb(k, l) += w * kernel(nk, bubble_g[k], nl_, bubble_g[l], c1, c2);
        }
        for (int a = 0; a < nfpe; ++a)
          for (int c = 0; c < d; ++c) {
            const Vec ec = Vec::Unit(d, c);
            const Vec ga = g.grads.row(a).transpose();
            Abl(k, a * d + c) += w * kernel(nk, bubble_g[k], ec, ga, c1, c2);
          }
      }
      for (int a = 0; a < nfpe; ++a)
        for (int c = 0; c < d; ++c) {
          const Vec ec = Vec::Unit(d, c);
          const Vec ga = g.grads.row(a).transpose();
          for (int b = 0; b < nfpe; ++b)
            for (int cc = 0; cc < d; ++cc) {
              const Vec ecc = Vec::Unit(d, cc);
              const Vec gb = g.grads.row(b).transpose();
              All(a * d + c, b * d + cc) += w * kernel(ec, ga, ecc, gb, c1, c2);
            }
        }
    }
    for (int k = 0; k < nfpe; ++k) {
      const int fk = mesh.element_facets[e][k];
      for (int l = 0; l < nfpe; ++l)
        t_bb.emplace_back(fk, mesh.element_facets[e][l], Abb(k, l));
      for (int a = 0; a < nfpe; ++a)
        for (int c = 0; c < d; ++c)
          t_bl.emplace_back(fk, p1_dof(mesh.elements[e][a], c, d), Abl(k, a * d + c));
    }
    for (int a = 0; a < nfpe; ++a)
      for (int c = 0; c < d; ++c)
        for (int b = 0; b < nfpe; ++b)
          for (int cc = 0; cc < d; ++cc)
            t_ll.emplace_back(p1_dof(mesh.elements[e][a], c, d),
                              p1_dof(mesh.elements[e][b], cc, d), All(a * d + c, b * d + cc));
  }

  ElasticityBlocks blocks;
  blocks.A_bb = from_triplets(nb, nb, t_bb);
  blocks.A_bl = from_triplets(nb, nl, t_bl);
  blocks.A_ll = from_triplets(nl, nl, t_ll);
  return blocks;
}

}  // namespace

ElasticityBlocks assemble_elasticity(const SimplicialMesh& mesh, Real mu, Real lambda) {
  if (mu <= 0) throw std::invalid_argument("assemble_elasticity: mu must be positive");
  if (lambda < 0) throw std::invalid_argument("assemble_elasticity: lambda must be nonnegative");
  return assemble_pair_form(mesh, mu, lambda, elastic_pair);
}

ElasticityBlocks assemble_vector_gradient(const SimplicialMesh& mesh) {
  return assemble_pair_form(mesh, 1.0, 0.0, gradient_pair);
}

DivBlocks assemble_div_coupling(const SimplicialMesh& mesh) {
  const int d = mesh.dim;
  const QuadratureRule quad = simplex_quadrature(d, 4);
  const Real ref_vol = 1.0 / factorial(d);
  const int np = mesh.n_elements();
  const int nfpe = d + 1;
  std::vector<Triplet> t_b, t_l, t_w;

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementGeometry g = element_geometry(mesh, e);
    const Real scale = g.volume / ref_vol;
    for (int k = 0; k < nfpe; ++k) {
      const int f = mesh.element_facets[e][k];
      // -(int div(b_f n_f)) over the element
      const Vec nf = mesh.facet_normal(f);
      Real div_int = 0.0;
      for (Index q = 0; q < quad.weights.size(); ++q) {
        const Vec bc = quad.points.row(q).head(d + 1).transpose();
        div_int += quad.weights[q] * scale * nf.dot(bubble_gradient(g, k, bc, d));
      }
      t_b.emplace_back(e, f, -div_int);
      // RT0: total flux through facet f equals the dof, so the divergence
      // integral is just the orientation sign
      t_w.emplace_back(e, f, -Real(mesh.element_facet_sign[e][k]));
    }
    for (int a = 0; a < nfpe; ++a)
      for (int c = 0; c < d; ++c)
        t_l.emplace_back(e, p1_dof(mesh.elements[e][a], c, d), -g.grads(a, c) * g.volume);
  }

  DivBlocks blocks;
  blocks.B_b = from_triplets(np, mesh.n_facets(), t_b);
  blocks.B_l = from_triplets(np, d * mesh.n_vertices(), t_l);
  blocks.B_w = from_triplets(np, mesh.n_facets(), t_w);
  return blocks;
}

SpMat assemble_flux_mass(const SimplicialMesh& mesh, Real mu_f, const Vec& k_elem) {
  if (k_elem.size() != mesh.n_elements())
    throw std::invalid_argument("assemble_flux_mass: k must be piecewise constant per element");
  if (k_elem.minCoeff() <= 0)
    throw std::invalid_argument("assemble_flux_mass: permeability must be positive");
  const int d = mesh.dim;
  const QuadratureRule quad = simplex_quadrature(d, 4);
  const Real ref_vol = 1.0 / factorial(d);
  const int nfpe = d + 1;
  std::vector<Triplet> ts;

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementGeometry g = element_geometry(mesh, e);
    const Real scale = g.volume / ref_vol;
    const Real coef = mu_f / k_elem[e];
    // RT0 basis on this element: phi_k = sign_k (x - x_k) / (d |T|)
    Mat local = Mat::Zero(nfpe, nfpe);
    for (Index q = 0; q < quad.weights.size(); ++q) {
      const Vec bc = quad.points.row(q).head(d + 1).transpose();
      const Vec x = g.corners.transpose() * bc;
      const Real w = quad.weights[q] * scale * coef;
      for (int k = 0; k < nfpe; ++k) {
        const Vec pk = Real(mesh.element_facet_sign[e][k]) *
                       (x - g.corners.row(k).transpose()) / (d * g.volume);
        for (int l = 0; l <= k; ++l) {
          const Vec pl = Real(mesh.element_facet_sign[e][l]) *
                         (x - g.corners.row(l).transpose()) / (d * g.volume);
          local(k, l) += w * pk.dot(pl);
        }
      }
    }
    for (int k = 0; k < nfpe; ++k)
      for (int l = 0; l < nfpe; ++l) {
        const Real v = (l <= k) ? local(k, l) : local(l, k);
        ts.emplace_back(mesh.element_facets[e][k], mesh.element_facets[e][l], v);
      }
  }
  return from_triplets(mesh.n_facets(), mesh.n_facets(), ts);
}

SpMat assemble_p0_mass(const SimplicialMesh& mesh) {
  std::vector<Triplet> ts;
  ts.reserve(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) ts.emplace_back(e, e, mesh.element_volume(e));
  return from_triplets(mesh.n_elements(), mesh.n_elements(), ts);
}

TractionLoad assemble_traction(const SimplicialMesh& mesh, const BoundaryTag& tags,
                               const std::map<BoundaryLabel, Vec>& tractions) {
  const int d = mesh.dim;
  TractionLoad load;
  load.bubble = Vec::Zero(mesh.n_facets());
  load.u_lin = Vec::Zero(d * mesh.n_vertices());
  // int_F lambda_a = |F|/d,  int_F prod lambda = |F|/6 (2D) or |F|/60 (3D)
  const Real bubble_fact = (d == 2) ? 1.0 / 6.0 : 1.0 / 60.0;
  for (const auto& [f, label] : tags.labels) {
    auto it = tractions.find(label);
    if (it == tractions.end()) continue;
    const Vec& t = it->second;
    const Real area = mesh.facet_area(f);
    for (int k = 0; k < mesh.vertices_per_facet(); ++k)
      for (int c = 0; c < d; ++c)
        load.u_lin[p1_dof(mesh.facet_vertices[f][k], c, d)] += t[c] * area / d;
    load.bubble[f] += t.dot(mesh.facet_normal(f)) * area * bubble_fact;
  }
  return load;
}

SpMat eliminate_constrained(const SpMat& A, const std::vector<uint8_t>* mask_rows,
                            const std::vector<uint8_t>* mask_cols, bool unit_diag) {
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(A.nonZeros()));
  for (Index i = 0; i < A.outerSize(); ++i) {
    const bool row_out = mask_rows && (*mask_rows)[static_cast<size_t>(i)];
    for (SpMat::InnerIterator it(A, i); it; ++it) {
      const bool col_out = mask_cols && (*mask_cols)[static_cast<size_t>(it.col())];
      if (row_out || col_out) continue;
      ts.emplace_back(i, it.col(), it.value());
    }
  }
  if (unit_diag && mask_rows) {
    if (A.rows() != A.cols()) throw std::invalid_argument("eliminate_constrained: not square");
    for (Index i = 0; i < A.rows(); ++i)
      if ((*mask_rows)[static_cast<size_t>(i)]) ts.emplace_back(i, i, 1.0);
  }
  return from_triplets(A.rows(), A.cols(), ts);
}

void apply_essential_bcs(AssembledBlocks& blocks, const DofMaps& dofs) {
  const auto& mb = dofs.bubble.constrained;
  const auto& ml = dofs.u_lin.constrained;
  const auto& mw = dofs.flux.constrained;
  blocks.A_bb = eliminate_constrained(blocks.A_bb, &mb, &mb, true);
  blocks.A_bl = eliminate_constrained(blocks.A_bl, &mb, &ml, false);
  blocks.A_ll = eliminate_constrained(blocks.A_ll, &ml, &ml, true);
  blocks.B_b = eliminate_constrained(blocks.B_b, nullptr, &mb, false);
  blocks.B_l = eliminate_constrained(blocks.B_l, nullptr, &ml, false);
  blocks.B_w = eliminate_constrained(blocks.B_w, nullptr, &mw, false);
  blocks.M_w = eliminate_constrained(blocks.M_w, &mw, &mw, true);
  for (Index i = 0; i < blocks.load_bubble.size(); ++i)
    if (mb[static_cast<size_t>(i)]) blocks.load_bubble[i] = 0.0;
  for (Index i = 0; i < blocks.load_u_lin.size(); ++i)
    if (ml[static_cast<size_t>(i)]) blocks.load_u_lin[i] = 0.0;
  for (Index i = 0; i < blocks.load_w.size(); ++i)
    if (mw[static_cast<size_t>(i)]) blocks.load_w[i] = 0.0;
}

}  // namespace biotprec
