// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#include "biotprec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace biotprec {

const char* to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::Free: return "free";
    case BoundaryLabel::Clamped: return "clamped";
    case BoundaryLabel::SymmetryX: return "symmetry-x";
    case BoundaryLabel::SymmetryY: return "symmetry-y";
    case BoundaryLabel::LoadPatch: return "load-patch";
  }
  return "?";
}

Real SimplicialMesh::element_volume(int e) const {
  const auto& el = elements[e];
  if (dim == 2) {
    const Vec a = vertices.row(el[1]) - vertices.row(el[0]);
    const Vec b = vertices.row(el[2]) - vertices.row(el[0]);
    return 0.5 * (a[0] * b[1] - a[1] * b[0]);
  }
  Eigen::Matrix3d J;
  for (int k = 0; k < 3; ++k) J.col(k) = (vertices.row(el[k + 1]) - vertices.row(el[0])).transpose();
  return J.determinant() / 6.0;
}

Vec SimplicialMesh::element_centroid(int e) const {
  Vec c = Vec::Zero(dim);
  for (int k = 0; k <= dim; ++k) c += vertices.row(elements[e][k]).transpose();
  return c / Real(dim + 1);
}

Real SimplicialMesh::facet_area(int f) const {
  const auto& fv = facet_vertices[f];
  if (dim == 2) return (vertices.row(fv[1]) - vertices.row(fv[0])).norm();
  const Eigen::Vector3d a = vertices.row(fv[1]) - vertices.row(fv[0]);
  const Eigen::Vector3d b = vertices.row(fv[2]) - vertices.row(fv[0]);
  return 0.5 * a.cross(b).norm();
}

Vec SimplicialMesh::facet_normal(int f) const {
  const auto& fv = facet_vertices[f];
  if (dim == 2) {
    const Vec t = vertices.row(fv[1]) - vertices.row(fv[0]);
    Vec n(2);
    n << t[1], -t[0];
    return n / n.norm();
  }
  const Eigen::Vector3d a = vertices.row(fv[1]) - vertices.row(fv[0]);
  const Eigen::Vector3d b = vertices.row(fv[2]) - vertices.row(fv[0]);
  Eigen::Vector3d n = a.cross(b);
  return n / n.norm();
}

Vec SimplicialMesh::facet_centroid(int f) const {
  Vec c = Vec::Zero(dim);
  for (int k = 0; k < dim; ++k) c += vertices.row(facet_vertices[f][k]).transpose();
  return c / Real(dim);
}

Real SimplicialMesh::shape_regularity() const {
  Real worst = 0.0;
  for (int e = 0; e < n_elements(); ++e) {
    const Real vol = element_volume(e);
    Real surf = 0.0, longest = 0.0;
    for (int k = 0; k <= dim; ++k) {
      surf += facet_area(element_facets[e][k]);
      for (int l = k + 1; l <= dim; ++l)
        longest = std::max(longest,
                           (vertices.row(elements[e][k]) - vertices.row(elements[e][l])).norm());
    }
    const Real inradius = dim * vol / surf;
    Real circum;
    if (dim == 2) {
      // R = abc / (4A)
      const auto& el = elements[e];
      const Real a = (vertices.row(el[1]) - vertices.row(el[2])).norm();
      const Real b = (vertices.row(el[0]) - vertices.row(el[2])).norm();
      const Real c = (vertices.row(el[0]) - vertices.row(el[1])).norm();
      circum = a * b * c / (4.0 * vol);
    } else {
      // crude but refinement-invariant upper bound on R for the regularity ratio
      circum = longest / std::sqrt(2.0);
    }
    worst = std::max(worst, circum / inradius);
  }
  return worst;
}

void SimplicialMesh::dump(std::ostream& os) const {
  os << "dim " << dim << "\n";
  os << "vertices " << n_vertices() << "\n";
  os.precision(17);
  for (int v = 0; v < n_vertices(); ++v) {
    for (int k = 0; k < dim; ++k) os << (k ? " " : "") << vertices(v, k);
    os << "\n";
  }
  os << "elements " << n_elements() << "\n";
  for (int e = 0; e < n_elements(); ++e) {
    for (int k = 0; k <= dim; ++k) os << (k ? " " : "") << elements[e][k];
    os << "\n";
  }
  os << "facets " << n_facets() << "\n";
  for (int f = 0; f < n_facets(); ++f) {
    for (int k = 0; k < dim; ++k) os << (k ? " " : "") << facet_vertices[f][k];
    os << " boundary " << (facet_on_boundary(f) ? 1 : 0) << "\n";
  }
}

namespace {

void build_facets(SimplicialMesh& mesh) {
  const int d = mesh.dim;
  const int nfpe = d + 1;
  // Facet k of an element is opposite local vertex k.
  std::map<std::array<int, 3>, int> ids;
  for (const auto& el : mesh.elements) {
    for (int k = 0; k < nfpe; ++k) {
      std::array<int, 3> key{-1, -1, -1};
      int m = 0;
      for (int l = 0; l < nfpe; ++l)
        if (l != k) key[m++] = el[l];
      std::sort(key.begin(), key.begin() + d);
      ids.emplace(key, 0);
    }
  }
  int next = 0;
  for (auto& kv : ids) kv.second = next++;  // lexicographic, deterministic

  mesh.facet_vertices.resize(ids.size());
  mesh.facet_elements.assign(ids.size(), {-1, -1});
  mesh.element_facets.assign(mesh.elements.size(), {-1, -1, -1, -1});
  mesh.element_facet_sign.assign(mesh.elements.size(), {0, 0, 0, 0});
  for (const auto& kv : ids) mesh.facet_vertices[kv.second] = kv.first;

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    for (int k = 0; k < nfpe; ++k) {
      std::array<int, 3> key{-1, -1, -1};
      int m = 0;
      for (int l = 0; l < nfpe; ++l)
        if (l != k) key[m++] = el[l];
      std::sort(key.begin(), key.begin() + d);
      const int f = ids.at(key);
      mesh.element_facets[e][k] = f;
      auto& inc = mesh.facet_elements[f];
      if (inc[0] < 0)
        inc[0] = e;
      else
        inc[1] = e;
      // outward direction: from the opposite vertex towards the facet
      const Vec n = mesh.facet_normal(f);
      const Vec out = mesh.facet_centroid(f) - mesh.vertices.row(el[k]).transpose();
      mesh.element_facet_sign[e][k] = (n.dot(out) > 0.0) ? 1 : -1;
    }
  }
}

}  // namespace

SimplicialMesh build_structured_square(int N) {
  if (N < 1) throw std::invalid_argument("build_structured_square: N must be >= 1");
  SimplicialMesh mesh;
  mesh.dim = 2;
  const int nv = (N + 1) * (N + 1);
  mesh.vertices.resize(nv, 2);
  const Real h = 1.0 / N;
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) {
      const int v = j * (N + 1) + i;
      mesh.vertices(v, 0) = i * h;
      mesh.vertices(v, 1) = j * h;
    }
  mesh.elements.reserve(2 * N * N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const int v00 = j * (N + 1) + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + (N + 1);
      const int v11 = v01 + 1;
      mesh.elements.push_back({v00, v10, v11, -1});
      mesh.elements.push_back({v00, v11, v01, -1});
    }
  build_facets(mesh);
  return mesh;
}

SimplicialMesh build_structured_cube(int N) {
  if (N < 1) throw std::invalid_argument("build_structured_cube: N must be >= 1");
  SimplicialMesh mesh;
  mesh.dim = 3;
  const int n1 = N + 1;
  mesh.vertices.resize(n1 * n1 * n1, 3);
  const Real h = 1.0 / N;
  auto vid = [n1](int i, int j, int k) { return (k * n1 + j) * n1 + i; };
  for (int k = 0; k <= N; ++k)
    for (int j = 0; j <= N; ++j)
      for (int i = 0; i <= N; ++i) {
        const int v = vid(i, j, k);
        mesh.vertices(v, 0) = i * h;
        mesh.vertices(v, 1) = j * h;
        mesh.vertices(v, 2) = k * h;
      }
  // Kuhn subdivision: walk along the axes in every permutation order
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  mesh.elements.reserve(6 * N * N * N);
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        for (const auto& p : perms) {
          std::array<int, 3> step{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = vid(step[0], step[1], step[2]);
          for (int s = 0; s < 3; ++s) {
            step[p[s]] += 1;
            tet[s + 1] = vid(step[0], step[1], step[2]);
          }
          mesh.elements.push_back(tet);
        }
      }
  // make all signed volumes positive
  for (auto& tet : mesh.elements) {
    Eigen::Matrix3d J;
    for (int c = 0; c < 3; ++c)
      J.col(c) = (mesh.vertices.row(tet[c + 1]) - mesh.vertices.row(tet[0])).transpose();
    if (J.determinant() < 0) std::swap(tet[2], tet[3]);
  }
  build_facets(mesh);
  return mesh;
}

BoundaryLabel BoundaryTag::at(int facet) const {
  auto it = labels.find(facet);
  if (it == labels.end())
    throw std::out_of_range("BoundaryTag: facet " + std::to_string(facet) + " not labeled");
  return it->second;
}

void BoundaryTag::insert(int facet, BoundaryLabel label) {
  auto [it, fresh] = labels.emplace(facet, label);
  if (!fresh && it->second != label)
    throw std::invalid_argument("BoundaryTag: conflicting labels on facet " +
                                std::to_string(facet));
}

BoundaryTag classify_boundary(const SimplicialMesh& mesh, Problem problem) {
  BoundaryTag tag;
  const Real tol = 1e-12;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    if (!mesh.facet_on_boundary(f)) continue;
    const Vec c = mesh.facet_centroid(f);
    if (problem == Problem::Mandel2D) {
      if (mesh.dim != 2) throw std::invalid_argument("classify_boundary: mandel2d needs a 2D mesh");
      if (c[0] < tol)
        tag.insert(f, BoundaryLabel::SymmetryX);
      else if (c[1] < tol)
        tag.insert(f, BoundaryLabel::SymmetryY);
      else if (c[0] > 1.0 - tol)
        tag.insert(f, BoundaryLabel::Free);  // drained, traction free
      else if (c[1] > 1.0 - tol)
        tag.insert(f, BoundaryLabel::LoadPatch);  // loaded top plate
      else
        throw std::logic_error("classify_boundary: boundary facet off the unit square");
    } else {
      if (mesh.dim != 3) throw std::invalid_argument("classify_boundary: footing3d needs a 3D mesh");
      if (c[2] < tol)
        tag.insert(f, BoundaryLabel::Clamped);
      else if (c[2] > 1.0 - tol && std::abs(c[0] - 0.5) <= 0.25 + tol &&
               std::abs(c[1] - 0.5) <= 0.25 + tol)
        tag.insert(f, BoundaryLabel::LoadPatch);
      else
        tag.insert(f, BoundaryLabel::Free);  // drained
    }
  }
  return tag;
}

}  // namespace biotprec
