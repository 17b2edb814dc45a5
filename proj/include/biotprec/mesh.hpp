// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_MESH_HPP
#define BIOTPREC_MESH_HPP

#include "biotprec/core.hpp"

#include <array>
#include <iosfwd>
#include <map>

namespace biotprec {

enum class BoundaryLabel { Free, Clamped, SymmetryX, SymmetryY, LoadPatch };

const char* to_string(BoundaryLabel label);

/// Simplicial mesh of the unit square (2D) or unit cube (3D) with globally
/// oriented facets.  Facets are edges in 2D and triangular faces in 3D; the
/// canonical facet normal is derived from the facet's sorted vertex ids, so
/// it is a fixed global direction shared by both incident elements.
class SimplicialMesh {
 public:
  int dim = 2;
  Mat vertices;                                  // #vertices x dim
  std::vector<std::array<int, 4>> elements;      // dim+1 vertex ids (last unused in 2D)
  std::vector<std::array<int, 3>> facet_vertices;  // sorted ids (last unused in 2D)
  std::vector<std::array<int, 2>> facet_elements;  // incident elements, -1 if none
  std::vector<std::array<int, 4>> element_facets;  // facet id per local facet
  std::vector<std::array<int, 4>> element_facet_sign;  // +1 canonical normal outward

  int n_vertices() const { return static_cast<int>(vertices.rows()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_facets() const { return static_cast<int>(facet_vertices.size()); }
  int facets_per_element() const { return dim + 1; }
  int vertices_per_facet() const { return dim; }

  bool facet_on_boundary(int f) const { return facet_elements[f][1] < 0; }

  Real element_volume(int e) const;
  Vec element_centroid(int e) const;
  Real facet_area(int f) const;
  Vec facet_normal(int f) const;  // canonical unit normal
  Vec facet_centroid(int f) const;
  /// Local facet index opposite to local vertex v is v itself: facet k of an
  /// element is the one not containing the element's k-th vertex.
  int local_facet_opposite_vertex(int e, int k) const { return elements[e][k]; }

  /// Circumradius / inradius, maximized over elements.
  Real shape_regularity() const;

  void dump(std::ostream& os) const;
};

/// 2N^2 right triangles on the unit square; every cell is split along the
/// lower-left to upper-right diagonal.
SimplicialMesh build_structured_square(int N);

/// 6N^3 tetrahedra on the unit cube (Kuhn subdivision of every cell).
SimplicialMesh build_structured_cube(int N);

enum class Problem { Mandel2D, Footing3D };

/// Facet id -> label for every boundary facet.
struct BoundaryTag {
  std::map<int, BoundaryLabel> labels;

  BoundaryLabel at(int facet) const;
  void insert(int facet, BoundaryLabel label);
};

BoundaryTag classify_boundary(const SimplicialMesh& mesh, Problem problem);

}  // namespace biotprec

#endif  // BIOTPREC_MESH_HPP
