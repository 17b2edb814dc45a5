// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "biotprec/mesh.hpp"

#include <cmath>
#include <sstream>

using namespace biotprec;

TEST_CASE("structured square counts and Euler formula") {
  const SimplicialMesh m1 = build_structured_square(1);
  CHECK(m1.n_elements() == 2);
  CHECK(m1.n_vertices() == 4);
  CHECK(m1.n_facets() == 5);

  const SimplicialMesh m2 = build_structured_square(2);
  CHECK(m2.n_elements() == 8);
  CHECK(m2.n_vertices() == 9);
  CHECK(m2.n_facets() == 16);
  // V - E + F = 1 for a planar triangulation (outer face excluded)
  CHECK(m2.n_vertices() - m2.n_facets() + m2.n_elements() == 1);

  CHECK_THROWS_AS((void)build_structured_square(0), std::invalid_argument);
}

TEST_CASE("structured square has equal element areas") {
  for (int N : {1, 3, 4}) {
    const SimplicialMesh m = build_structured_square(N);
    const Real expect = 1.0 / (2.0 * N * N);
    for (int e = 0; e < m.n_elements(); ++e)
      CHECK(m.element_volume(e) == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("structured cube counts and volume") {
  const SimplicialMesh m = build_structured_cube(1);
  CHECK(m.n_elements() == 6);
  CHECK(m.n_vertices() == 8);
  Real vol = 0;
  for (int e = 0; e < m.n_elements(); ++e) {
    CHECK(m.element_volume(e) > 0);
    vol += m.element_volume(e);
  }
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-14));

  const SimplicialMesh m2 = build_structured_cube(2);
  CHECK(m2.n_elements() == 48);
  CHECK(m2.n_vertices() == 27);
  Real vol2 = 0;
  for (int e = 0; e < m2.n_elements(); ++e) vol2 += m2.element_volume(e);
  CHECK(vol2 == doctest::Approx(1.0).epsilon(1e-13));

  CHECK_THROWS_AS((void)build_structured_cube(0), std::invalid_argument);
}

TEST_CASE("every interior facet has two incident elements with opposite signs") {
  for (int dim = 2; dim <= 3; ++dim) {
    const SimplicialMesh m = (dim == 2) ? build_structured_square(3) : build_structured_cube(2);
    std::vector<int> sign_sum(static_cast<size_t>(m.n_facets()), 0);
    std::vector<int> count(static_cast<size_t>(m.n_facets()), 0);
    for (int e = 0; e < m.n_elements(); ++e)
      for (int k = 0; k <= dim; ++k) {
        sign_sum[static_cast<size_t>(m.element_facets[e][k])] += m.element_facet_sign[e][k];
        count[static_cast<size_t>(m.element_facets[e][k])] += 1;
      }
    for (int f = 0; f < m.n_facets(); ++f) {
      if (m.facet_on_boundary(f)) {
        CHECK(count[static_cast<size_t>(f)] == 1);
      } else {
        CHECK(count[static_cast<size_t>(f)] == 2);
        CHECK(sign_sum[static_cast<size_t>(f)] == 0);
      }
    }
  }
}

TEST_CASE("shape regularity is constant across the structured family") {
  const Real r2 = build_structured_square(2).shape_regularity();
  const Real r8 = build_structured_square(8).shape_regularity();
  CHECK(r2 == doctest::Approx(r8).epsilon(1e-12));
  const Real c1 = build_structured_cube(1).shape_regularity();
  const Real c3 = build_structured_cube(3).shape_regularity();
  CHECK(c1 == doctest::Approx(c3).epsilon(1e-12));
}

TEST_CASE("mandel boundary classification") {
  const SimplicialMesh m = build_structured_square(2);
  const BoundaryTag tags = classify_boundary(m, Problem::Mandel2D);
  int sx = 0, sy = 0, free = 0, load = 0, total = 0;
  for (int f = 0; f < m.n_facets(); ++f) {
    if (!m.facet_on_boundary(f)) continue;
    ++total;
    switch (tags.at(f)) {
      case BoundaryLabel::SymmetryX: ++sx; break;
      case BoundaryLabel::SymmetryY: ++sy; break;
      case BoundaryLabel::Free: ++free; break;
      case BoundaryLabel::LoadPatch: ++load; break;
      default: break;
    }
  }
  CHECK(sx == 2);
  CHECK(sy == 2);
  CHECK(free == 2);
  CHECK(load == 2);
  CHECK(total == 8);
  // full boundary coverage: at() would have thrown otherwise
  CHECK(static_cast<int>(tags.labels.size()) == total);
}

TEST_CASE("footing boundary classification covers the central patch") {
  const SimplicialMesh m = build_structured_cube(4);
  const BoundaryTag tags = classify_boundary(m, Problem::Footing3D);
  int clamped = 0, load = 0, free = 0, boundary = 0;
  for (int f = 0; f < m.n_facets(); ++f) {
    if (!m.facet_on_boundary(f)) continue;
    ++boundary;
    const BoundaryLabel label = tags.at(f);
    const Vec c = m.facet_centroid(f);
    if (label == BoundaryLabel::Clamped) {
      ++clamped;
      CHECK(c[2] == doctest::Approx(0.0));
    } else if (label == BoundaryLabel::LoadPatch) {
      ++load;
      CHECK(c[2] == doctest::Approx(1.0));
      CHECK(std::abs(c[0] - 0.5) <= 0.25 + 1e-12);
      CHECK(std::abs(c[1] - 0.5) <= 0.25 + 1e-12);
    } else {
      ++free;
    }
  }
  CHECK(boundary == 6 * 4 * 4 * 2);  // two triangles per boundary cell face
  CHECK(clamped == 32);
  CHECK(load == 8);  // the central 2x2 cells of the top face
  CHECK(static_cast<int>(tags.labels.size()) == boundary);
}

TEST_CASE("boundary tag rejects conflicts and unknown facets") {
  BoundaryTag tags;
  tags.insert(3, BoundaryLabel::Free);
  tags.insert(3, BoundaryLabel::Free);  // same label is fine
  CHECK_THROWS_AS(tags.insert(3, BoundaryLabel::Clamped), std::invalid_argument);
  CHECK_THROWS_AS((void)tags.at(4), std::out_of_range);
}

TEST_CASE("mesh dump lists vertices, elements and facets") {
  const SimplicialMesh m = build_structured_square(1);
  std::ostringstream os;
  m.dump(os);
  const std::string text = os.str();
  CHECK(text.find("dim 2") != std::string::npos);
  CHECK(text.find("vertices 4") != std::string::npos);
  CHECK(text.find("elements 2") != std::string::npos);
  CHECK(text.find("facets 5") != std::string::npos);
}
