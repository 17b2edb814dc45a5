// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "biotprec/core.hpp"
#include "test_utils.hpp"

#include <cstdio>
#include <fstream>

using namespace biotprec;
using testutil::Rng;

namespace {

SpMat random_sparse(Index rows, Index cols, Real fill, Rng& rng) {
  std::vector<Triplet> ts;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (0.5 * (rng.uniform() + 1.0) < fill) ts.emplace_back(i, j, rng.uniform());
  return from_triplets(rows, cols, ts);
}

}  // namespace

TEST_CASE("spmv identity and diagonal") {
  const SpMat I = sparse_identity(3);
  Vec x(3);
  x << 1, 2, 3;
  CHECK((spmv(I, x) - x).norm() == 0.0);

  Vec d(2);
  d << 2, 3;
  const SpMat D = sparse_diagonal(d);
  Vec ones = Vec::Ones(2);
  const Vec y = spmv(D, ones);
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 3.0);
}

TEST_CASE("spmv matches the dense multiplication oracle") {
  Rng rng(11);
  const SpMat A = random_sparse(20, 20, 0.3, rng);
  const Mat Ad = to_dense(A);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x = rng.vector(20);
    const Vec diff = spmv(A, x) - testutil::dense_matvec(Ad, x);
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK_THROWS_AS((void)spmv(A, Vec::Zero(7)), std::invalid_argument);
}

TEST_CASE("sparse_triple_product basics") {
  const SpMat I = sparse_identity(4);
  const Vec ones = Vec::Ones(4);
  const SpMat P = sparse_triple_product(I, ones, I);
  CHECK((to_dense(P) - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

  // an entry of d multiplying a structurally empty column is never touched
  std::vector<Triplet> ts{{0, 0, 2.0}, {1, 2, 3.0}};
  const SpMat A = from_triplets(2, 3, ts);
  Vec d(3);
  d << 1.0, 0.0, 2.0;  // column 1 of A is empty
  const SpMat B = sparse_identity(3);
  const SpMat C = sparse_triple_product(A, d, B);
  Mat expect = Mat::Zero(2, 3);
  expect(0, 0) = 2.0;
  expect(1, 2) = 6.0;
  CHECK((to_dense(C) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sparse_triple_product against dense oracle and associativity") {
  Rng rng(23);
  const SpMat A = random_sparse(12, 9, 0.4, rng);
  const SpMat B = random_sparse(9, 14, 0.4, rng);
  const Vec d = rng.vector(9);
  const SpMat C = sparse_triple_product(A, d, B);
  const Mat oracle =
      testutil::dense_matmul(testutil::dense_matmul(to_dense(A), Mat(d.asDiagonal())), to_dense(B));
  CHECK((to_dense(C) - oracle).cwiseAbs().maxCoeff() < 1e-13);

  // (A D) B == A (D B)
  const SpMat AD = SpMat(A * d.asDiagonal());
  const SpMat DB = SpMat(d.asDiagonal() * B);
  const Mat left = to_dense(SpMat(AD * B));
  const Mat right = to_dense(SpMat(A * DB));
  CHECK((left - right).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("factorize and solve small cases") {
  Vec d(2);
  d << 2, 4;
  const Factorization F = factorize(sparse_diagonal(d), FactorKind::SparseLU);
  Vec b(2);
  b << 2, 4;
  CHECK((F.solve(b) - Vec::Ones(2)).norm() < 1e-14);

  const Factorization Fi = factorize(sparse_identity(5), FactorKind::DenseLU);
  Rng rng(3);
  const Vec r = rng.vector(5);
  CHECK((Fi.solve(r) - r).norm() < 1e-14);
}

TEST_CASE("factorize SPD matrix against the dense elimination oracle") {
  Rng rng(17);
  const Index n = 50;
  const Mat R = rng.matrix(n, n);
  Mat Ad = testutil::dense_matmul(R, R.transpose());
  Ad += Real(n) * Mat::Identity(n, n);
  std::vector<Triplet> ts;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) ts.emplace_back(i, j, Ad(i, j));
  const SpMat A = from_triplets(n, n, ts);
  const Vec b = rng.vector(n);
  const Vec oracle = testutil::dense_solve(Ad, b);
  for (auto kind : {FactorKind::SparseLU, FactorKind::DenseLU, FactorKind::DenseCholesky}) {
    const Vec x = factorize(A, kind).solve(b);
    CHECK((x - oracle).norm() / oracle.norm() < 1e-10);
  }
}

TEST_CASE("factorize rejects singular matrices") {
  std::vector<Triplet> ts{{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
  const SpMat A = from_triplets(2, 2, ts);
  CHECK_THROWS_AS((void)factorize(A, FactorKind::SparseLU), SingularMatrixError);
  CHECK_THROWS_AS((void)factorize(A, FactorKind::DenseCholesky), SingularMatrixError);
  CHECK_THROWS_AS((void)factorize(from_triplets(3, 3, {}), FactorKind::DenseLU),
                  SingularMatrixError);
  Rng rng(1);
  CHECK_THROWS_AS((void)factorize(random_sparse(3, 4, 1.0, rng), FactorKind::SparseLU),
                  std::invalid_argument);
}

TEST_CASE("factorize-solve is a left inverse on random instances") {
  Rng rng(29);
  for (Index n : {20, 120, 500}) {
    std::vector<Triplet> ts;
    for (Index i = 0; i < n; ++i) {
      ts.emplace_back(i, i, 8.0 + rng.uniform());
      for (int rep = 0; rep < 4; ++rep) {
        const Index j = static_cast<Index>((rng.uniform() + 1.0) * 0.5 * (n - 1));
        ts.emplace_back(i, j, rng.uniform());
      }
    }
    const SpMat A = from_triplets(n, n, ts);
    const Vec b = rng.vector(n);
    const Vec x = factorize(A, FactorKind::SparseLU).solve(b);
    CHECK((spmv(A, x) - b).norm() / b.norm() < 1e-10);
  }
}

TEST_CASE("dense_sym_eig simple spectra") {
  Mat A = Mat::Zero(3, 3);
  A(0, 0) = 3;
  A(1, 1) = 1;
  A(2, 2) = 2;
  const EigResult r = dense_sym_eig(A);
  CHECK(r.values[0] == doctest::Approx(1.0));
  CHECK(r.values[1] == doctest::Approx(2.0));
  CHECK(r.values[2] == doctest::Approx(3.0));

  Mat B(2, 2);
  B << 2, 1, 1, 2;
  const EigResult r2 = dense_sym_eig(B);
  CHECK(r2.values[0] == doctest::Approx(1.0));
  CHECK(r2.values[1] == doctest::Approx(3.0));
}

TEST_CASE("dense_sym_eig pencil against the Jacobi oracle") {
  Rng rng(41);
  const Index n = 30;
  Mat A = rng.matrix(n, n);
  A = Mat(0.5 * (A + A.transpose()));
  Mat Rb = rng.matrix(n, n);
  Mat B = testutil::dense_matmul(Rb, Rb.transpose());
  B += Real(n) * Mat::Identity(n, n);
  const EigResult r = dense_sym_eig(A, &B);
  const Vec oracle = testutil::jacobi_generalized_eigenvalues(A, B);
  CHECK((r.values - oracle).cwiseAbs().maxCoeff() < 1e-9);

  // eigenpair residuals below 1e-9 * ||A||
  const Real scale = A.cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    const Vec v = r.vectors.col(i);
    CHECK((A * v - r.values[i] * (B * v)).norm() <= 1e-9 * scale * std::sqrt(Real(n)));
  }

  // trace identity: sum of eigenvalues equals trace(B^{-1} A)
  const Mat BinvA = testutil::dense_matmul(testutil::dense_inverse(B), A);
  CHECK(r.values.sum() == doctest::Approx(BinvA.trace()).epsilon(1e-9));
}

TEST_CASE("dense_sym_eig input validation") {
  Rng rng(5);
  Mat A = rng.matrix(4, 4);
  A(0, 1) = A(1, 0) + 1.0;  // clearly nonsymmetric
  CHECK_THROWS_AS((void)dense_sym_eig(A), std::invalid_argument);

  Mat S = Mat(0.5 * (A + A.transpose()));
  Mat B = Mat::Identity(4, 4);
  B(2, 2) = -1.0;  // not SPD
  CHECK_THROWS_AS((void)dense_sym_eig(S, &B), std::invalid_argument);

  EigOptions opts;
  opts.dense_limit = 3;
  CHECK_THROWS_AS((void)dense_sym_eig(S, nullptr, opts), std::invalid_argument);
}

TEST_CASE("BlockOperator apply equals assembled monolithic product") {
  Rng rng(53);
  BlockOperator op({3, 5}, {4, 2});
  op.set(0, 0, random_sparse(3, 4, 0.7, rng), 2.5);
  op.set(0, 1, random_sparse(2, 3, 0.7, rng), -1.0, /*transposed=*/true);
  op.set(1, 1, random_sparse(5, 2, 0.7, rng), 0.5);
  const SpMat mono = op.assemble();
  CHECK(mono.rows() == 8);
  CHECK(mono.cols() == 6);
  const Real scale = max_abs(mono);
  for (int t = 0; t < 5; ++t) {
    const Vec x = rng.vector(6);
    const Vec diff = op.apply(x) - spmv(mono, x);
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-12 * scale * x.norm());
  }
  CHECK_THROWS_AS(op.set(0, 0, sparse_identity(7)), std::invalid_argument);
}

TEST_CASE("matrix market round trip, general and symmetric") {
  Rng rng(61);
  const SpMat A = random_sparse(9, 7, 0.3, rng);
  const std::string path = "mm_test_general.mtx";
  write_matrix_market(path, A);
  const SpMat B = read_matrix_market(path);
  CHECK((to_dense(A) - to_dense(B)).cwiseAbs().maxCoeff() < 1e-15);
  std::remove(path.c_str());

  SpMat S = random_sparse(6, 6, 0.4, rng);
  S = SpMat(S + SpMat(S.transpose()));
  const std::string spath = "mm_test_symmetric.mtx";
  write_matrix_market(spath, S, /*symmetric=*/true);
  const SpMat S2 = read_matrix_market(spath);
  CHECK((to_dense(S) - to_dense(S2)).cwiseAbs().maxCoeff() < 1e-15);
  std::remove(spath.c_str());
}

TEST_CASE("matrix market files are 1-based coordinate format") {
  std::vector<Triplet> ts{{0, 2, 1.5}};
  const SpMat A = from_triplets(2, 3, ts);
  const std::string path = "mm_test_format.mtx";
  write_matrix_market(path, A);
  std::ifstream is(path);
  std::string header, sizes, entry;
  std::getline(is, header);
  std::getline(is, sizes);
  std::getline(is, entry);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  CHECK(sizes == "2 3 1");
  CHECK(entry.substr(0, 4) == "1 3 ");
  std::remove(path.c_str());
}
