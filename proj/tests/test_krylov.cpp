// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "biotprec/krylov.hpp"
#include "test_utils.hpp"

using namespace biotprec;

namespace {

struct DenseOp {
  Mat A;
  Vec operator()(const Vec& v) const { return A * v; }
};

Mat random_spd(Index n, unsigned seed) {
  testutil::Rng rng(seed);
  const Mat R = rng.matrix(n, n);
  return Mat(R * R.transpose() + Real(n) * Mat::Identity(n, n));
}

}  // namespace

TEST_CASE("identity system converges in one iteration") {
  const DenseOp A{Mat::Identity(6, 6)};
  testutil::Rng rng(2);
  const Vec b = rng.vector(6);
  const auto [x, rep] = fgmres(A, b, IdentityPrec{});
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  CHECK((x - b).norm() < 1e-12);
}

TEST_CASE("zero right-hand side returns immediately") {
  const DenseOp A{Mat::Identity(5, 5)};
  const auto [x, rep] = fgmres(A, Vec::Zero(5), IdentityPrec{});
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(x.norm() == 0.0);
  const auto [xi, repi] = gmres_inner(A, Vec::Zero(5), IdentityPrec{});
  CHECK(repi.converged);
  CHECK(repi.iterations == 0);
  CHECK(xi.norm() == 0.0);
}

TEST_CASE("unpreconditioned solve matches the direct oracle") {
  const Mat A = random_spd(40, 17);
  testutil::Rng rng(19);
  const Vec b = rng.vector(40);
  FgmresOptions opts;
  opts.tol = 1e-10;
  const auto [x, rep] = fgmres(DenseOp{A}, b, IdentityPrec{}, opts);
  CHECK(rep.converged);
  const Vec oracle = testutil::dense_solve(A, b);
  CHECK((x - oracle).norm() / oracle.norm() < 1e-7);
}

TEST_CASE("history is monotone and the report is consistent") {
  const Mat A = random_spd(30, 23);
  testutil::Rng rng(29);
  const Vec b = rng.vector(30);
  const auto [x, rep] = fgmres(DenseOp{A}, b, IdentityPrec{});
  CHECK(rep.converged);
  CHECK(static_cast<int>(rep.history.size()) == rep.iterations);
  for (size_t i = 1; i < rep.history.size(); ++i) CHECK(rep.history[i] <= rep.history[i - 1] * (1 + 1e-14));
  CHECK(rep.final_relres <= 1e-8 * 1.0001);
  CHECK((A * x - b).norm() / b.norm() <= 1e-8);
}

TEST_CASE("iteration counts are invariant under right-hand side scaling") {
  const Mat A = random_spd(25, 31);
  testutil::Rng rng(37);
  const Vec b = rng.vector(25);
  const auto [x1, r1] = fgmres(DenseOp{A}, b, IdentityPrec{});
  const auto [x2, r2] = fgmres(DenseOp{A}, Vec(-7.25 * b), IdentityPrec{});
  CHECK(r1.iterations == r2.iterations);
  CHECK((x2 + 7.25 * x1).norm() < 1e-9 * x1.norm());
  for (size_t i = 0; i < r1.history.size(); ++i)
    CHECK(r1.history[i] == doctest::Approx(r2.history[i]).epsilon(1e-10));
}

TEST_CASE("max_iters exhaustion reports failure with the best iterate") {
  const Mat A = random_spd(40, 41);
  testutil::Rng rng(43);
  const Vec b = rng.vector(40);
  FgmresOptions opts;
  opts.tol = 1e-14;
  opts.max_iters = 3;
  const auto [x, rep] = fgmres(DenseOp{A}, b, IdentityPrec{}, opts);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 3);
  CHECK((A * x - b).norm() < b.norm());  // progress was made
}

TEST_CASE("restarted cycles still converge") {
  const Mat A = random_spd(35, 47);
  testutil::Rng rng(53);
  const Vec b = rng.vector(35);
  FgmresOptions opts;
  opts.restart = 5;
  opts.max_iters = 400;
  const auto [x, rep] = fgmres(DenseOp{A}, b, IdentityPrec{}, opts);
  CHECK(rep.converged);
  CHECK((A * x - b).norm() / b.norm() <= 1e-8);
}

TEST_CASE("inner GMRES honors its tolerance contract") {
  const Mat A = random_spd(30, 59);
  testutil::Rng rng(61);
  const Vec b = rng.vector(30);
  const auto [x, rep] = gmres_inner(DenseOp{A}, b, IdentityPrec{}, 1e-3, 200);
  CHECK(rep.converged);
  CHECK(static_cast<int>(rep.history.size()) == rep.iterations);
  CHECK(rep.final_relres <= 1e-3);
  CHECK((A * x - b).norm() / b.norm() <= 1e-3 * 1.01);
}

TEST_CASE("flexible and plain GMRES agree under a constant preconditioner") {
  const Mat A = random_spd(28, 67);
  const Mat Minv = testutil::dense_inverse(random_spd(28, 71));
  testutil::Rng rng(73);
  const Vec b = rng.vector(28);
  const auto prec = [&Minv](const Vec& v) { return Vec(Minv * v); };
  FgmresOptions opts;
  opts.tol = 1e-3;
  opts.max_iters = 200;
  const auto [xf, rf] = fgmres(DenseOp{A}, b, prec, opts);
  const auto [xi, ri] = gmres_inner(DenseOp{A}, b, prec, 1e-3, 200);
  CHECK(rf.iterations == ri.iterations);
  REQUIRE(rf.history.size() == ri.history.size());
  for (size_t i = 0; i < rf.history.size(); ++i)
    CHECK(rf.history[i] == doctest::Approx(ri.history[i]).epsilon(1e-12));
  CHECK((xf - xi).cwiseAbs().maxCoeff() < 1e-12 * xf.cwiseAbs().maxCoeff());
}

TEST_CASE("repeated runs are bit-identical") {
  const Mat A = random_spd(32, 79);
  testutil::Rng rng(83);
  const Vec b = rng.vector(32);
  const auto [x1, r1] = fgmres(DenseOp{A}, b, IdentityPrec{});
  const auto [x2, r2] = fgmres(DenseOp{A}, b, IdentityPrec{});
  CHECK(r1.iterations == r2.iterations);
  CHECK((x1 - x2).cwiseAbs().maxCoeff() == 0.0);
  for (size_t i = 0; i < r1.history.size(); ++i) CHECK(r1.history[i] == r2.history[i]);
}
