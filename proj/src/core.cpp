// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#include "biotprec/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <sstream>

namespace biotprec {

SpMat from_triplets(Index rows, Index cols, const std::vector<Triplet>& ts) {
  SpMat A(rows, cols);
  A.setFromTriplets(ts.begin(), ts.end());  // duplicates summed
  A.makeCompressed();
  return A;
}

SpMat sparse_identity(Index n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

SpMat sparse_diagonal(const Vec& d) {
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i) ts.emplace_back(i, i, d[i]);
  return from_triplets(d.size(), d.size(), ts);
}

SpMat sparse_transpose(const SpMat& A) {
  SpMat At = A.transpose();
  At.makeCompressed();
  return At;
}

Mat to_dense(const SpMat& A) { return Mat(A); }

Vec spmv(const SpMat& A, const Vec& x) {
  if (x.size() != A.cols())
    throw std::invalid_argument("spmv: dimension mismatch (" + std::to_string(A.cols()) +
                                " vs " + std::to_string(x.size()) + ")");
  Vec y = Vec::Zero(A.rows());
  for (Index i = 0; i < A.outerSize(); ++i) {
    Real acc = 0.0;
    for (SpMat::InnerIterator it(A, i); it; ++it) acc += it.value() * x[it.col()];
    y[i] = acc;
  }
  return y;
}

SpMat sparse_triple_product(const SpMat& A, const Vec& d, const SpMat& B) {
  if (A.cols() != d.size() || d.size() != B.rows())
    throw std::invalid_argument("sparse_triple_product: dimension mismatch");
  SpMat AD = A * d.asDiagonal();
  SpMat C = AD * B;
  C.makeCompressed();
  return C;
}

Real max_abs(const SpMat& A) {
  Real m = 0.0;
  for (Index i = 0; i < A.outerSize(); ++i)
    for (SpMat::InnerIterator it(A, i); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// ---------------------------------------------------------------------------
// Factorization
// ---------------------------------------------------------------------------

using SpMatCol = Eigen::SparseMatrix<Real, Eigen::ColMajor>;

struct Factorization::Impl {
  std::unique_ptr<Eigen::SparseLU<SpMatCol>> sparse_lu;
  std::unique_ptr<Eigen::PartialPivLU<Mat>> dense_lu;
  std::unique_ptr<Eigen::LLT<Mat>> dense_llt;
};

Factorization Factorization::compute(const SpMat& A, FactorKind kind) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("factorize: matrix must be square");
  auto impl = std::make_shared<Impl>();
  switch (kind) {
    case FactorKind::SparseLU: {
      SpMatCol Ac(A);
      Ac.makeCompressed();
      impl->sparse_lu = std::make_unique<Eigen::SparseLU<SpMatCol>>();
      impl->sparse_lu->compute(Ac);
      if (impl->sparse_lu->info() != Eigen::Success)
        throw SingularMatrixError("sparse LU: singular pivot encountered");
      break;
    }
    case FactorKind::DenseLU: {
      Mat Ad(A);
      impl->dense_lu = std::make_unique<Eigen::PartialPivLU<Mat>>(Ad);
      const Vec diag = impl->dense_lu->matrixLU().diagonal().cwiseAbs();
      const Real scale = Ad.cwiseAbs().maxCoeff();
      if (A.rows() > 0 && (diag.minCoeff() <= 0.0 || diag.minCoeff() < 1e-300 * std::max(scale, 1.0)))
        throw SingularMatrixError("dense LU: singular pivot encountered");
      break;
    }
    case FactorKind::DenseCholesky: {
      Mat Ad(A);
      impl->dense_llt = std::make_unique<Eigen::LLT<Mat>>(Ad);
      if (impl->dense_llt->info() != Eigen::Success)
        throw SingularMatrixError("dense Cholesky: matrix not positive definite");
      break;
    }
  }
  return Factorization(std::move(impl), A.rows(), kind);
}

Vec Factorization::solve(const Vec& b) const {
  if (b.size() != n_) throw std::invalid_argument("Factorization::solve: dimension mismatch");
  switch (kind_) {
    case FactorKind::SparseLU:
      return impl_->sparse_lu->solve(b);
    case FactorKind::DenseLU:
      return impl_->dense_lu->solve(b);
    case FactorKind::DenseCholesky:
      return impl_->dense_llt->solve(b);
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Dense symmetric eigensolver
// ---------------------------------------------------------------------------

EigResult dense_sym_eig(const Mat& A, const Mat* Bpencil, const EigOptions& opts) {
  const Index n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("dense_sym_eig: A must be square");
  if (n > opts.dense_limit)
    throw std::invalid_argument("dense_sym_eig: size exceeds dense limit (" +
                                std::to_string(opts.dense_limit) + ")");
  const Real scale = std::max(A.cwiseAbs().maxCoeff(), Real(1e-300));
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > opts.symmetry_tol * scale)
    throw std::invalid_argument("dense_sym_eig: matrix not symmetric");
  const Mat As = 0.5 * (A + A.transpose());

  const auto vecflag = opts.with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  EigResult out;
  if (Bpencil == nullptr) {
    Eigen::SelfAdjointEigenSolver<Mat> es(As, vecflag);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense_sym_eig: did not converge");
    out.values = es.eigenvalues();
    if (opts.with_vectors) out.vectors = es.eigenvectors();
  } else {
    const Mat& B = *Bpencil;
    if (B.rows() != n || B.cols() != n)
      throw std::invalid_argument("dense_sym_eig: pencil dimension mismatch");
    const Real bscale = std::max(B.cwiseAbs().maxCoeff(), Real(1e-300));
    if ((B - B.transpose()).cwiseAbs().maxCoeff() > opts.symmetry_tol * bscale)
      throw std::invalid_argument("dense_sym_eig: pencil matrix not symmetric");
    const Mat Bs = 0.5 * (B + B.transpose());
    Eigen::LLT<Mat> llt(Bs);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("dense_sym_eig: pencil matrix not SPD");
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(
        As, Bs, opts.with_vectors ? (Eigen::ComputeEigenvectors | Eigen::Ax_lBx)
                                  : (Eigen::EigenvaluesOnly | Eigen::Ax_lBx));
    if (es.info() != Eigen::Success) throw std::runtime_error("dense_sym_eig: did not converge");
    out.values = es.eigenvalues();
    if (opts.with_vectors) out.vectors = es.eigenvectors();
  }
  return out;
}

// ---------------------------------------------------------------------------
// BlockOperator
// ---------------------------------------------------------------------------

namespace {
std::vector<Index> offsets_of(const std::vector<Index>& sizes) {
  std::vector<Index> off(sizes.size() + 1, 0);
  for (size_t i = 0; i < sizes.size(); ++i) off[i + 1] = off[i] + sizes[i];
  return off;
}
}  // namespace

BlockOperator::BlockOperator(std::vector<Index> row_sizes, std::vector<Index> col_sizes)
    : row_sizes_(std::move(row_sizes)),
      col_sizes_(std::move(col_sizes)),
      row_offsets_(offsets_of(row_sizes_)),
      col_offsets_(offsets_of(col_sizes_)),
      blocks_(row_sizes_.size() * col_sizes_.size()) {}

void BlockOperator::set(int i, int j, std::shared_ptr<const SpMat> mat, Real scale,
                        bool transposed) {
  const Index r = transposed ? mat->cols() : mat->rows();
  const Index c = transposed ? mat->rows() : mat->cols();
  if (r != row_sizes_.at(i) || c != col_sizes_.at(j))
    throw std::invalid_argument("BlockOperator::set: block (" + std::to_string(i) + "," +
                                std::to_string(j) + ") has inconsistent partition sizes");
  blocks_.at(static_cast<size_t>(i) * col_sizes_.size() + j) = Entry{std::move(mat), scale, transposed};
}

void BlockOperator::set(int i, int j, SpMat mat, Real scale, bool transposed) {
  set(i, j, std::make_shared<const SpMat>(std::move(mat)), scale, transposed);
}

const BlockOperator::Entry* BlockOperator::block(int i, int j) const {
  const auto& b = blocks_.at(static_cast<size_t>(i) * col_sizes_.size() + j);
  return b ? &*b : nullptr;
}

Vec BlockOperator::apply(const Vec& x) const {
  if (x.size() != cols()) throw std::invalid_argument("BlockOperator::apply: dimension mismatch");
  Vec y = Vec::Zero(rows());
  for (int i = 0; i < block_rows(); ++i) {
    for (int j = 0; j < block_cols(); ++j) {
      const Entry* e = block(i, j);
      if (!e) continue;
      const auto xj = x.segment(col_offsets_[j], col_sizes_[j]);
      auto yi = y.segment(row_offsets_[i], row_sizes_[i]);
      const SpMat& M = *e->mat;
      if (!e->transposed) {
        for (Index r = 0; r < M.outerSize(); ++r) {
          Real acc = 0.0;
          for (SpMat::InnerIterator it(M, r); it; ++it) acc += it.value() * xj[it.col()];
          yi[r] += e->scale * acc;
        }
      } else {
        for (Index r = 0; r < M.outerSize(); ++r) {
          const Real xr = e->scale * xj[r];
          for (SpMat::InnerIterator it(M, r); it; ++it) yi[it.col()] += it.value() * xr;
        }
      }
    }
  }
  return y;
}

SpMat BlockOperator::assemble() const {
  std::vector<Triplet> ts;
  for (int i = 0; i < block_rows(); ++i) {
    for (int j = 0; j < block_cols(); ++j) {
      const Entry* e = block(i, j);
      if (!e) continue;
      const SpMat& M = *e->mat;
      for (Index r = 0; r < M.outerSize(); ++r) {
        for (SpMat::InnerIterator it(M, r); it; ++it) {
          const Index gi = row_offsets_[i] + (e->transposed ? it.col() : r);
          const Index gj = col_offsets_[j] + (e->transposed ? r : it.col());
          ts.emplace_back(gi, gj, e->scale * it.value());
        }
      }
    }
  }
  return from_triplets(rows(), cols(), ts);
}

// ---------------------------------------------------------------------------
// Matrix Market
// ---------------------------------------------------------------------------

void write_matrix_market(const std::string& path, const SpMat& A, bool symmetric) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix_market: cannot open " + path);
  os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << "\n";
  Index nnz = 0;
  for (Index i = 0; i < A.outerSize(); ++i)
    for (SpMat::InnerIterator it(A, i); it; ++it)
      if (!symmetric || it.col() <= i) ++nnz;
  os.precision(17);
  os << A.rows() << " " << A.cols() << " " << nnz << "\n";
  for (Index i = 0; i < A.outerSize(); ++i)
    for (SpMat::InnerIterator it(A, i); it; ++it) {
      if (symmetric && it.col() > i) continue;
      os << (i + 1) << " " << (it.col() + 1) << " " << it.value() << "\n";
    }
  if (!os) throw std::runtime_error("write_matrix_market: write failed for " + path);
}

SpMat read_matrix_market(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_matrix_market: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_matrix_market: empty file");
  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" ||
      field != "real")
    throw std::runtime_error("read_matrix_market: unsupported header: " + line);
  const bool symmetric = (symmetry == "symmetric");
  if (!symmetric && symmetry != "general")
    throw std::runtime_error("read_matrix_market: unsupported symmetry: " + symmetry);
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream szs(line);
  Index rows = 0, cols = 0;
  long long nnz = 0;
  szs >> rows >> cols >> nnz;
  if (!szs) throw std::runtime_error("read_matrix_market: bad size line");
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(symmetric ? 2 * nnz : nnz));
  for (long long k = 0; k < nnz; ++k) {
    Index i = 0, j = 0;
    Real v = 0;
    if (!(is >> i >> j >> v)) throw std::runtime_error("read_matrix_market: truncated data");
    ts.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) ts.emplace_back(j - 1, i - 1, v);
  }
  return from_triplets(rows, cols, ts);
}

}  // namespace biotprec
