// Copyright (c) 2026 The biotprec authors.
// SPDX-License-Identifier: BSD-3-Clause

#ifndef BIOTPREC_CORE_HPP
#define BIOTPREC_CORE_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace biotprec {

using Real = double;
using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Compressed-row storage throughout; inner indices are kept sorted and
// duplicate-free once a matrix is finalized (makeCompressed).
using SpMat = Eigen::SparseMatrix<Real, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<Real>;

/// Builds a finalized CSR matrix from triplets; duplicate entries are summed.
SpMat from_triplets(Index rows, Index cols, const std::vector<Triplet>& ts);

SpMat sparse_identity(Index n);
SpMat sparse_diagonal(const Vec& d);
SpMat sparse_transpose(const SpMat& A);
Mat to_dense(const SpMat& A);

/// y = A x, accumulated row by row in storage order.
Vec spmv(const SpMat& A, const Vec& x);

/// A * diag(d) * B with sorted-index CSR result.  Entries of d multiplying a
/// structurally empty column of A are never referenced.
SpMat sparse_triple_product(const SpMat& A, const Vec& d, const SpMat& B);

/// Largest absolute entry (0 for an empty matrix).
Real max_abs(const SpMat& A);

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

enum class FactorKind { SparseLU, DenseLU, DenseCholesky };

class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Direct factorization of a square matrix.  SparseLU uses a fill-reducing
/// (approximate minimum degree style) column ordering.
class Factorization {
 public:
  static Factorization compute(const SpMat& A, FactorKind kind = FactorKind::SparseLU);

  Vec solve(const Vec& b) const;
  Index rows() const { return n_; }
  FactorKind kind() const { return kind_; }

 private:
  struct Impl;
  Factorization(std::shared_ptr<const Impl> impl, Index n, FactorKind kind)
      : impl_(std::move(impl)), n_(n), kind_(kind) {}
  std::shared_ptr<const Impl> impl_;
  Index n_ = 0;
  FactorKind kind_ = FactorKind::SparseLU;
};

inline Factorization factorize(const SpMat& A, FactorKind kind = FactorKind::SparseLU) {
  return Factorization::compute(A, kind);
}
inline Vec solve(const Factorization& F, const Vec& b) { return F.solve(b); }

// ---------------------------------------------------------------------------
// Dense symmetric eigenproblems
// ---------------------------------------------------------------------------

struct EigOptions {
  Index dense_limit = 4000;
  bool with_vectors = true;
  Real symmetry_tol = 1e-12;  // relative
};

struct EigResult {
  Vec values;   // ascending
  Mat vectors;  // columns, empty unless requested
};

/// Eigenvalues (ascending) of A v = lambda v, or of the pencil
/// A v = lambda B v when B is given (B must be SPD).
EigResult dense_sym_eig(const Mat& A, const Mat* Bpencil = nullptr,
                        const EigOptions& opts = {});

// ---------------------------------------------------------------------------
// Block operators
// ---------------------------------------------------------------------------

/// k x k grid of optional scaled sparse blocks.  apply() agrees with the
/// matrix-vector product of the assembled monolithic matrix to round-off.
class BlockOperator {
 public:
  struct Entry {
    std::shared_ptr<const SpMat> mat;
    Real scale = 1.0;
    bool transposed = false;
  };

  BlockOperator(std::vector<Index> row_sizes, std::vector<Index> col_sizes);

  void set(int i, int j, std::shared_ptr<const SpMat> mat, Real scale = 1.0,
           bool transposed = false);
  void set(int i, int j, SpMat mat, Real scale = 1.0, bool transposed = false);

  const Entry* block(int i, int j) const;

  Vec apply(const Vec& x) const;
  SpMat assemble() const;

  Index rows() const { return row_offsets_.back(); }
  Index cols() const { return col_offsets_.back(); }
  int block_rows() const { return static_cast<int>(row_sizes_.size()); }
  int block_cols() const { return static_cast<int>(col_sizes_.size()); }
  Index row_size(int i) const { return row_sizes_.at(i); }
  Index col_size(int j) const { return col_sizes_.at(j); }
  Index row_offset(int i) const { return row_offsets_.at(i); }
  Index col_offset(int j) const { return col_offsets_.at(j); }
  const std::vector<Index>& row_sizes() const { return row_sizes_; }
  const std::vector<Index>& col_sizes() const { return col_sizes_; }

 private:
  std::vector<Index> row_sizes_, col_sizes_;
  std::vector<Index> row_offsets_, col_offsets_;
  std::vector<std::optional<Entry>> blocks_;
};

// ---------------------------------------------------------------------------
// Matrix Market exchange (coordinate, real, general or symmetric; 1-based)
// ---------------------------------------------------------------------------

void write_matrix_market(const std::string& path, const SpMat& A, bool symmetric = false);
SpMat read_matrix_market(const std::string& path);

}  // namespace biotprec

#endif  // BIOTPREC_CORE_HPP
