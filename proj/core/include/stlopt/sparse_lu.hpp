#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "stlopt/fem.hpp"

namespace stlopt {

/// Complex sparse LU factorization backed by UMFPACK.
///
/// Immutable after construction: solve() and solve_transposed() may be
/// called concurrently from several threads.
class SparseLU {
 public:
  /// Throws ResonanceSingular (frequency NaN) if the matrix is singular.
  explicit SparseLU(const SparseMatrixC& A);
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;

  /// x with A x = b.
  VectorC solve(const VectorC& b) const;
  /// x with A^T x = b (plain transpose, no conjugation).
  VectorC solve_transposed(const VectorC& b) const;

  int size() const { return n_; }
  /// Estimate of the reciprocal condition number reported by UMFPACK.
  double rcond() const { return rcond_; }

  /// Number of factorizations performed process-wide.
  static std::uint64_t factorization_count();

 private:
  VectorC solve_impl(const VectorC& b, int sys) const;

  int n_ = 0;
  std::vector<int> colptr_;
  std::vector<int> rowind_;
  std::vector<double> values_;  // interleaved re/im
  void* numeric_ = nullptr;
  double rcond_ = 0.0;
};

}  // namespace stlopt
