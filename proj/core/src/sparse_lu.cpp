#include "stlopt/sparse_lu.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <umfpack.h>

#include "stlopt/errors.hpp"

namespace stlopt {

namespace {

std::atomic<std::uint64_t> g_factorizations{0};

}  // namespace

SparseLU::SparseLU(const SparseMatrixC& A) {
  if (A.rows() != A.cols()) throw DimensionError("LU needs a square matrix");
  SparseMatrixC C = A;
  C.makeCompressed();
  n_ = static_cast<int>(C.rows());
  colptr_.assign(C.outerIndexPtr(), C.outerIndexPtr() + n_ + 1);
  rowind_.assign(C.innerIndexPtr(), C.innerIndexPtr() + C.nonZeros());
  values_.resize(2 * static_cast<std::size_t>(C.nonZeros()));
  for (Eigen::Index k = 0; k < C.nonZeros(); ++k) {
    values_[2 * k] = C.valuePtr()[k].real();
    values_[2 * k + 1] = C.valuePtr()[k].imag();
  }
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_zi_defaults(control);
  void* symbolic = nullptr;
  int status = umfpack_zi_symbolic(n_, n_, colptr_.data(), rowind_.data(), values_.data(), nullptr, &symbolic,
                                   control, info);
  if (status != UMFPACK_OK) {
    umfpack_zi_free_symbolic(&symbolic);
    throw Error("UMFPACK symbolic analysis failed with status " + std::to_string(status));
  }
  status = umfpack_zi_numeric(colptr_.data(), rowind_.data(), values_.data(), nullptr, symbolic, &numeric_,
                              control, info);
  umfpack_zi_free_symbolic(&symbolic);
  ++g_factorizations;
  rcond_ = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || !(rcond_ > 0.0)) {
    umfpack_zi_free_numeric(&numeric_);
    throw ResonanceSingular("singular dynamic matrix", std::numeric_limits<double>::quiet_NaN());
  }
  if (status != UMFPACK_OK) {
    umfpack_zi_free_numeric(&numeric_);
    throw Error("UMFPACK numeric factorization failed with status " + std::to_string(status));
  }
}

SparseLU::~SparseLU() {
  if (numeric_ != nullptr) umfpack_zi_free_numeric(&numeric_);
}

SparseLU::SparseLU(SparseLU&& o) noexcept
    : n_(o.n_),
      colptr_(std::move(o.colptr_)),
      rowind_(std::move(o.rowind_)),
      values_(std::move(o.values_)),
      numeric_(o.numeric_),
      rcond_(o.rcond_) {
  o.numeric_ = nullptr;
}

SparseLU& SparseLU::operator=(SparseLU&& o) noexcept {
  if (this != &o) {
    if (numeric_ != nullptr) umfpack_zi_free_numeric(&numeric_);
    n_ = o.n_;
    colptr_ = std::move(o.colptr_);
    rowind_ = std::move(o.rowind_);
    values_ = std::move(o.values_);
    numeric_ = o.numeric_;
    rcond_ = o.rcond_;
    o.numeric_ = nullptr;
  }
  return *this;
}

VectorC SparseLU::solve_impl(const VectorC& b, int sys) const {
  if (numeric_ == nullptr) throw StateError("factorization has been moved from");
  if (b.size() != n_) throw DimensionError("right-hand side length mismatch");
  VectorC x(n_);
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_zi_defaults(control);
  // the pivot growth of these systems is small; refinement only costs time
  control[UMFPACK_IRSTEP] = 0;
  const int status = umfpack_zi_solve(sys, colptr_.data(), rowind_.data(), values_.data(), nullptr,
                                      reinterpret_cast<double*>(x.data()), nullptr,
                                      reinterpret_cast<const double*>(b.data()), nullptr, numeric_, control, info);
  if (status != UMFPACK_OK) throw Error("UMFPACK solve failed with status " + std::to_string(status));
  return x;
}

VectorC SparseLU::solve(const VectorC& b) const { return solve_impl(b, UMFPACK_A); }

VectorC SparseLU::solve_transposed(const VectorC& b) const { return solve_impl(b, UMFPACK_Aat); }

std::uint64_t SparseLU::factorization_count() { return g_factorizations.load(); }

}  // namespace stlopt
