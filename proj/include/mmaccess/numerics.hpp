/*
 * Copyright 2026 The mm-access Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

///
/// \file numerics.hpp
///
/// Dense complex linear-algebra kernel shared by every detector.
///
/// Matrices are Eigen column-major `MatrixXcd`; a column block of the
/// aggregate channel is extracted by gathering an index list, and least
/// squares goes through a column-pivoted Householder QR so the pseudo-inverse
/// is never formed.
///
#ifndef MMACCESS_NUMERICS_HPP
#define MMACCESS_NUMERICS_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/QR>

namespace mmaccess
{

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;  // column-major
using ComplexVector = Eigen::VectorXcd;

/// Index of a column of the aggregate channel matrix (zero based).
using ColumnIndex = Eigen::Index;

/// Relative pivot tolerance below which a least-squares system is treated as
/// rank deficient.
inline constexpr double kRankTolerance = 1e-10;

class DimensionError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

namespace detail
{
inline void require_same_rows(const Eigen::Index lhs, const Eigen::Index rhs,
                              const char* what)
{
    if (lhs != rhs) {
        throw DimensionError(std::string(what) + ": row count mismatch (" +
                             std::to_string(lhs) + " vs " +
                             std::to_string(rhs) + ")");
    }
}
} // namespace detail

/// Returns A^H B.
template <typename DerivedA, typename DerivedB>
ComplexMatrix hermitian_mul(const Eigen::MatrixBase<DerivedA>& a,
                            const Eigen::MatrixBase<DerivedB>& b)
{
    detail::require_same_rows(a.rows(), b.rows(), "hermitian_mul");
    return a.adjoint() * b;
}

template <typename Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& a)
{
    return a.norm();
}

///
/// Least-squares solution X = argmin ||B - A X||_F.
///
/// Returns `std::nullopt` when A has fewer rows than columns or when its
/// numerical rank (relative pivot tolerance `kRankTolerance`) is below its
/// column count; callers treat that as a degenerate support.
///
template <typename DerivedA, typename DerivedB>
std::optional<ComplexMatrix> lstsq(const Eigen::MatrixBase<DerivedA>& a,
                                   const Eigen::MatrixBase<DerivedB>& b)
{
    detail::require_same_rows(a.rows(), b.rows(), "lstsq");
    if (a.cols() == 0) {
        return ComplexMatrix::Zero(0, b.cols());
    }
    if (a.rows() < a.cols()) {
        return std::nullopt;
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(a);
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    if (!(diag.minCoeff() > kRankTolerance * diag.maxCoeff())) {
        return std::nullopt;
    }
    return ComplexMatrix(qr.solve(b));
}

/// Gathers `columns` of `a` in the given order.
template <typename Derived>
ComplexMatrix gather_columns(const Eigen::MatrixBase<Derived>& a,
                             std::span<const ColumnIndex> columns)
{
    ComplexMatrix out(a.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] < 0 || columns[c] >= a.cols()) {
            throw DimensionError("gather_columns: column index out of range");
        }
        out.col(static_cast<Eigen::Index>(c)) = a.col(columns[c]);
    }
    return out;
}

} // namespace mmaccess

#endif // MMACCESS_NUMERICS_HPP
