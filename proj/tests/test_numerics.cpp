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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/QR>

#include <mmaccess/numerics.hpp>

#include "oracles.hpp"

using namespace mmaccess;

namespace
{
constexpr Complex I{0.0, 1.0};

double rel_err(const ComplexMatrix& got, const ComplexMatrix& want)
{
    return oracle::max_abs_diff(got, want) / std::max(oracle::max_abs(want), 1e-300);
}
} // namespace

TEST(Lstsq, IdentityReturnsRhs)
{
    std::mt19937_64 rng(1);
    const ComplexMatrix b = oracle::random_matrix(rng, 3, 2);
    const auto x = lstsq(ComplexMatrix::Identity(3, 3), b);
    ASSERT_TRUE(x);
    EXPECT_LT(oracle::max_abs_diff(*x, b), 1e-14);
}

TEST(Lstsq, OrthonormalColumnsGiveIdentity)
{
    std::mt19937_64 rng(2);
    const ComplexMatrix a = oracle::random_matrix(rng, 7, 4);
    const ComplexMatrix q = Eigen::HouseholderQR<ComplexMatrix>(a).householderQ() * ComplexMatrix::Identity(7, 4);
    const auto x = lstsq(q, q);
    ASSERT_TRUE(x);
    EXPECT_LT(oracle::max_abs_diff(*x, ComplexMatrix::Identity(4, 4)), 1e-12);
}

TEST(Lstsq, MatchesNormalEquationsOracle)
{
    std::mt19937_64 rng(3);
    const ComplexMatrix a = oracle::random_matrix(rng, 8, 3);
    const ComplexMatrix b = oracle::random_matrix(rng, 8, 1);
    const auto x = lstsq(a, b);
    ASSERT_TRUE(x);
    EXPECT_LE(rel_err(*x, oracle::normal_equations(a, b)), 1e-9);
}

TEST(Lstsq, RankDeficientIsDegenerate)
{
    std::mt19937_64 rng(4);
    ComplexMatrix a = oracle::random_matrix(rng, 6, 3);
    a.col(2) = a.col(0) * Complex(2.0, -1.0);
    EXPECT_FALSE(lstsq(a, oracle::random_matrix(rng, 6, 1)));

    a.col(2) = a.col(0) + a.col(1) * 1e-13;
    EXPECT_FALSE(lstsq(a, oracle::random_matrix(rng, 6, 1)));
}

TEST(Lstsq, UnderdeterminedIsDegenerate)
{
    std::mt19937_64 rng(5);
    EXPECT_FALSE(lstsq(oracle::random_matrix(rng, 3, 4), oracle::random_matrix(rng, 3, 1)));
}

TEST(Lstsq, EmptySupportGivesEmptySolution)
{
    const auto x = lstsq(ComplexMatrix(5, 0), ComplexMatrix::Zero(5, 2));
    ASSERT_TRUE(x);
    EXPECT_EQ(x->rows(), 0);
    EXPECT_EQ(x->cols(), 2);
}

TEST(Lstsq, RowMismatchThrows)
{
    EXPECT_THROW(lstsq(ComplexMatrix::Identity(3, 3), ComplexMatrix::Zero(4, 1)), DimensionError);
}

TEST(HermitianMul, Identity)
{
    const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
    EXPECT_LT(oracle::max_abs_diff(hermitian_mul(i2, i2), i2), 1e-15);
}

TEST(HermitianMul, ConjugatesLeftOperand)
{
    ComplexMatrix a(2, 1);
    a << I, 0.0;
    const ComplexMatrix p = hermitian_mul(a, a);
    EXPECT_EQ(p(0, 0), Complex(1.0, 0.0));
}

TEST(HermitianMul, MatchesDirectSummation)
{
    std::mt19937_64 rng(6);
    const ComplexMatrix a = oracle::random_matrix(rng, 5, 2);
    const ComplexMatrix b = oracle::random_matrix(rng, 5, 3);
    EXPECT_LE(rel_err(hermitian_mul(a, b), oracle::hermitian_product(a, b)), 1e-12);
}

TEST(HermitianMul, DimensionMismatchThrows)
{
    EXPECT_THROW(hermitian_mul(ComplexMatrix::Zero(3, 2), ComplexMatrix::Zero(4, 2)), DimensionError);
}

TEST(FrobeniusNorm, Examples)
{
    EXPECT_EQ(frobenius_norm(ComplexMatrix::Zero(3, 4)), 0.0);
    EXPECT_DOUBLE_EQ(frobenius_norm(ComplexMatrix::Identity(4, 4)), 2.0);
    const ComplexMatrix ones = ComplexMatrix::Constant(2, 2, Complex(1.0, 1.0));
    EXPECT_NEAR(frobenius_norm(ones), std::sqrt(8.0), 1e-15);
    EXPECT_NEAR(frobenius_norm(ones), 2.8284, 1e-4);
}

TEST(GatherColumns, KeepsRequestedOrder)
{
    std::mt19937_64 rng(7);
    const ComplexMatrix a = oracle::random_matrix(rng, 4, 6);
    const std::vector<ColumnIndex> cols{5, 1, 3};
    const ComplexMatrix g = gather_columns(a, cols);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        EXPECT_EQ(g.col(static_cast<Eigen::Index>(c)), a.col(cols[c]));
    }
    const std::vector<ColumnIndex> bad{6};
    EXPECT_THROW(gather_columns(a, bad), DimensionError);
}

// Randomized properties over sizes up to 20x12.
TEST(NumericsProperties, LstsqResidualOrthogonalAndExactFit)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> cols_dist(1, 12);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = cols_dist(rng);
        const int m = n + std::uniform_int_distribution<int>(0, 8)(rng);
        const int p = std::uniform_int_distribution<int>(1, 3)(rng);
        const ComplexMatrix a = oracle::random_matrix(rng, m, n);
        const ComplexMatrix b = oracle::random_matrix(rng, m, p);

        const auto x = lstsq(a, b);
        ASSERT_TRUE(x);
        const ComplexMatrix ortho = oracle::hermitian_product(a, b - a * (*x));
        EXPECT_LE(oracle::max_abs(ortho), 1e-8 * a.norm() * b.norm());

        const ComplexMatrix x0 = oracle::random_matrix(rng, n, p);
        const auto fit = lstsq(a, ComplexMatrix(a * x0));
        ASSERT_TRUE(fit);
        EXPECT_LE(rel_err(*fit, x0), 1e-9);
    }
}

TEST(NumericsProperties, FrobeniusSquaredIsSumOfModuli)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const ComplexMatrix a = oracle::random_matrix(rng, 1 + trial % 9, 1 + trial % 7);
        double sum = 0.0;
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            for (Eigen::Index r = 0; r < a.rows(); ++r) sum += std::norm(a(r, c));
        const double f = frobenius_norm(a);
        EXPECT_LE(std::abs(f * f - sum), 1e-12 * sum);
    }
}
