// Copyright 2026 The diffmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_common.hpp"

namespace linalg_test {

using namespace diffmon;
using namespace testutil;

TEST(PositiveSqrt, IdentityIsFixed) {
    const ComplexMatrix id = ComplexMatrix::Identity(3, 3);
    EXPECT_LT((linalg::positive_sqrt(id) - id).norm(), 1e-15);
}

TEST(PositiveSqrt, DiagonalEntries) {
    RealMatrix a = RealMatrix::Zero(2, 2);
    a(0, 0) = 4.0;
    a(1, 1) = 9.0;
    const RealMatrix r = linalg::positive_sqrt(a);
    EXPECT_NEAR(r(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(r(1, 1), 3.0, 1e-14);
    EXPECT_NEAR(r(0, 1), 0.0, 1e-14);
}

TEST(PositiveSqrt, SquaresBackForRandomPsd) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix g = sampling::complex_gaussian(rng, 4, 4);
        const ComplexMatrix a = g * g.adjoint();
        const ComplexMatrix r = linalg::positive_sqrt(a);
        EXPECT_LT((r * r - a).norm(), 1e-10 * a.norm());
        EXPECT_GE(linalg::min_eigenvalue(r), -1e-12);
    }
}

TEST(PositiveSqrt, RecoversPsdRoot) {
    Rng rng(12);
    const ComplexMatrix g = sampling::complex_gaussian(rng, 3, 3);
    const ComplexMatrix b = g * g.adjoint();
    EXPECT_LT((linalg::positive_sqrt(ComplexMatrix(b * b)) - b).norm(), 1e-9 * b.norm());
}

TEST(PositiveSqrt, ClampsRoundingNegatives) {
    RealMatrix a = RealMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1e-13;
    const RealMatrix r = linalg::positive_sqrt(a);
    EXPECT_EQ(r(1, 1), 0.0);
}

TEST(PositiveSqrt, RejectsBadInput) {
    ComplexMatrix nh = ComplexMatrix::Zero(2, 2);
    nh(0, 1) = 1.0;
    EXPECT_EQ(error_code_of([&] { linalg::positive_sqrt(nh); }), ErrorCode::NotHermitian);
    RealMatrix neg = RealMatrix::Identity(2, 2);
    neg(1, 1) = -0.5;
    EXPECT_EQ(error_code_of([&] { linalg::positive_sqrt(neg); }), ErrorCode::NotPSD);
}

TEST(Polar, OrthogonalInput) {
    Rng rng(13);
    const RealMatrix q = sampling::orthogonal(rng, 4);
    const auto pd = linalg::polar_decompose(q);
    EXPECT_TRUE(pd.unique);
    EXPECT_LT((pd.p - RealMatrix::Identity(4, 4)).norm(), 1e-12);
    EXPECT_LT((pd.o - q).norm(), 1e-12);
}

TEST(Polar, DiagonalPositiveInput) {
    RealMatrix d = RealMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 3.0;
    const auto pd = linalg::polar_decompose(d);
    EXPECT_LT((pd.p - d).norm(), 1e-14);
    EXPECT_LT((pd.o - RealMatrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(Polar, RandomRecomposition) {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const RealMatrix t = sampling::real_gaussian(rng, 4, 4);
        const auto pd = linalg::polar_decompose(t);
        EXPECT_TRUE(pd.unique);
        EXPECT_LT((pd.p * pd.o - t).norm(), 1e-10 * t.norm());
        EXPECT_LT((pd.o * pd.o.transpose() - RealMatrix::Identity(4, 4)).norm(), 1e-12);
        EXPECT_GE(linalg::min_eigenvalue(pd.p), -1e-12);
    }
}

TEST(Polar, RankDeficientPicksProperRotation) {
    Rng rng(15);
    RealMatrix t = sampling::real_gaussian(rng, 3, 3);
    t.col(2) = t.col(0) + t.col(1);
    const auto pd = linalg::polar_decompose(t);
    EXPECT_FALSE(pd.unique);
    EXPECT_NEAR(pd.o.determinant(), 1.0, 1e-12);
    EXPECT_LT((pd.p * pd.o - t).norm(), 1e-10 * t.norm());
}

TEST(PseudoInverse, SingularDiagonal) {
    RealMatrix a = RealMatrix::Zero(2, 2);
    a(0, 0) = 2.0;
    const RealMatrix p = linalg::pseudo_inverse(a);
    EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(p.norm() - 0.5, 0.0, 1e-15);
}

TEST(PseudoInverse, InvertibleAndOrthogonal) {
    Rng rng(16);
    const RealMatrix a = sampling::real_gaussian(rng, 3, 3);
    EXPECT_LT((linalg::pseudo_inverse(a) - a.inverse()).norm(), 1e-10 * a.inverse().norm());
    const RealMatrix q = sampling::orthogonal(rng, 3);
    EXPECT_LT((linalg::pseudo_inverse(q) - q.transpose()).norm(), 1e-12);
}

TEST(PseudoInverse, PenroseConditionsRankOne) {
    Rng rng(17);
    const RealMatrix u = sampling::real_gaussian(rng, 3, 1);
    const RealMatrix v = sampling::real_gaussian(rng, 1, 3);
    const RealMatrix a = u * v;
    const RealMatrix p = linalg::pseudo_inverse(a);
    const double s = a.norm();
    EXPECT_LT((a * p * a - a).norm(), 1e-10 * s);
    EXPECT_LT((p * a * p - p).norm(), 1e-10 * p.norm());
    EXPECT_LT(((a * p).transpose() - a * p).norm(), 1e-10);
    EXPECT_LT(((p * a).transpose() - p * a).norm(), 1e-10);
}

TEST(Classify, KnownMatrices) {
    const auto id = linalg::classify(ComplexMatrix::Identity(2, 2));
    EXPECT_TRUE(id.hermitian && id.psd && id.unitary && id.orthogonal && id.real && id.diagonal);

    ComplexMatrix h(2, 2);
    h << 1.0, 1.0, 1.0, -1.0;
    h /= std::sqrt(2.0);
    const auto hc = linalg::classify(h);
    EXPECT_TRUE(hc.hermitian && hc.unitary && hc.orthogonal && hc.real);
    EXPECT_FALSE(hc.psd || hc.diagonal);

    ComplexMatrix n = ComplexMatrix::Zero(2, 2);
    n(0, 1) = 1.0;
    const auto nc = linalg::classify(n);
    EXPECT_TRUE(nc.real);
    EXPECT_FALSE(nc.hermitian || nc.psd || nc.unitary || nc.orthogonal || nc.diagonal);
}

TEST(TraceDistance, OrthogonalPureStates) {
    EXPECT_NEAR(linalg::trace_distance(excited(), ground()), 1.0, 1e-15);
    EXPECT_NEAR(linalg::trace_distance(excited(), excited()), 0.0, 1e-15);
}

}  // namespace linalg_test
