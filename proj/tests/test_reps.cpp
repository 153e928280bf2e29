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

namespace reps_test {

using namespace diffmon;
using namespace testutil;

BRep single_brep(double eta, cplx s, double theta) {
    BRep b;
    b.eta = RealVector::Constant(1, eta);
    b.s = ComplexMatrix::Constant(1, 1, s);
    b.theta = RealVector::Constant(1, theta);
    return b;
}

TEST(ValidateMrep, StandardMeasurements) {
    EXPECT_NEAR(validate_mrep(make_heterodyne(0.8))(0), 0.8, 1e-12);
    ComplexMatrix hom(1, 2);
    hom << 1.0, 0.0;
    EXPECT_NEAR(validate_mrep(MRep{1.0, hom})(0), 1.0, 1e-15);
    EXPECT_NEAR(validate_mrep(make_heterodyne(0.3, 2.5))(0), 0.3, 1e-12);
}

TEST(ValidateMrep, Rejections) {
    ComplexMatrix too_big(1, 2);
    too_big << 1.0, 1.0;
    EXPECT_EQ(error_code_of([&] { validate_mrep(MRep{1.0, too_big}); }),
              ErrorCode::EfficiencyOutOfRange);

    ComplexMatrix off = ComplexMatrix::Zero(2, 4);
    off(0, 0) = 0.6;
    off(1, 0) = 0.6;
    EXPECT_EQ(error_code_of([&] { validate_mrep(MRep{1.0, off}); }), ErrorCode::OffDiagonal);

    EXPECT_EQ(error_code_of([&] { validate_mrep(MRep{1.0, ComplexMatrix::Zero(1, 3)}); }),
              ErrorCode::DimensionMismatch);
}

TEST(ValidateUrep, Examples) {
    EXPECT_NEAR(validate_urep(URep{1.0, 0.5 * RealMatrix::Identity(2, 2)})(0), 1.0, 1e-15);
    RealMatrix hom = RealMatrix::Zero(2, 2);
    hom(0, 0) = 1.0;
    EXPECT_NEAR(validate_urep(URep{1.0, hom})(0), 1.0, 1e-15);

    EXPECT_EQ(error_code_of([&] { validate_urep(URep{1.0, RealMatrix::Identity(2, 2)}); }),
              ErrorCode::SumNotInH);

    RealMatrix neg = RealMatrix::Zero(2, 2);
    neg(0, 0) = 0.5;
    neg(1, 1) = -0.2;
    EXPECT_EQ(error_code_of([&] { validate_urep(URep{1.0, neg}); }), ErrorCode::NotPSD);

    // PSD with diagonal sum but U12 != U21.
    Rng rng(21);
    const MRep m = sampling::mrep(rng, 2);
    URep u = mrep_to_urep(m);
    RealMatrix skew = RealMatrix::Zero(4, 4);
    skew(0, 3) = 1e-3;
    skew(3, 0) = 1e-3;
    skew(1, 2) = -1e-3;
    skew(2, 1) = -1e-3;
    u.matrix += skew;
    u.matrix += 0.01 * RealMatrix::Identity(4, 4);
    u.matrix *= 0.9;
    EXPECT_EQ(error_code_of([&] { validate_urep(u); }), ErrorCode::OffBlockAsymmetric);
}

TEST(Trep, HeterodyneAndRealCases) {
    const TRep t = mrep_to_trep(make_heterodyne(1.0));
    EXPECT_LT((t.matrix - std::sqrt(0.5) * RealMatrix::Identity(2, 2)).norm(), 1e-15);

    Rng rng(22);
    ComplexMatrix real_m = sampling::mrep(rng, 2).matrix.real().cast<cplx>();
    const TRep tr = mrep_to_trep(MRep{1.0, real_m});
    EXPECT_EQ(tr.matrix.bottomRows(2).norm(), 0.0);
}

TEST(Trep, RoundTripIsExact) {
    Rng rng(23);
    const MRep m = sampling::mrep(rng, 3);
    const MRep back = trep_to_mrep(mrep_to_trep(m));
    EXPECT_TRUE(back.matrix == m.matrix);
}

TEST(Trep, MdagVIdentity) {
    Rng rng(24);
    const MRep m = sampling::mrep(rng, 2, 1.7);
    const TRep t = mrep_to_trep(m);
    const ComplexVector v = sampling::complex_gaussian(rng, 2, 1);
    ComplexVector stacked(4);
    stacked.head(2) = v;
    stacked.tail(2) = -kI * v;
    const ComplexVector lhs = m.matrix.adjoint() * v;
    const ComplexVector rhs = t.matrix.transpose().cast<cplx>() * stacked;
    EXPECT_LT((lhs - rhs).norm(), 1e-12);
}

TEST(Urep, FromTrep) {
    const URep u = mrep_to_urep(make_heterodyne(1.0));
    EXPECT_LT((u.matrix - 0.5 * RealMatrix::Identity(2, 2)).norm(), 1e-15);
    const URep z = trep_to_urep(TRep{1.0, RealMatrix::Zero(2, 2)});
    EXPECT_EQ(z.matrix.norm(), 0.0);
    EXPECT_EQ(validate_urep(z)(0), 0.0);

    Rng rng(25);
    for (int k = 0; k < 20; ++k) {
        const MRep m = sampling::mrep(rng, 2);
        const RealVector eta = validate_mrep(m);
        EXPECT_LT((validate_urep(mrep_to_urep(m)) - eta).norm(), 1e-10);
    }
}

TEST(Urep, SplitAndJoin) {
    const auto het = urep_split(mrep_to_urep(make_heterodyne(1.0)));
    EXPECT_NEAR(het.h(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(het.y(0, 0)), 0.0, 1e-15);

    const auto hom = urep_split(mrep_to_urep(make_homodyne(1.0)));
    EXPECT_NEAR(hom.h(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(hom.y(0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(hom.y(0, 0).imag(), 0.0, 1e-15);

    Rng rng(26);
    const URep u = mrep_to_urep(sampling::mrep(rng, 3));
    const auto s = urep_split(u);
    EXPECT_LT((s.y - s.y.transpose()).norm(), 1e-12);
    EXPECT_LT((urep_join(s.h, s.y, u.hbar).matrix - u.matrix).norm(), 1e-12);
}

TEST(TrepPolar, Cases) {
    const auto id = trep_polar(TRep{1.0, RealMatrix::Identity(2, 2)});
    EXPECT_TRUE(id.unique);
    EXPECT_LT((id.root - RealMatrix::Identity(2, 2)).norm(), 1e-14);

    const auto zero = trep_polar(TRep{1.0, RealMatrix::Zero(2, 2)});
    EXPECT_FALSE(zero.unique);
    EXPECT_LT(zero.root.norm(), 1e-15);

    Rng rng(27);
    const TRep t = mrep_to_trep(sampling::mrep_with_eta(rng, RealVector::Constant(2, 0.7)));
    const auto p = trep_polar(t);
    EXPECT_TRUE(p.unique);
    EXPECT_LT((p.root * p.o.matrix - t.matrix).norm(), 1e-10);
    const auto p2 = trep_polar(t);
    EXPECT_TRUE(p2.o.matrix == p.o.matrix);
}

TEST(Brep, ToMrepExamples) {
    const MRep hom = brep_to_mrep(single_brep(1.0, 1.0, 1.0));
    EXPECT_LT(std::abs(hom.matrix(0, 0) - 1.0), 1e-15);
    EXPECT_LT(std::abs(hom.matrix(0, 1)), 1e-15);

    const MRep dual = brep_to_mrep(single_brep(1.0, 1.0, 0.5));
    EXPECT_LT(std::abs(dual.matrix(0, 0) - std::sqrt(0.5)), 1e-15);
    EXPECT_LT(std::abs(dual.matrix(0, 1) + kI * std::sqrt(0.5)), 1e-15);

    EXPECT_EQ(brep_to_mrep(single_brep(0.0, 1.0, 0.3)).matrix.norm(), 0.0);
}

TEST(Brep, EfficienciesArePreserved) {
    Rng rng(28);
    for (int k = 0; k < 50; ++k) {
        const Eigen::Index l = 1 + Eigen::Index(k % 3);
        const BRep b = sampling::brep(rng, l);
        const MRep m = brep_to_mrep(b, 1.3);
        const ComplexMatrix g = m.matrix * m.matrix.adjoint();
        const ComplexMatrix want = (1.3 * b.eta).cast<cplx>().asDiagonal();
        EXPECT_LT((g - want).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Brep, ToUrepMatchesMRoute) {
    Rng rng(29);
    for (int k = 0; k < 50; ++k) {
        const BRep b = sampling::brep(rng, 1 + Eigen::Index(k % 3));
        const URep direct = brep_to_urep(b, 0.8);
        const URep via_m = mrep_to_urep(brep_to_mrep(b, 0.8));
        EXPECT_LT((direct.matrix - via_m.matrix).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Brep, ToUrepPhaseExamples) {
    const double th = 0.3;
    const URep u0 = brep_to_urep(single_brep(1.0, 1.0, th));
    EXPECT_NEAR(u0.matrix(0, 0), th, 1e-15);
    EXPECT_NEAR(u0.matrix(1, 1), 1.0 - th, 1e-15);
    EXPECT_NEAR(u0.matrix(0, 1), 0.0, 1e-15);

    const double phi = 0.4;
    const URep u = brep_to_urep(single_brep(1.0, std::exp(kI * phi), th));
    EXPECT_NEAR(std::abs(u.matrix(0, 1)), std::abs((1 - 2 * th) * std::cos(phi) * std::sin(phi)),
                1e-14);
    const URep shifted = brep_to_urep(single_brep(1.0, std::exp(kI * (phi + M_PI)), th));
    EXPECT_LT((shifted.matrix - u.matrix).norm(), 1e-14);
}

TEST(Brep, WithOrthogonalFactor) {
    const BRep hom = single_brep(1.0, 1.0, 1.0);
    const OrthoMatrix id{RealMatrix::Identity(2, 2), 1};
    EXPECT_LT((brep_o_to_mrep(hom, id).matrix - brep_to_mrep(hom).matrix).norm(), 1e-15);

    const double phi = 0.7;
    RealMatrix r(2, 2);
    r << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
    const MRep rot = brep_o_to_mrep(hom, make_ortho(r));
    EXPECT_LT(std::abs(rot.matrix(0, 0) - std::cos(phi)), 1e-15);
    EXPECT_LT(std::abs(rot.matrix(0, 1) - std::sin(phi)), 1e-15);

    Rng rng(30);
    const BRep b = sampling::brep(rng, 3);
    const MRep m = brep_o_to_mrep(b, make_ortho(sampling::orthogonal(rng, 6)));
    EXPECT_LT((validate_mrep(m) - b.eta).norm(), 1e-10);

    EXPECT_EQ(error_code_of([&] { brep_o_to_mrep(b, id); }), ErrorCode::DimensionMismatch);
}

TEST(Brep, ValidationMessages) {
    const std::string msg = error_message_of([] { validate_brep(single_brep(1.0, 1.0, 1.5)); });
    EXPECT_NE(msg.find("theta[0]"), std::string::npos) << msg;
    EXPECT_EQ(error_code_of([] { validate_brep(single_brep(1.0, 1.0, 1.5)); }),
              ErrorCode::ParameterOutOfRange);
    EXPECT_EQ(error_code_of([] { validate_brep(single_brep(1.0, 2.0, 0.5)); }),
              ErrorCode::NotUnitary);
    EXPECT_EQ(error_code_of([] { validate_brep(single_brep(1.2, 1.0, 0.5)); }),
              ErrorCode::EfficiencyOutOfRange);
}

TEST(Standard, Constructors) {
    const MRep het = make_heterodyne(0.6);
    EXPECT_LT(std::abs(het.matrix(0, 0) - std::sqrt(0.3)), 1e-15);
    EXPECT_LT(std::abs(het.matrix(0, 1) - kI * std::sqrt(0.3)), 1e-15);

    const MRep hom = make_homodyne(1.0, 0.0);
    EXPECT_EQ(hom.matrix(0, 0), cplx(1.0));
    EXPECT_EQ(hom.matrix(0, 1), cplx(0.0));

    ComplexMatrix mp(1, 2);
    mp << std::sqrt(0.5), kI * std::sqrt(0.5);
    const MRep c = make_custom_efficiency(mp, RealVector::Constant(1, 0.5));
    EXPECT_NEAR(validate_mrep(c)(0), 0.5, 1e-12);

    ComplexMatrix bad(1, 2);
    bad << 1.0, 1.0;
    EXPECT_EQ(error_code_of([&] { make_custom_efficiency(bad, RealVector::Constant(1, 0.5)); }),
              ErrorCode::InvalidEfficientPart);
    EXPECT_EQ(error_code_of([] { make_heterodyne(1.5); }), ErrorCode::EfficiencyOutOfRange);
}

TEST(EfficientPart, Decompositions) {
    const auto het = efficient_decomposition(make_heterodyne(0.4));
    EXPECT_NEAR(het.eta(0), 0.4, 1e-12);
    EXPECT_LT(std::abs(het.m_prime(0, 0) - std::sqrt(0.5)), 1e-12);
    EXPECT_LT(std::abs(het.m_prime(0, 1) - kI * std::sqrt(0.5)), 1e-12);

    const MRep ideal = make_homodyne(1.0, 0.3);
    EXPECT_LT((efficient_decomposition(ideal).m_prime - ideal.matrix).norm(), 1e-12);

    const auto zero = efficient_decomposition(zero_mrep(2, 1.5));
    EXPECT_TRUE(zero.zero_efficiency[0] && zero.zero_efficiency[1]);
    const ComplexMatrix g = zero.m_prime * zero.m_prime.adjoint();
    EXPECT_LT((g - 1.5 * ComplexMatrix::Identity(2, 2)).norm(), 1e-12);

    Rng rng(31);
    RealVector eta(3);
    eta << 0.0, 0.6, 1.0;
    const MRep m = sampling::mrep_with_eta(rng, eta);
    const auto d = efficient_decomposition(m);
    EXPECT_TRUE(d.zero_efficiency[0]);
    EXPECT_LT((d.m_prime * d.m_prime.adjoint() - ComplexMatrix::Identity(3, 3)).norm(), 1e-10);
    EXPECT_LT((eta.cwiseSqrt().cast<cplx>().asDiagonal() * d.m_prime - m.matrix).norm(), 1e-10);
}

}  // namespace reps_test
