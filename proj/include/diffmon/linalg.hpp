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

// Dense matrix primitives shared by every other module: positive square
// roots, polar decomposition, pseudoinverse and structural predicates.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

#include "diffmon/error.hpp"

namespace diffmon {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr cplx kI{0.0, 1.0};

namespace linalg {

template <typename Derived>
typename Derived::PlainObject hermitize(const Eigen::MatrixBase<Derived>& a) {
    return (0.5 * (a + a.adjoint())).eval();
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of the Hermitian part of `a`.
template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
    using Plain = typename Derived::PlainObject;
    if (a.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Plain> es(hermitize(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// Positive square root of a Hermitian PSD matrix (real or complex).
///
/// Eigenvalues in (-tol*|A|, 0) are clamped to zero; anything more negative
/// is reported as NotPSD. |A| is the Frobenius norm.
template <typename Derived>
typename Derived::PlainObject positive_sqrt(const Eigen::MatrixBase<Derived>& a,
                                            double tol = kDefaultTol) {
    using Plain = typename Derived::PlainObject;
    if (a.rows() != a.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "positive_sqrt needs a square matrix");
    }
    const double norm = a.norm();
    if (norm == 0.0) return Plain::Zero(a.rows(), a.cols());
    if ((a - a.adjoint()).norm() > tol * norm) {
        throw Error(ErrorCode::NotHermitian, "positive_sqrt input is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Plain> es(hermitize(a));
    if (es.info() != Eigen::Success) {
        throw Error(ErrorCode::NotPSD, "eigensolver failed");
    }
    RealVector lambda = es.eigenvalues();
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k) < -tol * norm) {
            throw Error(ErrorCode::NotPSD, "eigenvalue " + std::to_string(lambda(k)) +
                                               " below -tol*|A|");
        }
        lambda(k) = std::sqrt(std::max(lambda(k), 0.0));
    }
    const auto& v = es.eigenvectors();
    Plain root = v * lambda.asDiagonal() * v.adjoint();
    return hermitize(root);
}

struct PolarDecomposition {
    RealMatrix p;  // positive factor, sqrt(T T^T)
    RealMatrix o;  // orthogonal factor
    bool unique = true;
};

/// T = P O with P = sqrt(T T^T) and O orthogonal.
///
/// Built from the singular decomposition T = W S V^T, so P = W S W^T and
/// O = W V^T. When T is rank deficient O is not unique; in that case the
/// left singular vector belonging to the smallest singular value is flipped
/// if needed so that det(O) = +1.
inline PolarDecomposition polar_decompose(const RealMatrix& t, double tol = kDefaultTol) {
    if (t.rows() != t.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "polar_decompose needs a square matrix");
    }
    const Eigen::Index n = t.rows();
    PolarDecomposition out;
    if (n == 0) return out;
    Eigen::JacobiSVD<RealMatrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RealMatrix w = svd.matrixU();
    const RealMatrix& v = svd.matrixV();
    const RealVector& s = svd.singularValues();  // descending
    const double smax = s(0);
    out.unique = smax > 0.0 && s(n - 1) > tol * smax;
    if (!out.unique) {
        RealMatrix o = w * v.transpose();
        if (o.determinant() < 0.0) w.col(n - 1) *= -1.0;
    }
    out.p = w * s.asDiagonal() * w.transpose();
    out.p = (0.5 * (out.p + out.p.transpose())).eval();
    out.o = w * v.transpose();
    return out;
}

/// Moore-Penrose inverse; singular values below tol*s_max are treated as zero.
inline RealMatrix pseudo_inverse(const RealMatrix& a, double tol = kDefaultTol) {
    if (a.size() == 0) return RealMatrix(a.cols(), a.rows());
    Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    const double cutoff = tol * (s.size() ? s(0) : 0.0);
    RealMatrix sinv = RealMatrix::Zero(a.cols(), a.rows());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) > cutoff && s(k) > 0.0) sinv(k, k) = 1.0 / s(k);
    }
    return svd.matrixV() * sinv * svd.matrixU().transpose();
}

struct MatrixClass {
    bool hermitian = false;
    bool psd = false;
    bool unitary = false;
    bool orthogonal = false;
    bool real = false;
    bool diagonal = false;
};

/// Structural flags, each tested relative to max(|A|_F, 1).
inline MatrixClass classify(const ComplexMatrix& a, double tol = kDefaultTol) {
    MatrixClass c;
    const double scale = std::max(a.norm(), 1.0);
    const bool square = a.rows() == a.cols();
    c.real = a.imag().norm() <= tol * scale;
    if (square) {
        c.hermitian = (a - a.adjoint()).norm() <= tol * scale;
        c.psd = c.hermitian && min_eigenvalue(a) >= -tol * scale;
        const ComplexMatrix id = ComplexMatrix::Identity(a.rows(), a.cols());
        c.unitary = (a.adjoint() * a - id).norm() <= tol * scale;
        c.orthogonal = c.unitary && c.real;
        ComplexMatrix off = a;
        off.diagonal().setZero();
        c.diagonal = off.norm() <= tol * scale;
    }
    return c;
}

/// Half the sum of absolute eigenvalues of a - b (both Hermitian).
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(a - b), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline bool is_unitary(const ComplexMatrix& a, double tol = kDefaultTol) {
    return a.rows() == a.cols() &&
           (a.adjoint() * a - ComplexMatrix::Identity(a.rows(), a.cols())).norm() <=
               tol * std::max(1.0, std::sqrt(static_cast<double>(a.rows())));
}

}  // namespace linalg
}  // namespace diffmon
