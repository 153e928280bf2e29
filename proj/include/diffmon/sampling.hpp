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

// Random valid objects for property checks.

#pragma once

#include <Eigen/QR>

#include "diffmon/noise.hpp"
#include "diffmon/reps.hpp"

namespace diffmon::sampling {

inline ComplexMatrix complex_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    ComplexMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.complex_normal();
    return g;
}

inline RealMatrix real_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    RealMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
    return g;
}

/// Haar-distributed unitary (QR with phase correction).
inline ComplexMatrix unitary(Rng& rng, Eigen::Index n) {
    Eigen::HouseholderQR<ComplexMatrix> qr(complex_gaussian(rng, n, n));
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double a = std::abs(r(k, k));
        if (a > 0.0) q.col(k) *= r(k, k) / a;
    }
    return q;
}

/// Haar-distributed orthogonal matrix; either determinant sign occurs.
inline RealMatrix orthogonal(Rng& rng, Eigen::Index n) {
    Eigen::HouseholderQR<RealMatrix> qr(real_gaussian(rng, n, n));
    RealMatrix q = qr.householderQ() * RealMatrix::Identity(n, n);
    const RealMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < n; ++k)
        if (r(k, k) < 0.0) q.col(k) *= -1.0;
    return q;
}

/// Efficiencies in [0, 1]; occasionally exactly 0 or 1 to exercise the edges.
inline RealVector efficiencies(Rng& rng, Eigen::Index l) {
    RealVector eta(l);
    for (Eigen::Index k = 0; k < l; ++k) {
        const double u = rng.uniform();
        eta(k) = u < 0.05 ? 0.0 : (u < 0.1 ? 1.0 : rng.uniform());
    }
    return eta;
}

/// Valid M: orthonormal rows scaled by sqrt(hbar eta_k).
inline MRep mrep_with_eta(Rng& rng, const RealVector& eta, double hbar = 1.0) {
    const Eigen::Index l = eta.size();
    Eigen::HouseholderQR<ComplexMatrix> qr(complex_gaussian(rng, 2 * l, l));
    const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(2 * l, l);
    const RealVector scale = (hbar * eta).cwiseSqrt();
    return MRep{hbar, scale.asDiagonal() * q.adjoint()};
}

/// Random valid M with random efficiencies.
inline MRep mrep(Rng& rng, Eigen::Index l, double hbar = 1.0) {
    return mrep_with_eta(rng, efficiencies(rng, l), hbar);
}

inline BRep brep(Rng& rng, Eigen::Index l) {
    BRep b;
    b.eta = efficiencies(rng, l);
    b.theta = RealVector(l);
    for (Eigen::Index k = 0; k < l; ++k) b.theta(k) = rng.uniform();
    b.s = unitary(rng, l);
    return b;
}

inline ComplexVector pure_state(Rng& rng, Eigen::Index n) {
    ComplexVector psi = complex_gaussian(rng, n, 1);
    return psi / psi.norm();
}

/// Full-rank mixed state from a Ginibre matrix.
inline ComplexMatrix density_matrix(Rng& rng, Eigen::Index n) {
    const ComplexMatrix g = complex_gaussian(rng, n, n);
    ComplexMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

}  // namespace diffmon::sampling
