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

// Reference computations used by the tests. They deliberately avoid the
// library's propagators so that agreement is a real cross-check.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using CM = Eigen::MatrixXcd;
using RM = Eigen::MatrixXd;

/// Column-stacking vectorization.
inline Eigen::VectorXcd vec(const CM& x) {
    return Eigen::Map<const Eigen::VectorXcd>(x.data(), x.size());
}

inline CM unvec(const Eigen::VectorXcd& v, Eigen::Index n) {
    return Eigen::Map<const CM>(v.data(), n, n);
}

/// Superoperator matrix of rho -> (-i[H, rho] + sum_k D[c_k] rho) / hbar,
/// built from vec(A X B) = (B^T kron A) vec(X).
inline CM liouvillian_matrix(const CM& h, const std::vector<CM>& cs, double hbar) {
    const Eigen::Index n = h.rows();
    const CM id = CM::Identity(n, n);
    const cplx i(0.0, 1.0);
    CM l = -i * (Eigen::kroneckerProduct(id, h).eval() - Eigen::kroneckerProduct(h.transpose(), id).eval());
    for (const auto& c : cs) {
        const CM cdc = c.adjoint() * c;
        l += Eigen::kroneckerProduct(c.conjugate(), c).eval();
        l -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
        l -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
    }
    return l / hbar;
}

/// e^{L tau} x via the dense matrix exponential.
inline CM propagate(const CM& lmat, const CM& x, double tau) {
    const CM e = (lmat * tau).exp();
    return unvec(e * vec(x), x.rows());
}

/// <A(t) B(t + tau)> = Tr{B e^{L tau}[rho A]}.
inline cplx two_time(const CM& lmat, const CM& a, const CM& b, const CM& rho, double tau) {
    return (b * propagate(lmat, rho * a, tau)).trace();
}

/// hbar^2 <y_i(t) y_j(t + tau)> for the current hbar y dt = <M^dag c + M^T c^*> dt + hbar dw.
inline RM autocorrelation(const CM& lmat, const CM& m, const std::vector<CM>& cs, const CM& rho,
                          double tau) {
    const Eigen::Index d = m.cols();
    std::vector<CM> ops(static_cast<size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        CM a = CM::Zero(rho.rows(), rho.cols());
        for (size_t k = 0; k < cs.size(); ++k) a += std::conj(m(Eigen::Index(k), j)) * cs[k];
        ops[size_t(j)] = a;
    }
    const CM e = (lmat * tau).exp();
    RM out(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const CM src = ops[size_t(i)] * rho + rho * ops[size_t(i)].adjoint();
        const CM evolved = unvec(e * vec(src), rho.rows());
        for (Eigen::Index j = 0; j < d; ++j) {
            const CM x = ops[size_t(j)] + ops[size_t(j)].adjoint();
            out(i, j) = (x * evolved).trace().real();
        }
    }
    return out;
}

/// Exact E[Tr rho'^2] for one Euler-Maruyama step of the nonlinear equation
/// from rho, with dw ~ N(0, dt I). The step is affine in dw, so
/// E Tr rho'^2 = Tr rho0'^2 + dt sum_j Tr K_j^2 with rho0' the deterministic
/// part and K_j the coefficient of dw_j.
inline double expected_purity_after_step(const CM& h, const std::vector<CM>& cs, const CM& m,
                                         double hbar, const CM& rho, double dt) {
    const Eigen::Index n = rho.rows();
    const cplx i(0.0, 1.0);
    CM drift = -i * (h * rho - rho * h);
    for (const auto& c : cs) {
        drift += c * rho * c.adjoint() - 0.5 * (c.adjoint() * c * rho + rho * c.adjoint() * c);
    }
    const CM rho0 = rho + dt * drift / hbar;
    double e = (rho0 * rho0).trace().real();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        CM a = CM::Zero(n, n);
        for (size_t k = 0; k < cs.size(); ++k) a += std::conj(m(Eigen::Index(k), j)) * cs[k];
        CM kj = a * rho + rho * a.adjoint();
        kj -= kj.trace() * rho;
        kj /= hbar;
        e += dt * (kj * kj).trace().real();
    }
    return e;
}

/// Lowering operator of a harmonic oscillator truncated to n levels.
inline CM annihilation(Eigen::Index n) {
    CM a = CM::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

/// Coherent state |alpha> truncated to n levels and renormalized.
inline Eigen::VectorXcd coherent(cplx alpha, Eigen::Index n) {
    Eigen::VectorXcd psi(n);
    cplx term = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (k > 0) term *= alpha / std::sqrt(double(k));
        psi(k) = term;
    }
    return psi / psi.norm();
}

}  // namespace oracle
