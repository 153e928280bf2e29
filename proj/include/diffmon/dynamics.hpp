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


#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "diffmon/error.hpp"
#include "diffmon/linalg.hpp"
#include "diffmon/reps.hpp"

namespace diffmon {

/// Hamiltonian plus L >= 1 Lindblad operators on an N-dimensional space.
class LindbladModel {
public:
    LindbladModel(ComplexMatrix hamiltonian, std::vector<ComplexMatrix> lindblads,
                  double hbar = 1.0, double tol = kDefaultTol)
        : hbar_(hbar), h_(std::move(hamiltonian)), c_(std::move(lindblads)) {
        detail::require_positive_hbar(hbar_);
        const Eigen::Index n = h_.rows();
        if (n < 1 || h_.cols() != n) {
            throw Error(ErrorCode::DimensionMismatch, "Hamiltonian must be square");
        }
        if ((h_ - h_.adjoint()).norm() > tol * std::max(1.0, h_.norm())) {
            throw Error(ErrorCode::NotHermitian, "Hamiltonian is not Hermitian");
        }
        if (c_.empty()) {
            throw Error(ErrorCode::InvalidArgument, "at least one Lindblad operator is required");
        }
        ComplexMatrix decay = ComplexMatrix::Zero(n, n);
        for (size_t k = 0; k < c_.size(); ++k) {
            if (c_[k].rows() != n || c_[k].cols() != n) {
                throw Error(ErrorCode::DimensionMismatch,
                            "lindblads[" + std::to_string(k) + "] is not N x N");
            }
            decay += c_[k].adjoint() * c_[k];
        }
        heff_ = h_ - 0.5 * kI * decay;
    }

    double hbar() const { return hbar_; }
    Eigen::Index dim() const { return h_.rows(); }
    Eigen::Index channels() const { return static_cast<Eigen::Index>(c_.size()); }
    const ComplexMatrix& hamiltonian() const { return h_; }
    const std::vector<ComplexMatrix>& lindblads() const { return c_; }
    /// H - (i/2) sum_k c_k^dag c_k
    const ComplexMatrix& effective_hamiltonian() const { return heff_; }

private:
    double hbar_;
    ComplexMatrix h_;
    std::vector<ComplexMatrix> c_;
    ComplexMatrix heff_;
};

/// Throws StateInvalid unless rho is Hermitian, unit trace and PSD within tol.
inline void validate_state(const ComplexMatrix& rho, double tol = kDefaultTol) {
    if (rho.rows() != rho.cols() || rho.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "density matrix must be square");
    }
    if ((rho - rho.adjoint()).norm() > tol) {
        throw Error(ErrorCode::StateInvalid, "density matrix is not Hermitian");
    }
    if (std::abs(rho.trace() - 1.0) > tol) {
        throw Error(ErrorCode::StateInvalid, "density matrix trace differs from 1");
    }
    const double lmin = linalg::min_eigenvalue(rho);
    if (lmin < -tol) {
        throw Error(ErrorCode::StateInvalid, "density matrix eigenvalue " + std::to_string(lmin));
    }
}

/// Smallest eigenvalue of a Hermitian matrix, closed form for N = 2.
inline double min_eigenvalue_hermitian(const ComplexMatrix& a) {
    if (a.rows() == 2) {
        const double p = a(0, 0).real();
        const double q = a(1, 1).real();
        const double h = 0.5 * (p - q);
        return 0.5 * (p + q) - std::sqrt(h * h + std::norm(a(0, 1)));
    }
    return linalg::min_eigenvalue(a);
}

inline void require_dim(const LindbladModel& model, const ComplexMatrix& x, const char* what) {
    if (x.rows() != model.dim() || x.cols() != model.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + " must be " + std::to_string(model.dim()) + " x " +
                        std::to_string(model.dim()));
    }
}

/// Returns L x / hbar = (-i[H, x] + sum_k D[c_k] x) / hbar for any N x N x.
inline ComplexMatrix liouvillian_apply(const LindbladModel& model, const ComplexMatrix& x) {
    require_dim(model, x, "state");
    const ComplexMatrix& heff = model.effective_hamiltonian();
    ComplexMatrix out = -kI * (heff * x - x * heff.adjoint());
    for (const auto& c : model.lindblads()) out.noalias() += c * x * c.adjoint();
    return out / model.hbar();
}

/// One classical Runge-Kutta step of dx/dt = L x / hbar. No Hermitization.
inline ComplexMatrix rk4_step(const LindbladModel& model, const ComplexMatrix& x, double dt) {
    const ComplexMatrix k1 = liouvillian_apply(model, x);
    const ComplexMatrix k2 = liouvillian_apply(model, x + 0.5 * dt * k1);
    const ComplexMatrix k3 = liouvillian_apply(model, x + 0.5 * dt * k2);
    const ComplexMatrix k4 = liouvillian_apply(model, x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One explicit Euler step x + dt L x / hbar.
inline ComplexMatrix euler_step(const LindbladModel& model, const ComplexMatrix& x, double dt) {
    return x + dt * liouvillian_apply(model, x);
}

enum class MeStepper { RK4, Euler };

/// Integrates the master equation; returns steps + 1 states starting with rho0.
///
/// Each state is Hermitized and renormalized. A minimum eigenvalue below -tol
/// raises StateInvalid. The Euler stepper reproduces the deterministic part of
/// the stochastic integrator exactly.
inline std::vector<ComplexMatrix> me_integrate(const LindbladModel& model,
                                               const ComplexMatrix& rho0, double dt, long steps,
                                               double tol = kDefaultTol,
                                               MeStepper stepper = MeStepper::RK4) {
    if (!(dt > 0.0) || steps < 0) {
        throw Error(ErrorCode::InvalidArgument, "me_integrate needs dt > 0 and steps >= 0");
    }
    require_dim(model, rho0, "rho0");
    validate_state(rho0, std::max(tol, 1e-9));
    std::vector<ComplexMatrix> out;
    out.reserve(static_cast<size_t>(steps) + 1);
    out.push_back(rho0);
    ComplexMatrix rho = rho0;
    for (long n = 0; n < steps; ++n) {
        if (stepper == MeStepper::RK4) {
            rho = linalg::hermitize(rk4_step(model, rho, dt));
        } else {
            rho = linalg::hermitize(euler_step(model, rho, dt));
        }
        rho /= rho.trace().real();
        const double lmin = min_eigenvalue_hermitian(rho);
        if (lmin < -tol) {
            throw Error(ErrorCode::StateInvalid, "positivity lost at step " + std::to_string(n + 1) +
                                                     ": eigenvalue " + std::to_string(lmin));
        }
        out.push_back(rho);
    }
    return out;
}

/// Propagates x (possibly non-Hermitian) for time tau with RK4 steps of at most max_dt.
inline ComplexMatrix propagate(const LindbladModel& model, ComplexMatrix x, double tau,
                               double max_dt = 1e-3) {
    if (tau <= 0.0) return x;
    const long steps = std::max(1L, static_cast<long>(std::ceil(tau / max_dt - 1e-9)));
    const double h = tau / static_cast<double>(steps);
    for (long n = 0; n < steps; ++n) x = rk4_step(model, x, h);
    return x;
}

/// Combination sum_k a_k c_k of the Lindblad operators.
inline ComplexMatrix combine_lindblads(const ComplexVector& a,
                                       const std::vector<ComplexMatrix>& lindblads) {
    if (a.size() != static_cast<Eigen::Index>(lindblads.size()) || lindblads.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "weight length must equal L");
    }
    ComplexMatrix out = ComplexMatrix::Zero(lindblads[0].rows(), lindblads[0].cols());
    for (size_t k = 0; k < lindblads.size(); ++k) out += a(Eigen::Index(k)) * lindblads[k];
    return out;
}

/// Complex weights equivalent to a real 2L vector w acting on (c; -i c).
inline ComplexVector real_weights_to_complex(const RealVector& w) {
    const Eigen::Index l = w.size() / 2;
    if (w.size() != 2 * l) throw Error(ErrorCode::DimensionMismatch, "weights must have length 2L");
    ComplexVector a(l);
    for (Eigen::Index k = 0; k < l; ++k) a(k) = cplx(w(k), -w(l + k));
    return a;
}

/// H[A] rho = A rho + rho A^dag - Tr(A rho + rho A^dag) rho with A = sum_k a_k c_k.
/// The linear variant omits the trace term.
inline ComplexMatrix h_superop_apply(const ComplexVector& a,
                                     const std::vector<ComplexMatrix>& lindblads,
                                     const ComplexMatrix& rho, bool linear = false) {
    const ComplexMatrix op = combine_lindblads(a, lindblads);
    if (op.rows() != rho.rows() || op.cols() != rho.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "state and Lindblad operators differ in size");
    }
    ComplexMatrix ar = op * rho;
    ComplexMatrix out = ar + ar.adjoint();
    if (!linear) out -= out.trace() * rho;
    return out;
}

inline ComplexMatrix h_superop_apply(const RealVector& w,
                                     const std::vector<ComplexMatrix>& lindblads,
                                     const ComplexMatrix& rho, bool linear = false) {
    if (w.size() != 2 * static_cast<Eigen::Index>(lindblads.size())) {
        throw Error(ErrorCode::DimensionMismatch, "real weights must have length 2L");
    }
    return h_superop_apply(real_weights_to_complex(w), lindblads, rho, linear);
}

/// Two-time average <A(t) B(t + tau)> = Tr{B e^{L tau / hbar}[rho_t A]}.
inline cplx regression_correlation(const LindbladModel& model, const ComplexMatrix& a,
                                   const ComplexMatrix& b, const ComplexMatrix& rho_t, double tau,
                                   double max_dt = 1e-3) {
    if (tau < 0.0) throw Error(ErrorCode::NonPositiveLag, "tau must be >= 0");
    require_dim(model, a, "A");
    require_dim(model, b, "B");
    require_dim(model, rho_t, "rho");
    return (b * propagate(model, rho_t * a, tau, max_dt)).trace();
}

/// The 2L operators (M^dag c)_j = sum_k conj(M_kj) c_k.
inline std::vector<ComplexMatrix> measured_operators(const LindbladModel& model, const MRep& m) {
    if (m.channels() != model.channels()) {
        throw Error(ErrorCode::DimensionMismatch, "M has " + std::to_string(m.channels()) +
                                                      " rows but the model has " +
                                                      std::to_string(model.channels()) +
                                                      " Lindblad operators");
    }
    std::vector<ComplexMatrix> out;
    out.reserve(static_cast<size_t>(m.matrix.cols()));
    for (Eigen::Index j = 0; j < m.matrix.cols(); ++j) {
        out.push_back(combine_lindblads(m.matrix.col(j).conjugate(), model.lindblads()));
    }
    return out;
}

/// hbar^2 <y(t) y^T(t + tau)> without the delta(tau) term, for each tau > 0:
/// C_ij(tau) = Tr{X_j e^{L tau / hbar}[A_i rho + rho A_i^dag]},
/// with A = M^dag c and X_j = A_j + A_j^dag.
inline std::vector<RealMatrix> predicted_autocorrelation(const LindbladModel& model,
                                                         const MRep& m,
                                                         const ComplexMatrix& rho_t,
                                                         const std::vector<double>& taus,
                                                         double max_dt = 1e-3) {
    require_dim(model, rho_t, "rho");
    for (double tau : taus) {
        if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveLag, "lags must be strictly positive");
    }
    const auto ops = measured_operators(model, m);
    const Eigen::Index n2l = static_cast<Eigen::Index>(ops.size());
    std::vector<ComplexMatrix> x(ops.size());
    for (size_t j = 0; j < ops.size(); ++j) x[j] = ops[j] + ops[j].adjoint();

    std::vector<size_t> order(taus.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](size_t p, size_t q) { return taus[p] < taus[q]; });

    std::vector<RealMatrix> out(taus.size(), RealMatrix::Zero(n2l, n2l));
    for (Eigen::Index i = 0; i < n2l; ++i) {
        const ComplexMatrix ar = ops[size_t(i)] * rho_t;
        ComplexMatrix src = ar + ar.adjoint();
        double t_now = 0.0;
        for (size_t k : order) {
            src = propagate(model, src, taus[k] - t_now, max_dt);
            t_now = taus[k];
            for (Eigen::Index j = 0; j < n2l; ++j) {
                out[k](i, j) = (x[size_t(j)] * src).trace().real();
            }
        }
    }
    return out;
}

/// Orthonormal Hermitian basis: generalized Gell-Mann matrices and I / sqrt(N).
class HermitianBasis {
public:
    explicit HermitianBasis(Eigen::Index n) : n_(n) {
        if (n < 1) throw Error(ErrorCode::InvalidArgument, "basis dimension must be >= 1");
        const double r2 = std::sqrt(0.5);
        elements_.push_back(ComplexMatrix::Identity(n, n) / std::sqrt(double(n)));
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index k = j + 1; k < n; ++k) {
                ComplexMatrix sym = ComplexMatrix::Zero(n, n);
                sym(j, k) = r2;
                sym(k, j) = r2;
                elements_.push_back(sym);
                ComplexMatrix anti = ComplexMatrix::Zero(n, n);
                anti(j, k) = -kI * r2;
                anti(k, j) = kI * r2;
                elements_.push_back(anti);
            }
        }
        for (Eigen::Index l = 1; l < n; ++l) {
            ComplexMatrix d = ComplexMatrix::Zero(n, n);
            const double norm = std::sqrt(double(l * (l + 1)));
            for (Eigen::Index m = 0; m < l; ++m) d(m, m) = 1.0 / norm;
            d(l, l) = -double(l) / norm;
            elements_.push_back(d);
        }
    }

    Eigen::Index dim() const { return n_; }
    size_t size() const { return elements_.size(); }
    const ComplexMatrix& operator[](size_t k) const { return elements_[k]; }
    const std::vector<ComplexMatrix>& elements() const { return elements_; }

    /// Real coordinates Tr[e_k x] of a Hermitian matrix.
    RealVector coordinates(const ComplexMatrix& x) const {
        RealVector v(static_cast<Eigen::Index>(elements_.size()));
        for (size_t k = 0; k < elements_.size(); ++k) {
            v(Eigen::Index(k)) = (elements_[k] * x).trace().real();
        }
        return v;
    }

private:
    Eigen::Index n_;
    std::vector<ComplexMatrix> elements_;
};

/// D = B B^T with B_kj = Tr{e_k H[(M^dag c)_j] rho} / hbar.
inline RealMatrix diffusion_matrix(const LindbladModel& model, const MRep& m,
                                   const ComplexMatrix& rho, const HermitianBasis& basis) {
    require_dim(model, rho, "rho");
    if (basis.dim() != model.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "basis dimension differs from model");
    }
    const auto ops = measured_operators(model, m);
    RealMatrix b(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(ops.size()));
    for (size_t j = 0; j < ops.size(); ++j) {
        const ComplexMatrix ar = ops[j] * rho;
        ComplexMatrix h = ar + ar.adjoint();
        h -= h.trace() * rho;
        b.col(Eigen::Index(j)) = basis.coordinates(h) / model.hbar();
    }
    return b * b.transpose();
}

/// Mean current from the U-rep: T^+ (Re J; Im J) with J = H<c> + Y<c>^*.
///
/// The current vector is defined only up to the orthogonal factor of T; the
/// caller may supply the T it uses, otherwise the symmetric root sqrt(hbar U)
/// is taken.
inline RealVector urep_current_mean(const LindbladModel& model, const URep& u,
                                    const ComplexMatrix& rho,
                                    const std::optional<RealMatrix>& t = std::nullopt,
                                    double tol = kDefaultTol) {
    require_dim(model, rho, "rho");
    const Eigen::Index l = u.channels();
    if (l != model.channels()) {
        throw Error(ErrorCode::DimensionMismatch, "U size does not match the channel count");
    }
    RealMatrix tm;
    if (t) {
        tm = *t;
        if (tm.rows() != 2 * l || tm.cols() != 2 * l ||
            (tm * tm.transpose() - u.hbar * u.matrix).norm() >
                1e-8 * std::max(1.0, u.hbar * u.matrix.norm())) {
            throw Error(ErrorCode::NoCompatibleT, "supplied T does not satisfy T T^T = hbar U");
        }
    } else {
        try {
            tm = linalg::positive_sqrt(RealMatrix(u.hbar * u.matrix), tol);
        } catch (const Error& e) {
            throw Error(ErrorCode::NoCompatibleT, e.what());
        }
    }
    const UrepSplit split = urep_split(u);
    ComplexVector c(l);
    for (Eigen::Index k = 0; k < l; ++k) c(k) = (model.lindblads()[size_t(k)] * rho).trace();
    const ComplexVector j = split.h.cast<cplx>() * c + split.y * c.conjugate();
    RealVector stacked(2 * l);
    stacked.head(l) = j.real();
    stacked.tail(l) = j.imag();
    return linalg::pseudo_inverse(tm, tol) * stacked;
}

/// Mean current (1/hbar) <M^dag c + M^T c^*> from the M-rep.
inline RealVector mrep_current_mean(const LindbladModel& model, const MRep& m,
                                    const ComplexMatrix& rho) {
    const Eigen::Index l = m.channels();
    if (l != model.channels()) throw Error(ErrorCode::DimensionMismatch, "channel count mismatch");
    ComplexVector c(l);
    for (Eigen::Index k = 0; k < l; ++k) c(k) = (model.lindblads()[size_t(k)] * rho).trace();
    return 2.0 * (m.matrix.adjoint() * c).real() / m.hbar;
}

}  // namespace diffmon
