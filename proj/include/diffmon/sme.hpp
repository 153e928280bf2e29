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

// Diffusive stochastic master equations (nonlinear and linear), ensemble
// simulation and the coefficient-matrix identities of the measurement.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "diffmon/dynamics.hpp"
#include "diffmon/noise.hpp"
#include "diffmon/reps.hpp"
#include "diffmon/trajectory.hpp"

namespace diffmon {

/// Fastest rate of the model: (|H| + sum_k |c_k|^2) / hbar with spectral norms.
inline double rate_scale(const LindbladModel& model) {
    auto spectral = [](const ComplexMatrix& a) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    };
    double r = spectral(model.hamiltonian());
    for (const auto& c : model.lindblads()) {
        const double s = spectral(c);
        r += s * s;
    }
    return r / model.hbar();
}

inline constexpr double kNegativityFloor = 1e-6;
inline constexpr double kNegativityScale = 10.0;

/// Abort threshold for negative eigenvalues after an Euler-Maruyama step.
///
/// The scheme has strong order 1/2, so a path drifts off the positive cone by
/// about sqrt(dt * rate). The threshold is 10 sqrt(dt * rate) above the 1e-6
/// floor, which still catches runaway states.
inline double positivity_tolerance(const LindbladModel& model, double dt) {
    return std::max(kNegativityFloor, kNegativityScale * std::sqrt(dt * rate_scale(model)));
}

struct SmeStep {
    ComplexMatrix rho;
    RealVector y_dt;
    double min_eigenvalue = 0.0;
};

struct LinearSmeStep {
    ComplexMatrix rho_unnormalized;
    double log_weight_increment = 0.0;
};

namespace detail {

inline ComplexVector lindblad_means(const LindbladModel& model, const ComplexMatrix& rho) {
    ComplexVector c(model.channels());
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = (model.lindblads()[size_t(k)] * rho).trace();
    return c;
}

inline void require_compatible(const LindbladModel& model, const MRep& m) {
    if (m.channels() != model.channels() || m.matrix.cols() != 2 * m.channels()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "M must be L x 2L with L equal to the number of Lindblad operators");
    }
}

}  // namespace detail

/// One Ito Euler-Maruyama step of
/// hbar d rho = L rho dt + dw^T H[M^dag c] rho, hbar y dt = <M^dag c + M^T c^*> dt + hbar dw.
inline SmeStep sme_step_nonlinear(const LindbladModel& model, const MRep& m,
                                  const ComplexMatrix& rho, const RealVector& dw, double dt,
                                  double negativity_tol = kNegativityFloor) {
    detail::require_compatible(model, m);
    require_dim(model, rho, "rho");
    if (dw.size() != m.matrix.cols()) throw Error(ErrorCode::DimensionMismatch, "dw must have length 2L");
    const ComplexVector mean_c = detail::lindblad_means(model, rho);
    SmeStep out;
    out.y_dt = (2.0 * dt / model.hbar()) * (m.matrix.adjoint() * mean_c).real() + dw;

    const ComplexVector a = m.matrix.conjugate() * dw.cast<cplx>();
    ComplexMatrix next = euler_step(model, rho, dt);
    next += h_superop_apply(a, model.lindblads(), rho, false) / model.hbar();
    next = linalg::hermitize(next);
    next /= next.trace().real();
    out.min_eigenvalue = min_eigenvalue_hermitian(next);
    if (out.min_eigenvalue < -negativity_tol) {
        throw Error(ErrorCode::StateInvalid, "eigenvalue " + std::to_string(out.min_eigenvalue) +
                                                 " below -" + std::to_string(negativity_tol));
    }
    out.rho = std::move(next);
    return out;
}

/// One step of the linear equation hbar d rho = L rho dt + y_dt^T Hbar[M^dag c] rho,
/// with y_dt drawn from the ostensible law N(0, dt I). The log-weight increment
/// is log Tr[rho'] / Tr[rho].
inline LinearSmeStep sme_step_linear(const LindbladModel& model, const MRep& m,
                                     const ComplexMatrix& rho, const RealVector& y_dt, double dt) {
    detail::require_compatible(model, m);
    require_dim(model, rho, "rho");
    if (y_dt.size() != m.matrix.cols()) throw Error(ErrorCode::DimensionMismatch, "y_dt must have length 2L");
    const ComplexVector a = m.matrix.conjugate() * y_dt.cast<cplx>();
    LinearSmeStep out;
    out.rho_unnormalized = linalg::hermitize(
        rho + dt * liouvillian_apply(model, rho) +
        h_superop_apply(a, model.lindblads(), rho, true) / model.hbar());
    const double before = rho.trace().real();
    const double after = out.rho_unnormalized.trace().real();
    if (!(after > 0.0) || !(before > 0.0)) {
        throw Error(ErrorCode::WeightUnderflow, "non-positive trace in linear step");
    }
    out.log_weight_increment = std::log(after / before);
    return out;
}

namespace detail {

inline Trajectory run_trajectory(const LindbladModel& model, const MRep& m,
                                 const ComplexMatrix& rho0, const SimulationConfig& cfg,
                                 const std::vector<long>& snaps, std::uint32_t stream,
                                 double neg_tol) {
    const Eigen::Index d = m.matrix.cols();
    NoiseSource noise(cfg.seed, stream);
    Trajectory tr;
    tr.stream = stream;
    if (cfg.record_currents) tr.currents.resize(cfg.steps, d);
    if (cfg.record_noise) tr.noise.resize(cfg.steps, d);
    if (cfg.record_purity) {
        tr.purity.resize(cfg.steps);
        tr.log_weight.resize(cfg.steps);
    }
    ComplexMatrix rho = rho0;
    double logw = 0.0;
    size_t next_snap = 0;
    auto snapshot = [&](long n) {
        if (next_snap < snaps.size() && snaps[next_snap] == n) {
            if (cfg.record_snapshots) {
                tr.snapshots.push_back(rho);
                tr.snapshot_log_weights.push_back(logw);
            }
            ++next_snap;
        }
    };
    snapshot(0);
    for (long n = 0; n < cfg.steps; ++n) {
        const RealVector dw = noise.at(std::uint64_t(n), d, cfg.dt);
        RealVector y_dt;
        try {
            if (cfg.mode == SimMode::Nonlinear) {
                SmeStep s = sme_step_nonlinear(model, m, rho, dw, cfg.dt, neg_tol);
                rho = std::move(s.rho);
                y_dt = std::move(s.y_dt);
                tr.min_eigenvalue = std::min(tr.min_eigenvalue, s.min_eigenvalue);
            } else {
                LinearSmeStep s = sme_step_linear(model, m, rho, dw, cfg.dt);
                const double tr_after = s.rho_unnormalized.trace().real();
                rho = s.rho_unnormalized / tr_after;
                logw += s.log_weight_increment;
                if (logw < cfg.log_weight_floor) {
                    throw Error(ErrorCode::WeightUnderflow,
                                "log weight " + std::to_string(logw) + " below floor");
                }
                const double lmin = min_eigenvalue_hermitian(rho);
                tr.min_eigenvalue = std::min(tr.min_eigenvalue, lmin);
                if (lmin < -neg_tol) {
                    throw Error(ErrorCode::StateInvalid, "eigenvalue " + std::to_string(lmin) +
                                                             " below -" + std::to_string(neg_tol));
                }
                y_dt = dw;
            }
        } catch (const Error& e) {
            throw Error(e.code(), "trajectory " + std::to_string(stream) + " step " +
                                      std::to_string(n + 1) + ": " + e.what());
        }
        if (cfg.record_currents) tr.currents.row(n) = y_dt.transpose() / cfg.dt;
        if (cfg.record_noise) tr.noise.row(n) = dw.transpose();
        if (cfg.record_purity) {
            tr.purity(n) = (rho * rho).trace().real();
            tr.log_weight(n) = logw;
        }
        snapshot(n + 1);
    }
    if (!tr.log_weight.size()) tr.log_weight = RealVector::Constant(1, logw);
    return tr;
}

}  // namespace detail

/// Runs n_traj independent trajectories; trajectory k uses noise stream
/// first_stream + k, so the result does not depend on the thread count.
inline Ensemble simulate_ensemble(const LindbladModel& model, const MRep& m,
                                  const ComplexMatrix& rho0, const SimulationConfig& cfg) {
    detail::require_compatible(model, m);
    require_dim(model, rho0, "rho0");
    validate_state(rho0, 1e-9);
    validate_mrep(m);
    if (!(cfg.dt > 0.0) || cfg.steps < 1 || cfg.n_traj < 1) {
        throw Error(ErrorCode::InvalidArgument, "need dt > 0, steps >= 1, n_traj >= 1");
    }
    const double neg_tol =
        cfg.negativity_tol >= 0.0 ? cfg.negativity_tol : positivity_tolerance(model, cfg.dt);
    Ensemble ens;
    ens.config = cfg;
    ens.config.negativity_tol = neg_tol;
    ens.hbar = model.hbar();
    ens.dim = model.dim();
    ens.channels = model.channels();
    ens.rho0 = rho0;
    ens.snapshot_steps = snapshot_schedule(cfg.steps, cfg.snapshot_stride);
    ens.trajectories.resize(size_t(cfg.n_traj));

    std::atomic<long> next{0};
    std::mutex err_mutex;
    long err_index = cfg.n_traj;
    std::exception_ptr err;
    auto worker = [&]() {
        for (long k = next++; k < cfg.n_traj; k = next++) {
            try {
                ens.trajectories[size_t(k)] = detail::run_trajectory(
                    model, m, rho0, cfg, ens.snapshot_steps,
                    cfg.first_stream + std::uint32_t(k), neg_tol);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (k < err_index) {
                    err_index = k;
                    err = std::current_exception();
                }
            }
        }
    };
    const unsigned nthreads = std::max(1u, std::min<unsigned>(cfg.threads, unsigned(cfg.n_traj)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    return ens;
}

/// Covariance matrix H of the Lindblad operators used by the purity formula.
inline ComplexMatrix lindblad_covariance(const LindbladModel& model, const ComplexMatrix& rho) {
    const Eigen::Index l = model.channels();
    const ComplexVector mean_c = detail::lindblad_means(model, rho);
    ComplexMatrix h(l, l);
    for (Eigen::Index j = 0; j < l; ++j)
        for (Eigen::Index k = 0; k < l; ++k)
            h(j, k) = (model.lindblads()[size_t(j)].adjoint() * model.lindblads()[size_t(k)] * rho)
                          .trace() -
                      std::conj(mean_c(j)) * mean_c(k);
    return h;
}

/// Predicted d/dt of Tr rho^2 for a pure state: (2/hbar) tr[H (M M^dag / hbar - I)^T],
/// with H_jk = <c_j^dag c_k> - <c_j>^* <c_k>.
inline double purity_increment_predicted(const LindbladModel& model, const MRep& m,
                                         const ComplexMatrix& rho, double tol = kDefaultTol) {
    detail::require_compatible(model, m);
    require_dim(model, rho, "rho");
    if ((rho * rho).trace().real() < 1.0 - tol) {
        throw Error(ErrorCode::NotPure, "state purity below 1 - tol");
    }
    const Eigen::Index l = model.channels();
    const ComplexMatrix h = lindblad_covariance(model, rho);
    const ComplexMatrix x = m.matrix * m.matrix.adjoint() / m.hbar - ComplexMatrix::Identity(l, l);
    return (2.0 / model.hbar()) * (h * x.transpose()).trace().real();
}

/// L with hbar^2 L L^dag = hbar I - M^dag M, taken as the positive root.
inline ComplexMatrix noise_completion(const MRep& m, double tol = kDefaultTol) {
    const Eigen::Index n = m.matrix.cols();
    const ComplexMatrix z =
        m.hbar * ComplexMatrix::Identity(n, n) - m.matrix.adjoint() * m.matrix;
    return linalg::positive_sqrt(linalg::hermitize(z), tol) / m.hbar;
}

struct BrepNoiseMatrices {
    ComplexMatrix j;  // 2L x L
    ComplexMatrix v;  // 2L x L
    ComplexMatrix a;  // 2L x L
};

/// J = sqrt(hbar) (sqrt(Q) S sqrt(H); i sqrt(1-Q) S sqrt(H)),
/// V = (sqrt(Q) S sqrt(1-H); i sqrt(1-Q) S sqrt(1-H)) / sqrt(hbar),
/// A = (sqrt(1-Q); -i sqrt(Q)) / sqrt(hbar).
inline BrepNoiseMatrices brep_noise_matrices(const BRep& b, double hbar = 1.0,
                                             double tol = kDefaultTol) {
    detail::require_positive_hbar(hbar);
    validate_brep(b, tol);
    const Eigen::Index l = b.channels();
    const RealVector ones = RealVector::Ones(l);
    const ComplexMatrix rq = b.theta.cwiseSqrt().cast<cplx>().asDiagonal();
    const ComplexMatrix rqbar = (ones - b.theta).cwiseSqrt().cast<cplx>().asDiagonal();
    const ComplexMatrix rh = b.eta.cwiseSqrt().cast<cplx>().asDiagonal();
    const ComplexMatrix rhbar = (ones - b.eta).cwiseSqrt().cast<cplx>().asDiagonal();
    const double sh = std::sqrt(hbar);
    BrepNoiseMatrices out;
    out.j.resize(2 * l, l);
    out.j.topRows(l) = sh * rq * b.s * rh;
    out.j.bottomRows(l) = sh * kI * rqbar * b.s * rh;
    out.v.resize(2 * l, l);
    out.v.topRows(l) = rq * b.s * rhbar / sh;
    out.v.bottomRows(l) = kI * rqbar * b.s * rhbar / sh;
    out.a.resize(2 * l, l);
    out.a.topRows(l) = rqbar / sh;
    out.a.bottomRows(l) = -kI * rq / sh;
    return out;
}

}  // namespace diffmon
