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

// Ensemble post-processing.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "diffmon/dynamics.hpp"
#include "diffmon/sme.hpp"
#include "diffmon/trajectory.hpp"

namespace diffmon {

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ess = 0.0;  // effective sample size
};

namespace detail {

inline size_t require_snapshot(const Ensemble& ens, size_t index) {
    if (ens.trajectories.empty() || index >= ens.snapshot_steps.size() ||
        ens.trajectories[0].snapshots.size() <= index) {
        throw Error(ErrorCode::NoSnapshots,
                    "no stored states at snapshot index " + std::to_string(index));
    }
    return index;
}

/// Weights w_i / max_j w_j for a snapshot (all ones in nonlinear mode).
inline std::vector<double> snapshot_weights(const Ensemble& ens, size_t index) {
    std::vector<double> w(ens.trajectories.size(), 1.0);
    if (ens.config.mode != SimMode::Linear) return w;
    double top = -INFINITY;
    for (const auto& t : ens.trajectories) top = std::max(top, t.snapshot_log_weights[index]);
    for (size_t k = 0; k < w.size(); ++k) {
        w[k] = std::exp(ens.trajectories[k].snapshot_log_weights[index] - top);
    }
    return w;
}

/// Self-normalized weighted mean, delta-method standard error and ESS.
inline Estimate weighted_estimate(const std::vector<double>& f, const std::vector<double>& w) {
    Estimate e;
    const size_t n = f.size();
    if (n == 0) return e;
    double sw = 0.0, sw2 = 0.0, swf = 0.0;
    for (size_t k = 0; k < n; ++k) {
        sw += w[k];
        sw2 += w[k] * w[k];
        swf += w[k] * f[k];
    }
    e.mean = swf / sw;
    e.ess = sw * sw / sw2;
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) acc += w[k] * w[k] * (f[k] - e.mean) * (f[k] - e.mean);
    if (n > 1) {
        // Bessel-type correction so equal weights reproduce the sample standard error.
        e.std_error = std::sqrt(acc * double(n) / double(n - 1)) / sw;
    }
    return e;
}

}  // namespace detail

/// Mean conditional state at a snapshot; weight-normalized in linear mode.
inline ComplexMatrix ensemble_mean_state(const Ensemble& ens, size_t snapshot_index) {
    detail::require_snapshot(ens, snapshot_index);
    const auto w = detail::snapshot_weights(ens, snapshot_index);
    ComplexMatrix acc = ComplexMatrix::Zero(ens.dim, ens.dim);
    double sw = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
        acc += w[k] * ens.trajectories[k].snapshots[snapshot_index];
        sw += w[k];
    }
    acc = linalg::hermitize(acc / sw);
    return acc / acc.trace().real();
}

/// Ensemble estimate of Tr[O rho] at a snapshot.
inline Estimate ensemble_expectation(const Ensemble& ens, size_t snapshot_index,
                                     const ComplexMatrix& observable) {
    detail::require_snapshot(ens, snapshot_index);
    std::vector<double> f;
    f.reserve(ens.trajectories.size());
    for (const auto& t : ens.trajectories) {
        f.push_back((observable * t.snapshots[snapshot_index]).trace().real());
    }
    return detail::weighted_estimate(f, detail::snapshot_weights(ens, snapshot_index));
}

struct ConvergenceReport {
    std::vector<double> times;
    std::vector<double> trace_distance;  // ensemble mean vs Euler master equation
    std::vector<double> bias;            // ensemble mean vs RK4 master equation
    double max_trace_distance = 0.0;
    double max_bias = 0.0;
    RealVector noise_mean;               // per component
    RealMatrix noise_covariance;         // divided by dt; identity expected
    long n_increments = 0;
};

/// Compares the mean state with the master equation at each snapshot and
/// summarizes the stored Wiener increments.
///
/// `trace_distance` uses the Euler discretization that the ensemble mean
/// follows exactly, so it measures sampling error only; `bias` uses RK4 and
/// also contains the O(dt) discretization error.
inline ConvergenceReport convergence_report(const Ensemble& ens, const LindbladModel& model) {
    ConvergenceReport rep;
    const double dt = ens.config.dt;
    if (!ens.trajectories.empty() && !ens.trajectories[0].snapshots.empty()) {
        const auto euler = me_integrate(model, ens.rho0, dt, ens.config.steps, kDefaultTol,
                                        MeStepper::Euler);
        const auto rk4 = me_integrate(model, ens.rho0, dt, ens.config.steps);
        for (size_t s = 0; s < ens.snapshot_steps.size(); ++s) {
            const long n = ens.snapshot_steps[s];
            const ComplexMatrix mean = ensemble_mean_state(ens, s);
            const double d = linalg::trace_distance(mean, euler[size_t(n)]);
            const double b = linalg::trace_distance(mean, rk4[size_t(n)]);
            rep.times.push_back(double(n) * dt);
            rep.trace_distance.push_back(d);
            rep.bias.push_back(b);
            rep.max_trace_distance = std::max(rep.max_trace_distance, d);
            rep.max_bias = std::max(rep.max_bias, b);
        }
    }
    const Eigen::Index d = 2 * ens.channels;
    rep.noise_mean = RealVector::Zero(d);
    rep.noise_covariance = RealMatrix::Zero(d, d);
    for (const auto& t : ens.trajectories) {
        if (t.noise.rows() == 0) continue;
        rep.noise_mean += t.noise.colwise().sum().transpose();
        rep.noise_covariance += t.noise.transpose() * t.noise;
        rep.n_increments += long(t.noise.rows());
    }
    if (rep.n_increments > 0) {
        const double n = double(rep.n_increments);
        rep.noise_mean /= n;
        rep.noise_covariance =
            (rep.noise_covariance / n - rep.noise_mean * rep.noise_mean.transpose()) / dt;
    }
    return rep;
}

/// Averages consecutive blocks of `bin` rows; a trailing partial block is dropped.
/// Binned currents at lags of one bin or more never share a noise increment.
inline RealMatrix bin_rows(const RealMatrix& x, long bin) {
    if (bin < 1) throw Error(ErrorCode::InvalidArgument, "bin must be >= 1");
    const long rows = static_cast<long>(x.rows()) / bin;
    RealMatrix out(rows, x.cols());
    for (long r = 0; r < rows; ++r) out.row(r) = x.middleRows(r * bin, bin).colwise().mean();
    return out;
}

/// Mean state over the record rows [first, first + count) of a current record
/// binned by `bin` steps, from a state path with states[n] at time n dt.
/// Each step contributes the average of its end points.
inline ComplexMatrix window_mean_state(const std::vector<ComplexMatrix>& states, long first,
                                       long count, long bin = 1) {
    const long lo = first * bin;
    const long hi = (first + count) * bin;
    if (first < 0 || count < 1 || bin < 1 || hi >= static_cast<long>(states.size())) {
        throw Error(ErrorCode::InsufficientData, "state path shorter than the averaging window");
    }
    ComplexMatrix sum = ComplexMatrix::Zero(states[0].rows(), states[0].cols());
    for (long n = lo; n < hi; ++n) sum += 0.5 * (states[size_t(n)] + states[size_t(n + 1)]);
    return sum / double(hi - lo);
}

struct LagEstimate {
    long lag = 0;  // in steps
    double tau = 0.0;
    RealMatrix mean;    // E[y(t) y^T(t + tau)]
    RealMatrix std_error;  // across trajectories
};

/// Streaming estimator of E[y(t) y^T(t + tau)] over the stationary tail.
///
/// Each trajectory contributes its time average over steps n >= burn_in * steps
/// with n + lag < steps; standard errors come from the spread of these
/// per-trajectory averages.
class AutocorrelationAccumulator {
public:
    AutocorrelationAccumulator(Eigen::Index dim, std::vector<long> lags, long steps, double dt,
                               double burn_in_fraction = 0.5)
        : dim_(dim), lags_(std::move(lags)), steps_(steps), dt_(dt) {
        if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "burn-in fraction must be in [0, 1)");
        }
        start_ = static_cast<long>(std::floor(burn_in_fraction * double(steps)));
        for (long lag : lags_) {
            if (lag < 1) throw Error(ErrorCode::NonPositiveLag, "lags must be >= 1 step");
            if (steps_ - lag - start_ < 1) {
                throw Error(ErrorCode::InsufficientData,
                            "lag " + std::to_string(lag) + " exceeds the stationary tail");
            }
        }
        sum_.assign(lags_.size(), RealMatrix::Zero(dim, dim));
        sumsq_.assign(lags_.size(), RealMatrix::Zero(dim, dim));
    }

    void add(const RealMatrix& currents) {
        if (currents.rows() != steps_ || currents.cols() != dim_) {
            throw Error(ErrorCode::DimensionMismatch, "current record has the wrong shape");
        }
        for (size_t k = 0; k < lags_.size(); ++k) {
            const long lag = lags_[k];
            const long count = steps_ - lag - start_;
            const RealMatrix avg = currents.middleRows(start_, count).transpose() *
                                   currents.middleRows(start_ + lag, count) / double(count);
            sum_[k] += avg;
            sumsq_[k] += avg.cwiseProduct(avg);
        }
        ++n_;
    }

    long count() const { return n_; }
    long start() const { return start_; }
    const std::vector<long>& lags() const { return lags_; }
    long steps() const { return steps_; }

    std::vector<LagEstimate> result() const {
        if (n_ < 2) throw Error(ErrorCode::InsufficientData, "need at least two trajectories");
        std::vector<LagEstimate> out;
        const double n = double(n_);
        for (size_t k = 0; k < lags_.size(); ++k) {
            LagEstimate e;
            e.lag = lags_[k];
            e.tau = double(lags_[k]) * dt_;
            e.mean = sum_[k] / n;
            const RealMatrix var =
                ((sumsq_[k] / n - e.mean.cwiseProduct(e.mean)) * (n / (n - 1.0))).cwiseMax(0.0);
            e.std_error = (var / n).cwiseSqrt();
            out.push_back(std::move(e));
        }
        return out;
    }

private:
    Eigen::Index dim_;
    std::vector<long> lags_;
    long steps_;
    double dt_;
    long start_ = 0;
    long n_ = 0;
    std::vector<RealMatrix> sum_;
    std::vector<RealMatrix> sumsq_;
};

/// E[y(t) y^T(t + tau)] for strictly positive lags, excluding equal-time products.
inline std::vector<LagEstimate> autocorrelation_estimate(const Ensemble& ens,
                                                         const std::vector<long>& lags,
                                                         double burn_in_fraction = 0.5) {
    if (ens.config.mode != SimMode::Nonlinear) {
        throw Error(ErrorCode::InvalidArgument, "autocorrelation needs a nonlinear ensemble");
    }
    AutocorrelationAccumulator acc(2 * ens.channels, lags, ens.config.steps, ens.config.dt,
                                   burn_in_fraction);
    for (const auto& t : ens.trajectories) {
        if (t.currents.rows() == 0) throw Error(ErrorCode::InsufficientData, "currents not recorded");
        acc.add(t.currents);
    }
    return acc.result();
}

struct ConsistencyRow {
    std::string name;
    Estimate nonlinear;
    Estimate linear;
    double z = 0.0;  // difference in units of the combined standard error
    bool flagged = false;
};

struct ConsistencyReport {
    std::vector<ConsistencyRow> rows;
    double linear_ess = 0.0;
    bool consistent = true;
};

struct NamedObservable {
    std::string name;
    ComplexMatrix matrix;
};

/// Runs matched nonlinear and linear ensembles and compares final-time means.
/// The linear run uses streams after those of the nonlinear run.
inline ConsistencyReport linear_nonlinear_consistency(const LindbladModel& model, const MRep& m,
                                                      const ComplexMatrix& rho0,
                                                      SimulationConfig cfg,
                                                      const std::vector<NamedObservable>& obs,
                                                      double z_limit = 4.0) {
    cfg.record_currents = false;
    cfg.record_noise = false;
    cfg.record_snapshots = true;
    cfg.mode = SimMode::Nonlinear;
    const Ensemble nl = simulate_ensemble(model, m, rho0, cfg);
    cfg.mode = SimMode::Linear;
    cfg.first_stream += std::uint32_t(cfg.n_traj);
    const Ensemble li = simulate_ensemble(model, m, rho0, cfg);
    const size_t last = nl.snapshot_steps.size() - 1;
    ConsistencyReport rep;
    for (const auto& o : obs) {
        ConsistencyRow row;
        row.name = o.name;
        row.nonlinear = ensemble_expectation(nl, last, o.matrix);
        row.linear = ensemble_expectation(li, last, o.matrix);
        // Differences at roundoff level count as agreement; deterministic
        // ensembles otherwise give a ratio of two roundoff terms.
        const double floor = 1e-12 * (1.0 + std::abs(row.nonlinear.mean));
        const double se = std::hypot(row.nonlinear.std_error, row.linear.std_error);
        const double diff = row.linear.mean - row.nonlinear.mean;
        row.z = std::abs(diff) <= floor ? 0.0 : diff / std::max(se, floor);
        row.flagged = std::abs(row.z) > z_limit;
        rep.consistent = rep.consistent && !row.flagged;
        rep.linear_ess = row.linear.ess;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace diffmon
