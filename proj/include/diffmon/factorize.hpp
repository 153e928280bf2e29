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

// Single-channel factorization M = sqrt(hbar eta) S^dag (sqrt(theta), -i sqrt(1-theta)) O.

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "diffmon/reps.hpp"

namespace diffmon {

/// theta_r(phi) = (r cos^2 - sin^2) / ((r + 1)(cos^2 - sin^2)).
inline double theta_r(double r, double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return (r * c * c - s * s) / ((r + 1.0) * (c * c - s * s));
}

/// Phase difference arg(m1) - arg(m2) produced by (theta, phi); lies in [0, pi].
inline double f_plus_theta(double theta, double phi) {
    const double th = detail::clamp_unit(theta);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return std::atan2(std::sqrt(th * (1.0 - th)), (2.0 * th - 1.0) * c * s);
}

/// F+_r(phi): f_plus_theta evaluated at theta = theta_r(phi).
inline double f_plus(double r, double phi) { return f_plus_theta(theta_r(r, phi), phi); }

struct L1Factorization {
    BRep b;
    OrthoMatrix o;
    double phi = 0.0;  // rotation angle of O (before any reflection)
};

namespace detail {

inline double wrap_pi(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    x = std::remainder(x, two_pi);  // [-pi, pi]
    if (x <= -std::numbers::pi) x += two_pi;
    return x;
}

inline RealMatrix rotation(double phi) {
    RealMatrix o(2, 2);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    o << c, s, -s, c;
    return o;
}

/// Smallest phi in the admissible set with F+_r(phi) = delta, delta in [0, pi].
inline std::optional<double> solve_phi(double r, double delta) {
    constexpr double pi = std::numbers::pi;
    const double lo = std::min(r, 1.0 / r);
    const double hi = std::max(r, 1.0 / r);
    const double a = std::atan(std::sqrt(lo));
    const double b = std::atan(std::sqrt(hi));
    // tan^2(phi) <= min(r, 1/r) or tan^2(phi) >= max(r, 1/r), restricted to [0, pi).
    const std::vector<std::pair<double, double>> intervals = {
        {0.0, a}, {b, pi - b}, {pi - a, pi}};
    constexpr int kGrid = 2048;
    auto f = [&](double phi) { return f_plus(r, phi) - delta; };
    for (const auto& [start, stop] : intervals) {
        if (!(stop > start)) continue;
        double prev_phi = start;
        double prev = f(start);
        if (std::abs(std::cos(2.0 * start)) >= 1e-12 && prev == 0.0) return start;
        for (int i = 1; i <= kGrid; ++i) {
            const double phi = start + (stop - start) * i / kGrid;
            if (std::abs(std::cos(2.0 * phi)) < 1e-12) continue;
            const double cur = f(phi);
            if (!std::isfinite(cur)) continue;
            if (cur == 0.0) return phi;
            const bool prev_ok = std::abs(std::cos(2.0 * prev_phi)) >= 1e-12 && std::isfinite(prev);
            if (prev_ok && (prev < 0.0) != (cur < 0.0)) {
                double left = prev_phi;
                double right = phi;
                double fl = prev;
                while (true) {
                    const double mid = 0.5 * (left + right);
                    if (mid <= left || mid >= right) break;
                    const double fm = f(mid);
                    if (fm == 0.0) return mid;
                    if ((fm < 0.0) == (fl < 0.0)) {
                        left = mid;
                        fl = fm;
                    } else {
                        right = mid;
                    }
                }
                return 0.5 * (left + right);
            }
            prev_phi = phi;
            prev = cur;
        }
    }
    return std::nullopt;
}

/// Factorizes a row (m1, m2) with arg(m1) - arg(m2) in [0, pi] using a rotation O.
inline L1Factorization factorize_rotation(cplx m1, cplx m2, double hbar) {
    constexpr double pi = std::numbers::pi;
    const double norm2 = std::norm(m1) + std::norm(m2);
    const double eta = clamp_unit(norm2 / hbar);
    const double amp = std::sqrt(norm2);
    double phi = 0.0;
    double theta = 0.0;
    double p = 0.0;
    if (std::abs(m2) <= 1e-14 * amp) {
        theta = 1.0;
        p = std::arg(m1);
    } else if (std::abs(m1) <= 1e-14 * amp) {
        theta = 0.0;
        p = std::arg(m2) + pi / 2.0;
    } else {
        const double r = std::norm(m1) / std::norm(m2);
        const double delta = wrap_pi(std::arg(m1) - std::arg(m2));
        if (std::abs(r - 1.0) <= 1e-9) {
            // Only phi = pi/4 reaches delta != pi/2 when |m1| = |m2|.
            phi = pi / 4.0;
        } else {
            const auto root = solve_phi(r, delta);
            if (!root) {
                throw Error(ErrorCode::NoRoot, "no bracket for delta = " + std::to_string(delta) +
                                                   ", r = " + std::to_string(r));
            }
            phi = *root;
        }
        // v = m O^T should equal amp e^{ip} (sqrt(theta), -i sqrt(1-theta)).
        const RealMatrix o = rotation(phi);
        const cplx v1 = m1 * o(0, 0) + m2 * o(0, 1);
        const cplx v2 = m1 * o(1, 0) + m2 * o(1, 1);
        theta = clamp_unit(std::norm(v1) / norm2);
        const double w1 = std::abs(v1);
        const double w2 = std::abs(v2);
        if (w1 <= 1e-14 * amp) {
            p = std::arg(v2) + pi / 2.0;
        } else if (w2 <= 1e-14 * amp) {
            p = std::arg(v1);
        } else {
            const double p1 = std::arg(v1);
            const double p2 = std::arg(v2) + pi / 2.0;
            p = p1 + 0.5 * wrap_pi(p2 - p1);
        }
    }
    L1Factorization out;
    out.b.eta = RealVector::Constant(1, eta);
    out.b.theta = RealVector::Constant(1, theta);
    out.b.s = ComplexMatrix::Constant(1, 1, std::exp(-kI * p));
    out.o = OrthoMatrix{rotation(phi), 1};
    out.phi = phi;
    return out;
}

}  // namespace detail

/// Factorizes a valid single-channel M into (B, O) with brep_o_to_mrep(B, O) = M.
///
/// For arg(m1) - arg(m2) in [0, pi], O is a rotation found by root bracketing
/// of F+_r; otherwise the second entry is negated and O carries a reflection.
inline L1Factorization mrep_to_brep_o_L1(const MRep& m, double tol = kDefaultTol) {
    if (m.channels() != 1) throw Error(ErrorCode::NotL1, "factorization needs L = 1");
    validate_mrep(m, tol);
    const cplx m1 = m.matrix(0, 0);
    const cplx m2 = m.matrix(0, 1);
    if (std::abs(m1) == 0.0 && std::abs(m2) == 0.0) {
        throw Error(ErrorCode::ZeroM, "M = 0 has no unique factorization");
    }
    const double delta = detail::wrap_pi(std::arg(m1) - std::arg(m2));
    const bool degenerate = std::abs(m1) == 0.0 || std::abs(m2) == 0.0;
    if (degenerate || delta >= 0.0) return detail::factorize_rotation(m1, m2, m.hbar);
    L1Factorization out = detail::factorize_rotation(m1, -m2, m.hbar);
    RealMatrix flip = RealMatrix::Identity(2, 2);
    flip(1, 1) = -1.0;
    out.o = OrthoMatrix{out.o.matrix * flip, -1};
    return out;
}

}  // namespace diffmon
