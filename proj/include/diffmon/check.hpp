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

// Self-contained invariant suite run by the `check` subcommand.

#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "diffmon/dynamics.hpp"
#include "diffmon/factorize.hpp"
#include "diffmon/io.hpp"
#include "diffmon/reps.hpp"
#include "diffmon/sampling.hpp"
#include "diffmon/sme.hpp"
#include "diffmon/stats.hpp"

namespace diffmon::check {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;  // worst observed metric
    double limit = 0.0;
    std::string detail;
};

namespace detail {

inline ComplexMatrix sigma_minus() {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2);
    s(1, 0) = 1.0;  // basis order (e, g)
    return s;
}

inline ComplexMatrix sigma_z() {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2);
    s(0, 0) = 1.0;
    s(1, 1) = -1.0;
    return s;
}

inline ComplexMatrix sigma_x() {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2);
    s(0, 1) = s(1, 0) = 1.0;
    return s;
}

inline LindbladModel random_model(Rng& rng, Eigen::Index n, Eigen::Index l) {
    const ComplexMatrix g = sampling::complex_gaussian(rng, n, n);
    std::vector<ComplexMatrix> cs;
    for (Eigen::Index k = 0; k < l; ++k) cs.push_back(0.5 * sampling::complex_gaussian(rng, n, n));
    return LindbladModel(0.25 * (g + g.adjoint()), cs);
}

inline CheckResult bound(std::string name, double worst, double limit, std::string detail = "") {
    return CheckResult{std::move(name), worst <= limit, worst, limit, std::move(detail)};
}

}  // namespace detail

/// Expected purity after one nonlinear step, exact because the purity is a
/// quadratic polynomial of dw: E f = f(0) + 1/2 sum_j [f(h e_j) - 2 f(0) + f(-h e_j)]
/// with h = sqrt(dt).
inline double expected_one_step_purity(const LindbladModel& model, const MRep& m,
                                       const ComplexMatrix& rho, double dt) {
    const Eigen::Index d = m.matrix.cols();
    auto purity = [&](const RealVector& dw) {
        const ComplexMatrix r = sme_step_nonlinear(model, m, rho, dw, dt, INFINITY).rho;
        return (r * r).trace().real();
    };
    const double f0 = purity(RealVector::Zero(d));
    double e = f0;
    for (Eigen::Index j = 0; j < d; ++j) {
        RealVector dw = RealVector::Zero(d);
        dw(j) = std::sqrt(dt);
        const double fp = purity(dw);
        dw(j) = -std::sqrt(dt);
        const double fm = purity(dw);
        e += 0.5 * (fp - 2.0 * f0 + fm);
    }
    return e;
}

/// Runs every invariant with randomness derived from `seed`.
inline std::vector<CheckResult> run_all(std::uint64_t seed) {
    std::vector<CheckResult> out;
    Rng rng(seed, 101);
    auto guarded = [&](const std::string& name, const std::function<CheckResult()>& f) {
        try {
            out.push_back(f());
        } catch (const std::exception& e) {
            out.push_back(CheckResult{name, false, NAN, 0.0, std::string("exception: ") + e.what()});
        }
    };

    // linalg
    guarded("positive_sqrt(B B) = B", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const ComplexMatrix g = sampling::complex_gaussian(rng, 4, 4);
            const ComplexMatrix b = g * g.adjoint();
            const ComplexMatrix r = linalg::positive_sqrt(ComplexMatrix(b * b));
            worst = std::max(worst, (r - b).norm() / b.norm());
        }
        return detail::bound("positive_sqrt(B B) = B", worst, 1e-9);
    });
    guarded("polar recomposition", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const RealMatrix t = sampling::real_gaussian(rng, 4, 4);
            const auto pd = linalg::polar_decompose(t);
            worst = std::max(worst, (pd.p * pd.o - t).norm() / t.norm());
        }
        return detail::bound("polar recomposition", worst, 1e-9);
    });
    guarded("pseudo_inverse(O) = O^T", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const RealMatrix o = sampling::orthogonal(rng, 4);
            worst = std::max(worst, (linalg::pseudo_inverse(o) - o.transpose()).norm());
        }
        return detail::bound("pseudo_inverse(O) = O^T", worst, 1e-10);
    });

    // reps
    guarded("M-rep yields valid U", [&] {
        int failures = 0;
        for (Eigen::Index l = 1; l <= 3; ++l) {
            for (int s = 0; s < 100; ++s) {
                try {
                    validate_urep(mrep_to_urep(sampling::mrep(rng, l)), 1e-10);
                } catch (const Error&) {
                    ++failures;
                }
            }
        }
        return detail::bound("M-rep yields valid U", failures, 0, "failures out of 300");
    });
    guarded("B-rep U routes agree", [&] {
        double worst = 0.0;
        double worst_mm = 0.0;
        for (int s = 0; s < 100; ++s) {
            const BRep b = sampling::brep(rng, 1 + Eigen::Index(rng.index(3)));
            const double hbar = rng.uniform(0.5, 2.0);
            const MRep m = brep_to_mrep(b, hbar);
            worst = std::max(worst, (brep_to_urep(b, hbar).matrix - mrep_to_urep(m).matrix).norm());
            const ComplexMatrix diag = (hbar * b.eta).cast<cplx>().asDiagonal();
            worst_mm = std::max(worst_mm, (m.matrix * m.matrix.adjoint() - diag).cwiseAbs().maxCoeff());
        }
        std::ostringstream d;
        d << "M M^dag residual " << worst_mm;
        return CheckResult{"B-rep U routes agree", worst <= 1e-10 && worst_mm <= 1e-12, worst,
                           1e-10, d.str()};
    });
    guarded("L=1 factorization round trip", [&] {
        double worst = 0.0;
        for (int s = 0; s < 300; ++s) {
            const MRep m = sampling::mrep_with_eta(rng, RealVector::Constant(1, rng.uniform(0.01, 1.0)));
            const auto f = mrep_to_brep_o_L1(m);
            worst = std::max(worst, (brep_o_to_mrep(f.b, f.o, m.hbar).matrix - m.matrix).norm());
        }
        return detail::bound("L=1 factorization round trip", worst, 1e-8);
    });
    guarded("M^dag v = T^T (v; -i v)", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const MRep m = sampling::mrep(rng, 3);
            const ComplexVector v = sampling::complex_gaussian(rng, 3, 1);
            ComplexVector stacked(6);
            stacked << v, -kI * v;
            const ComplexVector lhs = m.matrix.adjoint() * v;
            const ComplexVector rhs = mrep_to_trep(m).matrix.transpose().cast<cplx>() * stacked;
            worst = std::max(worst, (lhs - rhs).norm());
        }
        return detail::bound("M^dag v = T^T (v; -i v)", worst, 1e-12);
    });
    guarded("T polar recomposition", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const TRep t = mrep_to_trep(sampling::mrep(rng, 2));
            const auto p = trep_polar(t);
            worst = std::max(worst, (p.root * p.o.matrix - t.matrix).norm());
        }
        return detail::bound("T polar recomposition", worst, 1e-10);
    });

    // dynamics
    guarded("Liouvillian traceless and Hermitian", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const auto model = detail::random_model(rng, 3, 2);
            const ComplexMatrix lr = liouvillian_apply(model, sampling::density_matrix(rng, 3));
            worst = std::max({worst, std::abs(lr.trace()), (lr - lr.adjoint()).norm()});
        }
        return detail::bound("Liouvillian traceless and Hermitian", worst, 1e-12);
    });
    guarded("two-level decay population", [&] {
        const LindbladModel model(ComplexMatrix::Zero(2, 2), {detail::sigma_minus()});
        ComplexMatrix rho0 = ComplexMatrix::Zero(2, 2);
        rho0(0, 0) = 1.0;
        const auto states = me_integrate(model, rho0, 1e-3, 3000);
        double worst = 0.0;
        for (size_t n = 0; n < states.size(); ++n) {
            worst = std::max(worst, std::abs(states[n](0, 0).real() - std::exp(-1e-3 * double(n))));
        }
        return detail::bound("two-level decay population", worst, 1e-8);
    });
    guarded("diffusion matrix invariant under M -> M O", [&] {
        double worst = 0.0;
        const HermitianBasis basis(3);
        for (int s = 0; s < 20; ++s) {
            const auto model = detail::random_model(rng, 3, 2);
            const MRep m = sampling::mrep(rng, 2);
            const MRep mo{m.hbar, m.matrix * sampling::orthogonal(rng, 4).cast<cplx>()};
            const ComplexMatrix rho = sampling::density_matrix(rng, 3);
            worst = std::max(worst, (diffusion_matrix(model, m, rho, basis) -
                                     diffusion_matrix(model, mo, rho, basis))
                                        .cwiseAbs()
                                        .maxCoeff());
        }
        return detail::bound("diffusion matrix invariant under M -> M O", worst, 1e-10);
    });
    guarded("predicted autocorrelation real and symmetric", [&] {
        double worst = 0.0;
        for (int s = 0; s < 5; ++s) {
            std::vector<ComplexMatrix> cs;
            for (int k = 0; k < 2; ++k) {
                const ComplexMatrix g = sampling::complex_gaussian(rng, 3, 3);
                cs.push_back(0.5 * (g + g.adjoint()));
            }
            const LindbladModel model(ComplexMatrix::Zero(3, 3), cs);
            const MRep m = sampling::mrep(rng, 2);
            const ComplexMatrix rho = ComplexMatrix::Identity(3, 3) / 3.0;
            for (const auto& c : predicted_autocorrelation(model, m, rho, {0.1, 0.5}, 1e-2)) {
                worst = std::max(worst, (c - c.transpose()).cwiseAbs().maxCoeff());
            }
        }
        return detail::bound("predicted autocorrelation real and symmetric", worst, 1e-10);
    });
    guarded("U-rep current mean matches M-rep", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const auto model = detail::random_model(rng, 3, 2);
            const MRep m = sampling::mrep(rng, 2);
            const ComplexMatrix rho = sampling::density_matrix(rng, 3);
            const RealVector via_u =
                urep_current_mean(model, mrep_to_urep(m), rho, mrep_to_trep(m).matrix);
            worst = std::max(worst, (via_u - mrep_current_mean(model, m, rho)).norm());
        }
        return detail::bound("U-rep current mean matches M-rep", worst, 1e-9);
    });

    // sme
    guarded("hbar I - M^dag M is PSD", [&] {
        double worst = 0.0;
        for (int s = 0; s < 300; ++s) {
            const MRep m = sampling::mrep(rng, 1 + Eigen::Index(rng.index(3)), rng.uniform(0.5, 2.0));
            const Eigen::Index n = m.matrix.cols();
            const ComplexMatrix z = m.hbar * ComplexMatrix::Identity(n, n) - m.matrix.adjoint() * m.matrix;
            worst = std::max(worst, -linalg::min_eigenvalue(z));
        }
        return detail::bound("hbar I - M^dag M is PSD", worst, 1e-10);
    });
    guarded("noise completion identity", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const MRep m = sampling::mrep(rng, 3);
            const ComplexMatrix l = noise_completion(m);
            const ComplexMatrix lhs = m.hbar * m.hbar * l * l.adjoint() + m.matrix.adjoint() * m.matrix;
            worst = std::max(worst, (lhs - m.hbar * ComplexMatrix::Identity(6, 6)).cwiseAbs().maxCoeff());
        }
        return detail::bound("noise completion identity", worst, 1e-12);
    });
    guarded("B-rep noise matrices", [&] {
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            const Eigen::Index l = 1 + Eigen::Index(rng.index(3));
            const BRep b = sampling::brep(rng, l);
            const double hbar = rng.uniform(0.5, 2.0);
            const auto nm = brep_noise_matrices(b, hbar);
            const ComplexMatrix sum = nm.j * nm.j.adjoint() / hbar + hbar * nm.v * nm.v.adjoint() +
                                      hbar * nm.a * nm.a.adjoint();
            worst = std::max(worst, (sum - ComplexMatrix::Identity(2 * l, 2 * l)).cwiseAbs().maxCoeff());
            worst = std::max(worst, (nm.j.adjoint() - brep_to_mrep(b, hbar).matrix).cwiseAbs().maxCoeff());
        }
        return detail::bound("B-rep noise matrices", worst, 1e-12);
    });
    guarded("nonlinear step preserves trace", [&] {
        double worst = 0.0;
        for (int s = 0; s < 50; ++s) {
            const auto model = detail::random_model(rng, 3, 2);
            const MRep m = sampling::mrep(rng, 2);
            const ComplexMatrix rho = sampling::density_matrix(rng, 3);
            RealVector dw(4);
            for (int j = 0; j < 4; ++j) dw(j) = 0.03 * rng.normal();
            const ComplexVector a = m.matrix.conjugate() * dw.cast<cplx>();
            const ComplexMatrix raw = rho + 1e-3 * liouvillian_apply(model, rho) +
                                      h_superop_apply(a, model.lindblads(), rho, false);
            worst = std::max(worst, std::abs(raw.trace() - 1.0));
        }
        return detail::bound("nonlinear step preserves trace", worst, 1e-12);
    });
    guarded("ideal measurement preserves purity", [&] {
        const LindbladModel model(0.5 * detail::sigma_x(), {detail::sigma_minus()});
        const double dt = 1e-3;
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            const ComplexVector psi = sampling::pure_state(rng, 2);
            const ComplexMatrix rho = psi * psi.adjoint();
            const MRep m = sampling::mrep_with_eta(rng, RealVector::Ones(1));
            worst = std::max(worst, std::abs(expected_one_step_purity(model, m, rho, dt) - 1.0));
        }
        const double limit = 10.0 * dt * dt * std::pow(rate_scale(model), 2);
        return detail::bound("ideal measurement preserves purity", worst, limit);
    });
    guarded("purity increment formula", [&] {
        const LindbladModel model(0.5 * detail::sigma_x(), {detail::sigma_minus()});
        const double dt = 1e-3;
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            const ComplexVector psi = sampling::pure_state(rng, 2);
            const ComplexMatrix rho = psi * psi.adjoint();
            const MRep m = sampling::mrep(rng, 1);
            const double measured = (expected_one_step_purity(model, m, rho, dt) - 1.0) / dt;
            worst = std::max(worst, std::abs(measured - purity_increment_predicted(model, m, rho)));
        }
        return detail::bound("purity increment formula", worst, 10.0 * dt);
    });

    // stats
    guarded("M = 0 ensemble equals master equation", [&] {
        const LindbladModel model(0.5 * detail::sigma_x(), {detail::sigma_minus()});
        ComplexMatrix rho0 = ComplexMatrix::Zero(2, 2);
        rho0(0, 0) = 1.0;
        SimulationConfig cfg;
        cfg.dt = 1e-3;
        cfg.steps = 500;
        cfg.n_traj = 3;
        cfg.seed = seed;
        cfg.snapshot_stride = 100;
        const MRep zero{1.0, ComplexMatrix::Zero(1, 2)};
        const Ensemble ens = simulate_ensemble(model, zero, rho0, cfg);
        const auto rep = convergence_report(ens, model);
        return detail::bound("M = 0 ensemble equals master equation", rep.max_trace_distance, 1e-14);
    });
    guarded("Wiener increment moments", [&] {
        const LindbladModel model(ComplexMatrix::Zero(2, 2), {detail::sigma_minus()});
        ComplexMatrix rho0 = ComplexMatrix::Zero(2, 2);
        rho0(1, 1) = 1.0;
        SimulationConfig cfg;
        cfg.dt = 1e-2;
        cfg.steps = 1000;
        cfg.n_traj = 50;
        cfg.seed = seed;
        const Ensemble ens = simulate_ensemble(model, make_homodyne(1.0), rho0, cfg);
        const auto rep = convergence_report(ens, model);
        const double dev = (rep.noise_covariance - RealMatrix::Identity(2, 2)).cwiseAbs().maxCoeff();
        return detail::bound("Wiener increment moments", dev, 0.05);
    });
    guarded("deterministic replay", [&] {
        const LindbladModel model(0.5 * detail::sigma_x(), {detail::sigma_minus()});
        ComplexMatrix rho0 = ComplexMatrix::Zero(2, 2);
        rho0(0, 0) = 1.0;
        SimulationConfig cfg;
        cfg.dt = 1e-3;
        cfg.steps = 200;
        cfg.n_traj = 4;
        cfg.seed = seed;
        const Ensemble a = simulate_ensemble(model, make_heterodyne(0.7), rho0, cfg);
        cfg.threads = 3;
        const Ensemble b = simulate_ensemble(model, make_heterodyne(0.7), rho0, cfg);
        const bool same = io::trajectory_csv(a) == io::trajectory_csv(b);
        return CheckResult{"deterministic replay", same, same ? 0.0 : 1.0, 0.0,
                           "single vs multi-threaded CSV"};
    });
    guarded("rep documents re-parse", [&] {
        int failures = 0;
        for (int s = 0; s < 20; ++s) {
            const BRep b = sampling::brep(rng, 2);
            const MRep m = brep_to_mrep(b);
            const auto docs = {io::to_json(m), io::to_json(mrep_to_urep(m)), io::to_json(mrep_to_trep(m)),
                               io::to_json(b, 1.0)};
            for (const auto& doc : docs) {
                try {
                    io::rep_from_json(io::parse_json(doc.dump(), "memory"), "memory");
                } catch (const Error&) {
                    ++failures;
                }
            }
        }
        return detail::bound("rep documents re-parse", failures, 0);
    });
    return out;
}

}  // namespace diffmon::check
