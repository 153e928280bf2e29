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

#include <cstdint>
#include <string>
#include <vector>

#include "diffmon/linalg.hpp"

namespace diffmon {

enum class SimMode { Nonlinear, Linear };

inline std::string to_string(SimMode m) { return m == SimMode::Linear ? "linear" : "nonlinear"; }

struct SimulationConfig {
    double dt = 1e-3;
    long steps = 1000;
    long n_traj = 1;
    std::uint64_t seed = 0;
    SimMode mode = SimMode::Nonlinear;
    long snapshot_stride = 0;        // 0 stores only the initial and final states
    unsigned threads = 1;
    std::uint32_t first_stream = 0;  // trajectory k uses stream first_stream + k
    bool record_currents = true;
    bool record_noise = true;
    bool record_purity = true;
    bool record_snapshots = true;
    double negativity_tol = -1.0;    // < 0 selects positivity_tolerance(model, dt)
    double log_weight_floor = -700.0;
};

/// One stochastic record. Row n of `currents`/`noise` covers [n dt, (n+1) dt).
struct Trajectory {
    std::uint32_t stream = 0;
    RealMatrix currents;                    // y = y_dt / dt, steps x 2L
    RealMatrix noise;                       // dw, steps x 2L
    RealVector purity;                      // after each step
    RealVector log_weight;                  // after each step; zero in nonlinear mode
    std::vector<ComplexMatrix> snapshots;   // normalized states at snapshot steps
    std::vector<double> snapshot_log_weights;
    double min_eigenvalue = 1.0;            // smallest eigenvalue seen along the path
};

struct Ensemble {
    SimulationConfig config;
    double hbar = 1.0;
    Eigen::Index dim = 0;
    Eigen::Index channels = 0;
    ComplexMatrix rho0;
    std::vector<long> snapshot_steps;
    std::vector<Trajectory> trajectories;
    std::string model_fingerprint = "none";
    std::string rep_fingerprint = "none";
};

inline std::vector<long> snapshot_schedule(long steps, long stride) {
    std::vector<long> out{0};
    if (stride > 0) {
        for (long n = stride; n < steps; n += stride) out.push_back(n);
    }
    if (steps > 0) out.push_back(steps);
    return out;
}

}  // namespace diffmon
