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

// Counter-based random numbers. Every Gaussian increment is a pure function of
// (seed, stream, step, component), so replay does not depend on scheduling.

#pragma once

#include <boost/math/distributions/normal.hpp>

#include <array>
#include <cmath>
#include <cstdint>

#include "diffmon/linalg.hpp"

namespace diffmon {

/// Philox4x32-10 block function.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block apply(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = std::uint64_t(kM0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kM1) * ctr[2];
            const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
            const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Uniform on the open interval (0, 1) from 53 bits of two words.
inline double uniform_from_words(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t k = (std::uint64_t(a >> 5) << 26) | std::uint64_t(b >> 6);
    return (double(k) + 0.5) * 0x1.0p-53;
}

/// Standard normal by inverting the normal CDF.
inline double standard_normal_from_uniform(double u) {
    static const boost::math::normal_distribution<double> unit(0.0, 1.0);
    return boost::math::quantile(unit, u);
}

/// Wiener increments for one trajectory.
class NoiseSource {
public:
    NoiseSource(std::uint64_t base_seed, std::uint32_t stream_id)
        : key_{std::uint32_t(base_seed), std::uint32_t(base_seed >> 32)}, stream_(stream_id) {}

    std::uint32_t stream_id() const { return stream_; }
    std::uint64_t position() const { return step_; }

    /// Standard normal for (step, component).
    double normal(std::uint64_t step, std::uint32_t component) const {
        const Philox4x32::Block ctr = {component / 2, std::uint32_t(step),
                                       std::uint32_t(step >> 32), stream_};
        const auto out = Philox4x32::apply(ctr, key_);
        const unsigned w = (component % 2) * 2;
        return standard_normal_from_uniform(uniform_from_words(out[w], out[w + 1]));
    }

    /// Increments with covariance dt I for the given step.
    RealVector at(std::uint64_t step, Eigen::Index dim, double dt) const {
        RealVector dw(dim);
        const double s = std::sqrt(dt);
        for (Eigen::Index i = 0; i < dim; ++i) dw(i) = s * normal(step, std::uint32_t(i));
        return dw;
    }

    /// Increments for the next step in sequence.
    RealVector next(Eigen::Index dim, double dt) { return at(step_++, dim, dt); }

private:
    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint64_t step_ = 0;
};

inline RealVector draw_wiener(NoiseSource& source, Eigen::Index dim, double dt) {
    return source.next(dim, dt);
}

/// Sequential uniform/normal generator for sampling random test objects.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint32_t stream = 0)
        : key_{std::uint32_t(seed) ^ 0x3C6EF372u, std::uint32_t(seed >> 32) ^ 0xA54FF53Au},
          stream_(stream) {}

    double uniform() {
        refill_if_needed();
        const double u = uniform_from_words(buf_[pos_], buf_[pos_ + 1]);
        pos_ += 2;
        return u;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return standard_normal_from_uniform(uniform()); }
    cplx complex_normal() {
        const double re = normal();
        return cplx(re, normal()) * std::sqrt(0.5);
    }
    std::uint64_t index(std::uint64_t n) {
        return std::min(n - 1, static_cast<std::uint64_t>(uniform() * double(n)));
    }

private:
    void refill_if_needed() {
        if (pos_ < 4) return;
        buf_ = Philox4x32::apply({std::uint32_t(counter_), std::uint32_t(counter_ >> 32),
                                  stream_, 0xFFFFFFFFu},
                                 key_);
        ++counter_;
        pos_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint64_t counter_ = 0;
    Philox4x32::Block buf_{};
    unsigned pos_ = 4;
};

}  // namespace diffmon
