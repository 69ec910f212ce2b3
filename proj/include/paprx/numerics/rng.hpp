// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "paprx/errors.hpp"
#include "paprx/numerics/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>
#include <vector>

namespace paprx {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// Keyed random stream: xoshiro256** whose 256-bit state is derived from
/// (seed, stream_id) through splitmix64. Equal keys give equal integer
/// sequences on every platform; distinct stream ids give unrelated states,
/// so each Monte-Carlo task can own its stream without coordination.
///
/// A stream is not thread-safe; give each concurrent task its own stream_id.
class RngStream {
public:
    using result_type = std::uint64_t;
    static constexpr std::string_view algorithm_name = "xoshiro256**/splitmix64";

    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::uint64_t sm = seed ^ detail::rotl(stream_id * 0xD1B54A32D192ED03ULL, 17);
        std::uint64_t mix = stream_id;
        sm ^= detail::splitmix64(mix);
        for (auto& s : state_) s = detail::splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Independent child stream, keyed on this stream's seed.
    RngStream derive(std::uint64_t child_id) const {
        std::uint64_t key = stream_id_;
        const std::uint64_t mixed = detail::splitmix64(key) ^ (child_id * 0x9E3779B97F4A7C15ULL);
        return RngStream(seed_, mixed);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return next(); }

    std::uint64_t next() {
        const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased by rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw ParameterError("uniform_int: empty range");
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    /// Standard circularly-symmetric complex Gaussian, E|z|^2 = 1 (Box-Muller).
    cplx complex_normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    /// Standard real Gaussian.
    double normal() { return complex_normal().real() * std::numbers::sqrt2; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_[4]{};
};

/// n i.i.d. CN(0, variance) samples; real and imaginary parts each carry variance/2.
inline std::vector<cplx> complex_gaussian(RngStream& rng, std::size_t n, double variance) {
    if (!(variance >= 0.0)) throw ParameterError("complex_gaussian: variance must be >= 0");
    std::vector<cplx> out(n);
    if (variance == 0.0) return out;
    const double s = std::sqrt(variance);
    for (auto& v : out) v = s * rng.complex_normal();
    return out;
}

/// Matrix of i.i.d. CN(0, variance) entries.
inline ComplexMatrix complex_gaussian_matrix(RngStream& rng, Eigen::Index rows, Eigen::Index cols,
                                             double variance) {
    if (!(variance >= 0.0)) throw ParameterError("complex_gaussian: variance must be >= 0");
    ComplexMatrix m = ComplexMatrix::Zero(rows, cols);
    if (variance == 0.0) return m;
    const double s = std::sqrt(variance);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * rng.complex_normal();
    return m;
}

}  // namespace paprx
