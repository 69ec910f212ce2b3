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
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace paprx {

enum class FftDirection { forward, inverse };

/// Radix-2 decimation-in-time FFT with unitary (1/sqrt(N)) scaling in both
/// directions, so forward and inverse are adjoint and Parseval holds exactly.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n), scale_(1.0 / std::sqrt(static_cast<double>(n))) {
        if (!is_power_of_two(n)) {
            throw SizingError("FFT length " + std::to_string(n) + " is not a power of two");
        }
        bitrev_.resize(n);
        unsigned bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (unsigned b = 0; b < bits; ++b) {
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            }
            bitrev_[i] = r;
        }
        twiddle_.resize(n / 2 + 1);
        for (std::size_t k = 0; k < twiddle_.size(); ++k) {
            twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                              static_cast<double>(n));
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::span<cplx> data) const { transform(data, false); }
    void inverse(std::span<cplx> data) const { transform(data, true); }
    void apply(std::span<cplx> data, FftDirection dir) const {
        transform(data, dir == FftDirection::inverse);
    }

private:
    void transform(std::span<cplx> a, bool inverse) const {
        if (a.size() != n_) {
            throw SizingError("FFT plan of length " + std::to_string(n_) +
                              " applied to buffer of length " + std::to_string(a.size()));
        }
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j = bitrev_[i];
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t stride = n_ / len;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    cplx w = twiddle_[j * stride];
                    if (inverse) w = std::conj(w);
                    const cplx u = a[i + j];
                    const cplx v = a[i + j + half] * w;
                    a[i + j] = u + v;
                    a[i + j + half] = u - v;
                }
            }
        }
        for (auto& v : a) v *= scale_;
    }

    std::size_t n_;
    double scale_;
    std::vector<std::size_t> bitrev_;
    std::vector<cplx> twiddle_;
};

/// Per-thread plan cache; plans are immutable once built.
inline const FftPlan& fft_plan(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
    }
    return *it->second;
}

inline std::vector<cplx> fft_unitary(std::span<const cplx> x, FftDirection direction) {
    std::vector<cplx> out(x.begin(), x.end());
    fft_plan(out.size()).apply(out, direction);
    return out;
}

}  // namespace paprx
