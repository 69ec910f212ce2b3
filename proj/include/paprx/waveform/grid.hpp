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
#include "paprx/numerics/fft.hpp"
#include "paprx/numerics/types.hpp"

#include <string>
#include <vector>

namespace paprx {

/// Partition of the ℓK transform bins into the active set 𝒯 and its
/// complement. Active bins form one contiguous block straddling the grid
/// centre: [ℓK/2 − ⌊|𝒯|/2⌋, ℓK/2 − ⌊|𝒯|/2⌋ + |𝒯|).
class BinLayout {
public:
    BinLayout() = default;

    static BinLayout centered(std::size_t total_bins, std::size_t n_active) {
        if (n_active == 0 || n_active > total_bins) {
            throw ParameterError("BinLayout: need 1 <= active bins <= total bins (got " +
                                 std::to_string(n_active) + " of " + std::to_string(total_bins) + ")");
        }
        const std::size_t first = total_bins / 2 - n_active / 2;
        std::vector<std::size_t> active(n_active);
        for (std::size_t p = 0; p < n_active; ++p) active[p] = first + p;
        return BinLayout(total_bins, std::move(active));
    }

    /// Arbitrary active set; indices must be strictly increasing and < total_bins.
    BinLayout(std::size_t total_bins, std::vector<std::size_t> active)
        : total_bins_(total_bins), active_(std::move(active)), position_(total_bins, -1) {
        if (active_.empty()) throw ParameterError("BinLayout: active set is empty");
        for (std::size_t p = 0; p < active_.size(); ++p) {
            if (active_[p] >= total_bins_ || (p > 0 && active_[p] <= active_[p - 1])) {
                throw ParameterError("BinLayout: active indices must be increasing and in range");
            }
            position_[active_[p]] = static_cast<long>(p);
        }
        for (std::size_t k = 0; k < total_bins_; ++k) {
            if (position_[k] < 0) guard_.push_back(k);
        }
    }

    std::size_t total_bins() const { return total_bins_; }
    std::size_t n_active() const { return active_.size(); }
    const std::vector<std::size_t>& active() const { return active_; }
    const std::vector<std::size_t>& guard() const { return guard_; }
    bool is_active(std::size_t k) const { return position_[k] >= 0; }
    /// Position of bin k inside the active set, or −1 for guard bins.
    long active_position(std::size_t k) const { return position_[k]; }

    bool operator==(const BinLayout& o) const {
        return total_bins_ == o.total_bins_ && active_ == o.active_;
    }

private:
    std::size_t total_bins_ = 0;
    std::vector<std::size_t> active_;
    std::vector<std::size_t> guard_;
    std::vector<long> position_;
};

/// Frequency-domain transmit matrix (N_T × ℓK) with its bin layout.
struct ResourceGrid {
    BinLayout layout;
    ComplexMatrix data;

    ResourceGrid() = default;
    ResourceGrid(BinLayout l, ComplexMatrix d) : layout(std::move(l)), data(std::move(d)) {
        if (static_cast<std::size_t>(data.cols()) != layout.total_bins()) {
            throw SizingError("ResourceGrid: data has " + std::to_string(data.cols()) +
                              " columns, layout has " + std::to_string(layout.total_bins()) + " bins");
        }
    }

    static ResourceGrid zeros(Eigen::Index n_tx, BinLayout l) {
        const auto bins = static_cast<Eigen::Index>(l.total_bins());
        return ResourceGrid(std::move(l), ComplexMatrix::Zero(n_tx, bins));
    }

    Eigen::Index n_tx() const { return data.rows(); }
    std::size_t total_bins() const { return layout.total_bins(); }
};

/// Time-domain samples, one column per antenna (ℓK × N_T, T̄ = Fᴴ X̄ᵀ).
struct TimeSignal {
    Eigen::MatrixXcd samples;

    Eigen::Index n_tx() const { return samples.cols(); }
    Eigen::Index n_samples() const { return samples.rows(); }
};

inline TimeSignal to_time(const ResourceGrid& grid) {
    const auto n = static_cast<std::size_t>(grid.data.cols());
    const FftPlan& plan = fft_plan(n);
    TimeSignal sig{Eigen::MatrixXcd(grid.data.cols(), grid.data.rows())};
    for (Eigen::Index j = 0; j < grid.data.rows(); ++j) {
        auto col = sig.samples.col(j);
        col = grid.data.row(j).transpose();
        plan.inverse(std::span<cplx>(col.data(), n));
    }
    return sig;
}

inline ResourceGrid to_frequency(const TimeSignal& sig, const BinLayout& layout) {
    const auto n = static_cast<std::size_t>(sig.samples.rows());
    if (n != layout.total_bins()) throw SizingError("to_frequency: sample count does not match layout");
    const FftPlan& plan = fft_plan(n);
    ResourceGrid grid = ResourceGrid::zeros(sig.samples.cols(), layout);
    for (Eigen::Index j = 0; j < sig.samples.cols(); ++j) {
        grid.data.row(j) = sig.samples.col(j).transpose();
        plan.forward(row_span(grid.data, j));
    }
    return grid;
}

}  // namespace paprx
