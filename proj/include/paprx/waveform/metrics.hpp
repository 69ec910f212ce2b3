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

#include "paprx/channel/realization.hpp"
#include "paprx/errors.hpp"
#include "paprx/waveform/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace paprx {

inline constexpr double kAclrFloorDb = -200.0;

namespace detail {

inline void check_antenna(Eigen::Index antenna, Eigen::Index n_tx) {
    if (antenna < 0 || antenna >= n_tx) {
        throw ParameterError("antenna index " + std::to_string(antenna) + " out of range");
    }
}

inline double mean_power(const Eigen::MatrixXcd& samples, Eigen::Index antenna) {
    return samples.col(antenna).squaredNorm() / static_cast<double>(samples.rows());
}

}  // namespace detail

/// Per-sample power over mean power, in dB. The maximum equals papr_db.
inline std::vector<double> ipapr_samples(const TimeSignal& sig, Eigen::Index antenna) {
    detail::check_antenna(antenna, sig.n_tx());
    const double mean = detail::mean_power(sig.samples, antenna);
    if (!(mean > 0.0)) throw UndefinedMetric("IPAPR undefined: antenna signal is all zero");
    std::vector<double> out(static_cast<std::size_t>(sig.n_samples()));
    for (Eigen::Index n = 0; n < sig.n_samples(); ++n) {
        out[static_cast<std::size_t>(n)] = 10.0 * std::log10(std::norm(sig.samples(n, antenna)) / mean);
    }
    return out;
}

/// 10·log10(max |t|² / mean |t|²). Mean power (not the raw ℓ2 energy) is the
/// denominator, so a constant-modulus signal sits at 0 dB.
inline double papr_db(const TimeSignal& sig, Eigen::Index antenna) {
    const auto ip = ipapr_samples(sig, antenna);
    return *std::max_element(ip.begin(), ip.end());
}

/// Largest per-antenna PAPR.
inline double papr_db_max(const TimeSignal& sig) {
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < sig.n_tx(); ++j) worst = std::max(worst, papr_db(sig, j));
    return worst;
}

/// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw ParameterError("quantile of an empty sequence");
    if (prob < 0.0 || prob > 1.0) throw ParameterError("quantile probability outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

/// Per-subcarrier EVM over the active set plus RMS-aggregated wideband value.
/// Subcarriers whose reference energy is zero are NaN and listed in `undefined`.
struct EvmProfile {
    std::vector<double> per_k;
    std::vector<std::size_t> undefined;
    double wideband = 0.0;
    std::vector<double> err_energy;  // numerator per k, for pooling across symbols
    std::vector<double> ref_energy;
};

namespace detail {

inline void check_same_grid(const ResourceGrid& a, const ResourceGrid& b, const char* who) {
    if (a.data.rows() != b.data.rows() || a.data.cols() != b.data.cols()) {
        throw SizingError(std::string(who) + ": grid shapes differ");
    }
    if (!(a.layout == b.layout)) throw SizingError(std::string(who) + ": active sets differ");
}

template <typename ColumnFn>
EvmProfile evm_profile(std::size_t n_active, ColumnFn&& column) {
    EvmProfile out;
    out.per_k.resize(n_active);
    out.err_energy.resize(n_active);
    out.ref_energy.resize(n_active);
    double num_sum = 0.0;
    double den_sum = 0.0;
    for (std::size_t p = 0; p < n_active; ++p) {
        const auto [num2, den2] = column(p);
        out.err_energy[p] = num2;
        out.ref_energy[p] = den2;
        if (!(den2 > 0.0)) {
            out.per_k[p] = std::numeric_limits<double>::quiet_NaN();
            out.undefined.push_back(p);
            continue;
        }
        out.per_k[p] = std::sqrt(num2 / den2);
        num_sum += num2;
        den_sum += den2;
    }
    if (!(den_sum > 0.0)) throw UndefinedMetric("EVM undefined: reference has zero energy on every subcarrier");
    out.wideband = std::sqrt(num_sum / den_sum);
    return out;
}

}  // namespace detail

/// Transmit (unequalized) EVM: ‖x̄[:,k] − x[:,k]‖ / ‖x[:,k]‖ for k ∈ 𝒯.
inline EvmProfile tx_evm(const ResourceGrid& xbar, const ResourceGrid& x) {
    detail::check_same_grid(xbar, x, "tx_evm");
    const auto& active = x.layout.active();
    return detail::evm_profile(active.size(), [&](std::size_t p) {
        const auto k = static_cast<Eigen::Index>(active[p]);
        return std::pair{(xbar.data.col(k) - x.data.col(k)).squaredNorm(), x.data.col(k).squaredNorm()};
    });
}

/// Predicted received EVM through the channel: ‖H[k](x̄ − x)[:,k]‖ / ‖H[k]x[:,k]‖.
inline EvmProfile predicted_evm(const ChannelRealization& h, const ResourceGrid& xbar, const ResourceGrid& x) {
    detail::check_same_grid(xbar, x, "predicted_evm");
    const auto& active = x.layout.active();
    if (h.n_active() != active.size()) throw SizingError("predicted_evm: channel not defined on every active bin");
    if (h.n_tx() != x.n_tx()) throw SizingError("predicted_evm: channel has wrong transmit dimension");
    return detail::evm_profile(active.size(), [&](std::size_t p) {
        const auto k = static_cast<Eigen::Index>(active[p]);
        const ComplexVector ref = h.h[p] * x.data.col(k);
        const ComplexVector err = h.h[p] * (xbar.data.col(k) - x.data.col(k));
        return std::pair{err.squaredNorm(), ref.squaredNorm()};
    });
}

/// Guard-to-active energy ratio of one antenna row in dB (floored at −200 dB).
inline double aclr_db(const ResourceGrid& grid, Eigen::Index antenna) {
    detail::check_antenna(antenna, grid.n_tx());
    double active = 0.0;
    double guard = 0.0;
    for (std::size_t k : grid.layout.active()) active += std::norm(grid.data(antenna, static_cast<Eigen::Index>(k)));
    for (std::size_t k : grid.layout.guard()) guard += std::norm(grid.data(antenna, static_cast<Eigen::Index>(k)));
    if (!(active > 0.0)) throw UndefinedMetric("ACLR undefined: active band has zero energy");
    if (guard == 0.0) return kAclrFloorDb;
    return std::max(kAclrFloorDb, 10.0 * std::log10(guard / active));
}

inline double aclr_db_max(const ResourceGrid& grid) {
    double worst = kAclrFloorDb;
    for (Eigen::Index j = 0; j < grid.n_tx(); ++j) worst = std::max(worst, aclr_db(grid, j));
    return worst;
}

}  // namespace paprx
