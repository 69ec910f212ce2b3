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
#include "paprx/numerics/linalg.hpp"
#include "paprx/numerics/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace paprx {

/// Tapped-delay-line power-delay profile. Tap powers sum to one (0 dB).
/// When `los_tap` is set, that tap is Ricean with factor `k_factor`
/// (linear; +inf gives a purely deterministic tap).
struct TdlProfile {
    std::string name = "tdl-exp";
    std::vector<double> tap_delays_s;
    std::vector<double> tap_powers_db;
    std::optional<std::size_t> los_tap;
    double k_factor = 0.0;
    double delay_spread_s = 0.0;
    /// Angles (rad) of the deterministic LOS array phase φ[r,t] = π(t·sin θ_tx − r·sin θ_rx).
    double los_aod_rad = std::numbers::pi / 6.0;
    double los_aoa_rad = std::numbers::pi / 4.0;

    /// Exponentially decaying profile: n_taps delays evenly spaced on
    /// [0, 4·delay_spread], power ∝ exp(−delay / delay_spread). A zero delay
    /// spread (or a single tap) collapses to one tap at delay 0.
    static TdlProfile exponential(double delay_spread_s, std::size_t n_taps, std::optional<double> k_factor) {
        if (!(delay_spread_s >= 0.0)) throw ParameterError("TdlProfile: delay spread must be >= 0");
        if (n_taps == 0) throw ParameterError("TdlProfile: need at least one tap");
        TdlProfile p;
        p.delay_spread_s = delay_spread_s;
        if (delay_spread_s == 0.0 || n_taps == 1) {
            p.tap_delays_s = {0.0};
            p.tap_powers_db = {0.0};
        } else {
            const double span = 4.0 * delay_spread_s;
            std::vector<double> lin(n_taps);
            double total = 0.0;
            for (std::size_t l = 0; l < n_taps; ++l) {
                const double d = span * static_cast<double>(l) / static_cast<double>(n_taps - 1);
                p.tap_delays_s.push_back(d);
                lin[l] = std::exp(-d / delay_spread_s);
                total += lin[l];
            }
            for (double v : lin) p.tap_powers_db.push_back(10.0 * std::log10(v / total));
        }
        if (k_factor) {
            if (!(*k_factor >= 0.0)) throw ParameterError("TdlProfile: K-factor must be >= 0");
            p.los_tap = 0;
            p.k_factor = *k_factor;
            p.name = "tdl-exp-los";
        }
        return p;
    }

    void validate() const {
        if (tap_delays_s.empty()) throw ParameterError("TdlProfile: empty profile");
        if (tap_delays_s.size() != tap_powers_db.size()) {
            throw ParameterError("TdlProfile: delay and power lists differ in length");
        }
        double total = 0.0;
        for (std::size_t l = 0; l < tap_delays_s.size(); ++l) {
            if (tap_delays_s[l] < 0.0 || (l > 0 && tap_delays_s[l] <= tap_delays_s[l - 1])) {
                throw ParameterError("TdlProfile: delays must be nonnegative and increasing");
            }
            total += std::pow(10.0, tap_powers_db[l] / 10.0);
        }
        if (std::abs(total - 1.0) > 1e-9) throw ParameterError("TdlProfile: tap powers must sum to 0 dB");
        if (los_tap && *los_tap >= tap_delays_s.size()) throw ParameterError("TdlProfile: LOS tap out of range");
        if (los_tap && !(k_factor >= 0.0)) throw ParameterError("TdlProfile: K-factor must be >= 0");
    }
};

/// Frequency response of a random TDL draw on `n_active` subcarriers centred
/// on DC with the given spacing. Every (rx, tx) pair fades independently.
inline ChannelRealization generate_channel(const TdlProfile& profile, Eigen::Index n_tx, Eigen::Index n_rx,
                                           std::size_t n_active, RngStream& rng,
                                           double subcarrier_spacing_hz = 15e3) {
    profile.validate();
    if (n_active == 0) throw ParameterError("generate_channel: need at least one active subcarrier");
    if (n_tx < 1 || n_rx < 1) throw ParameterError("generate_channel: antenna counts must be >= 1");

    const std::size_t taps = profile.tap_delays_s.size();
    std::vector<ComplexMatrix> tap_gain(taps, ComplexMatrix::Zero(n_rx, n_tx));
    for (std::size_t l = 0; l < taps; ++l) {
        const double amp = std::sqrt(std::pow(10.0, profile.tap_powers_db[l] / 10.0));
        const bool los = profile.los_tap && *profile.los_tap == l;
        const double k = profile.k_factor;
        const bool pure_los = los && std::isinf(k);
        const double los_amp = los ? (pure_los ? 1.0 : std::sqrt(k / (k + 1.0))) : 0.0;
        const double nlos_amp = los ? (pure_los ? 0.0 : std::sqrt(1.0 / (k + 1.0))) : 1.0;
        for (Eigen::Index r = 0; r < n_rx; ++r) {
            for (Eigen::Index t = 0; t < n_tx; ++t) {
                cplx g = nlos_amp * rng.complex_normal();
                if (los) {
                    const double phase = std::numbers::pi * (static_cast<double>(t) * std::sin(profile.los_aod_rad) -
                                                             static_cast<double>(r) * std::sin(profile.los_aoa_rad));
                    g += los_amp * std::polar(1.0, phase);
                }
                tap_gain[l](r, t) = amp * g;
            }
        }
    }

    ChannelRealization out;
    out.meta = {profile.name, profile.delay_spread_s, profile.los_tap ? profile.k_factor : 0.0, rng.seed(),
                rng.stream_id()};
    out.h.reserve(n_active);
    const double centre = static_cast<double>(n_active / 2);
    for (std::size_t p = 0; p < n_active; ++p) {
        const double f = (static_cast<double>(p) - centre) * subcarrier_spacing_hz;
        ComplexMatrix hk = ComplexMatrix::Zero(n_rx, n_tx);
        for (std::size_t l = 0; l < taps; ++l) {
            hk += tap_gain[l] * std::polar(1.0, -2.0 * std::numbers::pi * f * profile.tap_delays_s[l]);
        }
        out.h.push_back(std::move(hk));
    }
    return out;
}

/// Exponential correlation matrix, entry (p, q) = a^|p−q|.
inline ComplexMatrix exp_correlation_matrix(Eigen::Index n, double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("exp_correlation_matrix: coefficient outside [0, 1]");
    if (n < 1) throw ParameterError("exp_correlation_matrix: size must be >= 1");
    ComplexMatrix r(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) r(p, q) = std::pow(a, static_cast<double>(std::abs(p - q)));
    }
    return r;
}

/// Kronecker correlation H ← R_rx^{1/2} H (R_tx^{1/2})ᵀ on every subcarrier.
inline ChannelRealization apply_spatial_correlation(const ChannelRealization& h, const ComplexMatrix& r_tx,
                                                    const ComplexMatrix& r_rx) {
    if (r_tx.rows() != h.n_tx() || r_tx.cols() != h.n_tx() || r_rx.rows() != h.n_rx() || r_rx.cols() != h.n_rx()) {
        throw ParameterError("apply_spatial_correlation: correlation matrix shape does not match channel");
    }
    const ComplexMatrix a = hermitian_sqrt(r_rx);
    const ComplexMatrix bt = hermitian_sqrt(r_tx).transpose();
    ChannelRealization out = h;
    for (auto& hk : out.h) hk = a * hk * bt;
    return out;
}

/// Ĥ[k] = H[k] + ΔH[k] with ΔH entries i.i.d. CN(0, error_variance).
inline ChannelRealization add_estimation_error(const ChannelRealization& h, double error_variance, RngStream& rng) {
    if (!(error_variance >= 0.0)) throw ParameterError("add_estimation_error: variance must be >= 0");
    ChannelRealization out = h;
    if (error_variance == 0.0) return out;
    for (auto& hk : out.h) hk += complex_gaussian_matrix(rng, hk.rows(), hk.cols(), error_variance);
    return out;
}

/// Error variance matching an estimation SNR in dB: 10^(−snr/10).
inline double estimation_error_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

/// Replaces every matrix in a precoding resource group of `group_size`
/// consecutive active subcarriers by the group mean. A trailing short group
/// averages over its actual members.
inline ChannelRealization prg_average(const ChannelRealization& h, std::size_t group_size) {
    if (group_size == 0) throw ParameterError("prg_average: group size must be >= 1");
    ChannelRealization out = h;
    for (std::size_t start = 0; start < h.n_active(); start += group_size) {
        const std::size_t end = std::min(start + group_size, h.n_active());
        ComplexMatrix mean = ComplexMatrix::Zero(h.n_rx(), h.n_tx());
        for (std::size_t p = start; p < end; ++p) mean += h.h[p];
        mean /= static_cast<double>(end - start);
        for (std::size_t p = start; p < end; ++p) out.h[p] = mean;
    }
    return out;
}

/// All-zero channel with the given shape (non-CSI operation).
inline ChannelRealization zero_channel(Eigen::Index n_tx, Eigen::Index n_rx, std::size_t n_active) {
    ChannelRealization out;
    out.meta.profile_name = "none";
    out.h.assign(n_active, ComplexMatrix::Zero(n_rx, n_tx));
    return out;
}

/// Robust EVM-mitigation weights Q[k] = λ_k (Ĥ[k]ᴴĤ[k] + νI), one per active subcarrier.
struct MitigationWeights {
    std::vector<ComplexMatrix> q;
    double nu = 0.0;
    std::vector<double> lambda;

    std::size_t n_active() const { return q.size(); }
    Eigen::Index n_tx() const { return q.empty() ? 0 : q.front().rows(); }

    /// max_k λ_max(Q[k]).
    double max_eigenvalue() const {
        double m = 0.0;
        for (const auto& qk : q) m = std::max(m, lambda_max_psd(qk));
        return m;
    }
};

inline MitigationWeights build_q(const ChannelRealization& h_est, double nu, const std::vector<double>& lambda) {
    if (!(nu >= 0.0)) throw ParameterError("build_q: nu must be >= 0");
    if (lambda.size() != h_est.n_active()) throw SizingError("build_q: need one multiplier per active subcarrier");
    for (double l : lambda) {
        if (!(l >= 0.0)) throw ParameterError("build_q: multipliers must be >= 0");
    }
    MitigationWeights w;
    w.nu = nu;
    w.lambda = lambda;
    w.q.reserve(h_est.n_active());
    for (std::size_t p = 0; p < h_est.n_active(); ++p) {
        const auto& hk = h_est.h[p];
        ComplexMatrix qk = hk.adjoint() * hk;
        qk = 0.5 * (qk + qk.adjoint()).eval();
        qk.diagonal().array() += cplx(nu, 0.0);
        w.q.push_back(lambda[p] * qk);
    }
    return w;
}

inline MitigationWeights build_q(const ChannelRealization& h_est, double nu, double lambda = 1.0) {
    return build_q(h_est, nu, std::vector<double>(h_est.n_active(), lambda));
}

}  // namespace paprx
