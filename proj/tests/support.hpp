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

// Shared fixtures and brute-force reference implementations for the test suites.

#pragma once

#include "paprx/paprx.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace paprx::testing {

/// O(N^2) unitary DFT.
inline std::vector<cplx> direct_dft(const std::vector<cplx>& x, bool inverse) {
    const std::size_t n = x.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            acc += x[t] * std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
        }
        out[k] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

inline std::vector<cplx> random_vector(RngStream& rng, std::size_t n, double scale = 1.0) {
    std::vector<cplx> v(n);
    for (auto& e : v) e = scale * rng.complex_normal();
    return v;
}

inline ComplexMatrix random_matrix(RngStream& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    return complex_gaussian_matrix(rng, rows, cols, scale * scale);
}

/// Random grid with Gaussian active bins and zero guard bins.
inline ResourceGrid random_grid(RngStream& rng, Eigen::Index n_tx, const BinLayout& layout, double guard_scale = 0.0) {
    ResourceGrid g = ResourceGrid::zeros(n_tx, layout);
    for (Eigen::Index j = 0; j < n_tx; ++j) {
        for (std::size_t k = 0; k < layout.total_bins(); ++k) {
            const double s = layout.is_active(k) ? 1.0 : guard_scale;
            if (s > 0.0) g.data(j, static_cast<Eigen::Index>(k)) = s * rng.complex_normal();
        }
    }
    return g;
}

inline ChannelRealization random_channel(RngStream& rng, Eigen::Index n_rx, Eigen::Index n_tx, std::size_t n_active) {
    ChannelRealization h;
    for (std::size_t p = 0; p < n_active; ++p) h.h.push_back(random_matrix(rng, n_rx, n_tx));
    return h;
}

inline ComplexMatrix random_psd(RngStream& rng, Eigen::Index n) {
    const ComplexMatrix a = random_matrix(rng, n, n);
    return a * a.adjoint();
}

/// Nearest point of the disc |z| <= r to x by polar grid search, zooming in on the winner.
inline cplx polar_grid_nearest(cplx x, double r, int cells = 64, int passes = 12) {
    double r_lo = 0.0;
    double r_hi = r;
    double th_lo = -std::numbers::pi;
    double th_hi = std::numbers::pi;
    cplx best = 0.0;
    double best_d = std::norm(x);
    double best_r = 0.0;
    double best_th = 0.0;
    for (int pass = 0; pass < passes; ++pass) {
        for (int i = 0; i <= cells; ++i) {
            const double rr = r_lo + (r_hi - r_lo) * i / cells;
            for (int a = 0; a <= cells; ++a) {
                const double th = th_lo + (th_hi - th_lo) * a / cells;
                const cplx z = std::polar(rr, th);
                const double d = std::norm(x - z);
                if (d < best_d) {
                    best_d = d;
                    best = z;
                    best_r = rr;
                    best_th = th;
                }
            }
        }
        const double dr = 2.0 * (r_hi - r_lo) / cells;
        const double dth = 2.0 * (th_hi - th_lo) / cells;
        r_lo = std::max(0.0, best_r - dr);
        r_hi = std::min(r, best_r + dr);
        th_lo = best_th - dth;
        th_hi = best_th + dth;
    }
    return best;
}

/// Projection onto {||y - c|| <= r} by bisection on the scale t in c + t (x - c).
inline std::vector<cplx> bisection_l2_projection(const std::vector<cplx>& x, const std::vector<cplx>& c, double r) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += std::norm(x[i] - c[i]);
    double lo = 0.0;
    double hi = 1.0;
    if (std::sqrt(d2) <= r) return x;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid * std::sqrt(d2) <= r) lo = mid; else hi = mid;
    }
    std::vector<cplx> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = c[i] + lo * (x[i] - c[i]);
    return out;
}

inline double vec_dist(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

/// Direct evaluation of the mitigation objective from its definition.
inline double objective_oracle(const ResourceGrid& xbar, const ResourceGrid& x, const MitigationWeights& q, double zeta) {
    double v = 0.0;
    const auto& active = x.layout.active();
    for (Eigen::Index j = 0; j < x.data.rows(); ++j) {
        for (Eigen::Index k = 0; k < x.data.cols(); ++k) v += zeta * std::norm(xbar.data(j, k) - x.data(j, k));
    }
    for (std::size_t p = 0; p < active.size(); ++p) {
        const auto k = static_cast<Eigen::Index>(active[p]);
        for (Eigen::Index a = 0; a < x.data.rows(); ++a) {
            for (Eigen::Index b = 0; b < x.data.rows(); ++b) {
                v += (std::conj(xbar.data(a, k) - x.data(a, k)) * q.q[p](a, b) * (xbar.data(b, k) - x.data(b, k))).real();
            }
        }
    }
    return v;
}

/// Grid whose antennas each carry one active tone: constant modulus in time, zero guard energy.
inline ResourceGrid single_tone_grid(Eigen::Index n_tx, const BinLayout& layout, double amplitude = 1.0) {
    ResourceGrid g = ResourceGrid::zeros(n_tx, layout);
    for (Eigen::Index j = 0; j < n_tx; ++j) {
        const auto k = layout.active()[static_cast<std::size_t>(j) % layout.n_active()];
        g.data(j, static_cast<Eigen::Index>(k)) = std::polar(amplitude, 0.3 * static_cast<double>(j + 1));
    }
    return g;
}

}  // namespace paprx::testing
