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

#include "paprx/channel/model.hpp"
#include "paprx/errors.hpp"
#include "paprx/numerics/fft.hpp"
#include "paprx/numerics/types.hpp"
#include "paprx/waveform/grid.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace paprx {

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }

/// Phase-preserving magnitude clip of every entry to radius r.
inline void proj_linf_ball_inplace(std::span<cplx> x, double r) {
    if (!(r >= 0.0)) throw ParameterError("proj_linf_ball: radius must be >= 0");
    for (auto& v : x) {
        const double a = std::abs(v);
        if (a > r) v *= r / a;
    }
}

inline std::vector<cplx> proj_linf_ball(std::span<const cplx> x, double r) {
    std::vector<cplx> out(x.begin(), x.end());
    proj_linf_ball_inplace(out, r);
    return out;
}

inline std::vector<cplx> proj_l2_ball(std::span<const cplx> x, std::span<const cplx> c, double r) {
    if (!(r >= 0.0)) throw ParameterError("proj_l2_ball: radius must be >= 0");
    if (x.size() != c.size()) throw SizingError("proj_l2_ball: centre and point differ in length");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += std::norm(x[i] - c[i]);
    const double d = std::sqrt(d2);
    std::vector<cplx> out(x.begin(), x.end());
    if (d <= r) return out;
    const double s = r / d;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = c[i] + s * (x[i] - c[i]);
    return out;
}

/// Time-domain peak bound per antenna.
struct PaprSetSpec {
    std::vector<double> gamma_par_db;
    std::vector<double> radius;
};

/// Guard-band energy bound per antenna.
struct AclrSetSpec {
    std::vector<double> psi_aclr_db;
    std::vector<double> radius;
};

/// Per antenna: to time domain, clip to radius, back to frequency.
/// Rows already inside the bound are copied through untouched.
inline ResourceGrid proj_papr_set(const ResourceGrid& grid, const PaprSetSpec& spec) {
    if (static_cast<Eigen::Index>(spec.radius.size()) != grid.n_tx()) {
        throw SizingError("proj_papr_set: one radius per antenna required");
    }
    const auto n = grid.total_bins();
    const FftPlan& plan = fft_plan(n);
    ResourceGrid out = grid;
    std::vector<cplx> buf(n);
    for (Eigen::Index j = 0; j < grid.n_tx(); ++j) {
        const auto row = row_span(grid.data, j);
        std::copy(row.begin(), row.end(), buf.begin());
        plan.inverse(buf);
        const double r = spec.radius[static_cast<std::size_t>(j)];
        bool inside = true;
        for (const auto& v : buf) {
            if (std::abs(v) > r) {
                inside = false;
                break;
            }
        }
        if (inside) continue;
        proj_linf_ball_inplace(buf, r);
        plan.forward(buf);
        auto dst = row_span(out.data, j);
        std::copy(buf.begin(), buf.end(), dst.begin());
    }
    return out;
}

/// Per antenna: guard columns projected onto the zero-centred l2 ball; active columns untouched.
inline ResourceGrid proj_aclr_set(const ResourceGrid& grid, const AclrSetSpec& spec) {
    if (static_cast<Eigen::Index>(spec.radius.size()) != grid.n_tx()) {
        throw SizingError("proj_aclr_set: one radius per antenna required");
    }
    ResourceGrid out = grid;
    const auto& guard = grid.layout.guard();
    for (Eigen::Index j = 0; j < grid.n_tx(); ++j) {
        double e = 0.0;
        for (std::size_t k : guard) e += std::norm(grid.data(j, static_cast<Eigen::Index>(k)));
        const double norm = std::sqrt(e);
        const double r = spec.radius[static_cast<std::size_t>(j)];
        if (norm <= r) continue;
        const double s = r / norm;
        for (std::size_t k : guard) out.data(j, static_cast<Eigen::Index>(k)) *= s;
    }
    return out;
}

inline std::vector<double> papr_radii(const ResourceGrid& reference, double gamma_par_db) {
    // Parseval: mean time-domain power of a row is its energy over the bin count.
    const double g = db_to_lin(gamma_par_db);
    std::vector<double> r(static_cast<std::size_t>(reference.n_tx()));
    for (Eigen::Index j = 0; j < reference.n_tx(); ++j) {
        const double mean = reference.data.row(j).squaredNorm() / static_cast<double>(reference.total_bins());
        if (!(mean > 0.0)) throw UndefinedMetric("PAPR radius undefined: reference antenna row has zero energy");
        r[static_cast<std::size_t>(j)] = std::sqrt(g * mean);
    }
    return r;
}

inline std::vector<double> aclr_radii(const ResourceGrid& reference, double psi_aclr_db) {
    const double p = db_to_lin(psi_aclr_db);
    std::vector<double> r(static_cast<std::size_t>(reference.n_tx()));
    for (Eigen::Index j = 0; j < reference.n_tx(); ++j) {
        double e = 0.0;
        for (std::size_t k : reference.layout.active()) e += std::norm(reference.data(j, static_cast<Eigen::Index>(k)));
        if (!(e > 0.0)) throw UndefinedMetric("ACLR radius undefined: reference antenna has zero in-band energy");
        r[static_cast<std::size_t>(j)] = std::sqrt(p * e);
    }
    return r;
}

inline PaprSetSpec papr_set_from(const ResourceGrid& reference, double gamma_par_db) {
    return {std::vector<double>(static_cast<std::size_t>(reference.n_tx()), gamma_par_db),
            papr_radii(reference, gamma_par_db)};
}

inline AclrSetSpec aclr_set_from(const ResourceGrid& reference, double psi_aclr_db) {
    return {std::vector<double>(static_cast<std::size_t>(reference.n_tx()), psi_aclr_db),
            aclr_radii(reference, psi_aclr_db)};
}

struct SetSpecs {
    PaprSetSpec papr;
    AclrSetSpec aclr;
};

inline SetSpecs update_set_radii(const ResourceGrid& reference, double gamma_par_db, double psi_aclr_db) {
    return {papr_set_from(reference, gamma_par_db), aclr_set_from(reference, psi_aclr_db)};
}

namespace detail {

inline void check_weights(const ResourceGrid& xbar, const ResourceGrid& x, const MitigationWeights& q) {
    if (xbar.data.rows() != x.data.rows() || xbar.data.cols() != x.data.cols()) {
        throw SizingError("grad_h: grid shapes differ");
    }
    if (q.n_active() != x.layout.n_active()) throw SizingError("grad_h: weights not defined on every active bin");
    if (q.n_active() > 0 && q.n_tx() != x.n_tx()) throw SizingError("grad_h: weight matrix size mismatch");
}

}  // namespace detail

/// Wirtinger gradient of the EVM mitigation term; d h = 2 Re<grad, dX>.
inline ComplexMatrix grad_h(const ResourceGrid& xbar, const ResourceGrid& x, const MitigationWeights& q, double zeta) {
    detail::check_weights(xbar, x, q);
    const ComplexMatrix d = xbar.data - x.data;
    ComplexMatrix g = zeta * d;
    const auto& active = x.layout.active();
    for (std::size_t p = 0; p < active.size(); ++p) {
        const auto k = static_cast<Eigen::Index>(active[p]);
        g.col(k).noalias() += q.q[p] * d.col(k);
    }
    return g;
}

inline double h_value(const ResourceGrid& xbar, const ResourceGrid& x, const MitigationWeights& q, double zeta) {
    detail::check_weights(xbar, x, q);
    const ComplexMatrix d = xbar.data - x.data;
    double v = zeta * d.squaredNorm();
    const auto& active = x.layout.active();
    for (std::size_t p = 0; p < active.size(); ++p) {
        const auto k = static_cast<Eigen::Index>(active[p]);
        const ComplexVector dk = d.col(k);
        v += (dk.adjoint() * q.q[p] * dk)(0, 0).real();
    }
    return v;
}

}  // namespace paprx
