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
#include "paprx/numerics/rng.hpp"
#include "paprx/numerics/types.hpp"
#include "paprx/waveform/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace paprx {

/// Layer-by-subcarrier symbol matrix (n_layers x n_active).
struct SymbolGrid {
    ComplexMatrix s;
    int bits_per_symbol = 0;

    Eigen::Index n_layers() const { return s.rows(); }
    std::size_t n_active() const { return static_cast<std::size_t>(s.cols()); }
};

struct Precoder {
    std::vector<ComplexMatrix> w;  // per active position, n_tx x n_layers
    double alpha = 0.0;

    std::size_t n_active() const { return w.size(); }
};

namespace detail {

inline unsigned gray_to_binary(unsigned g) {
    unsigned b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

}  // namespace detail

/// Square Gray-mapped 2^Q-QAM alphabet with unit average energy, indexed by bit label.
inline std::vector<cplx> qam_alphabet(int bits_per_symbol) {
    if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6 && bits_per_symbol != 8) {
        throw ParameterError("unsupported QAM order: bits_per_symbol must be 2, 4, 6 or 8");
    }
    const int half = bits_per_symbol / 2;
    const unsigned m = 1u << half;
    const double scale = 1.0 / std::sqrt(2.0 * (static_cast<double>(m) * m - 1.0) / 3.0);
    std::vector<cplx> pts(static_cast<std::size_t>(m) * m);
    for (unsigned label = 0; label < pts.size(); ++label) {
        const unsigned i_bits = label >> half;
        const unsigned q_bits = label & (m - 1);
        const double i_lvl = 2.0 * detail::gray_to_binary(i_bits) - (m - 1.0);
        const double q_lvl = 2.0 * detail::gray_to_binary(q_bits) - (m - 1.0);
        pts[label] = scale * cplx(i_lvl, q_lvl);
    }
    return pts;
}

inline SymbolGrid generate_symbols(Eigen::Index n_layers, std::size_t n_active, int bits_per_symbol, RngStream& rng) {
    const auto alphabet = qam_alphabet(bits_per_symbol);
    if (n_layers <= 0 || n_active == 0) throw ParameterError("generate_symbols: empty symbol grid");
    SymbolGrid g{ComplexMatrix(n_layers, static_cast<Eigen::Index>(n_active)), bits_per_symbol};
    for (Eigen::Index l = 0; l < n_layers; ++l) {
        for (Eigen::Index p = 0; p < g.s.cols(); ++p) g.s(l, p) = alphabet[rng.uniform_int(alphabet.size())];
    }
    return g;
}

/// Un-normalized regularized zero-forcing precoder, one matrix per active subcarrier.
inline Precoder rzf_precoder(const ChannelRealization& h_est, double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("rzf_precoder: alpha must be finite and >= 0");
    if (h_est.n_rx() > h_est.n_tx()) throw ParameterError("rzf_precoder: more receive than transmit antennas");
    Precoder out;
    out.alpha = alpha;
    out.w.reserve(h_est.n_active());
    for (const auto& hk : h_est.h) {
        ComplexMatrix gram = hk * hk.adjoint();
        gram.diagonal().array() += alpha;
        Eigen::FullPivLU<ComplexMatrix> lu(gram);
        if (!lu.isInvertible()) throw SolverFailure("rzf_precoder: singular Gram matrix (use alpha > 0)");
        // W = H^H (H H^H + alpha I)^{-1}
        ComplexMatrix wk = lu.solve(hk).adjoint();
        if (!all_finite(wk)) throw SolverFailure("rzf_precoder: non-finite precoder");
        out.w.push_back(std::move(wk));
    }
    return out;
}

inline ResourceGrid precode(const SymbolGrid& s, const Precoder& w, const BinLayout& layout) {
    if (w.n_active() != s.n_active() || layout.n_active() != s.n_active()) {
        throw ParameterError("precode: symbol, precoder and layout disagree on active subcarrier count");
    }
    if (w.w.empty()) throw ParameterError("precode: empty precoder");
    const Eigen::Index n_tx = w.w.front().rows();
    ResourceGrid grid = ResourceGrid::zeros(n_tx, layout);
    const auto& active = layout.active();
    for (std::size_t p = 0; p < active.size(); ++p) {
        const auto& wk = w.w[p];
        if (wk.rows() != n_tx || wk.cols() != s.n_layers()) throw ParameterError("precode: precoder shape mismatch");
        grid.data.col(static_cast<Eigen::Index>(active[p])) = wk * s.s.col(static_cast<Eigen::Index>(p));
    }
    return grid;
}

struct EqualizedSymbols {
    ComplexMatrix s_hat;              // n_layers x n_active, NaN columns where undefined
    std::vector<std::size_t> undefined;  // active positions with rank-deficient effective channel
};

/// Zero-forcing detection on the effective channel H*W, noiseless reception of xbar.
inline EqualizedSymbols equalize(const ChannelRealization& h_true, const Precoder& w, const ResourceGrid& xbar) {
    const auto& active = xbar.layout.active();
    if (h_true.n_active() != active.size() || w.n_active() != active.size()) {
        throw SizingError("equalize: channel or precoder not defined on every active bin");
    }
    if (h_true.n_tx() != xbar.n_tx()) throw SizingError("equalize: channel transmit dimension mismatch");
    const Eigen::Index n_layers = w.w.empty() ? 0 : w.w.front().cols();
    EqualizedSymbols out{ComplexMatrix(n_layers, static_cast<Eigen::Index>(active.size())), {}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t p = 0; p < active.size(); ++p) {
        const auto col = static_cast<Eigen::Index>(p);
        const ComplexMatrix h_eff = h_true.h[p] * w.w[p];
        Eigen::ColPivHouseholderQR<ComplexMatrix> qr(h_eff);
        qr.setThreshold(1e-12);
        if (h_eff.rows() < n_layers || qr.rank() < n_layers) {
            out.s_hat.col(col).setConstant(cplx(nan, nan));
            out.undefined.push_back(p);
            continue;
        }
        const ComplexVector y = h_true.h[p] * xbar.data.col(static_cast<Eigen::Index>(active[p]));
        out.s_hat.col(col) = qr.solve(y);
    }
    return out;
}

struct EstimatedEvm {
    Eigen::MatrixXd per_lk;              // n_layers x n_active, NaN where excluded
    std::vector<double> wideband_per_layer;
    double wideband = 0.0;               // pooled over layers
    std::size_t excluded = 0;            // zero references plus undefined equalizer outputs
};

/// |s_hat - s| / |s| per (layer, k); wideband values are RMS error over RMS reference.
inline EstimatedEvm estimated_evm(const ComplexMatrix& s_hat, const SymbolGrid& s) {
    if (s_hat.rows() != s.s.rows() || s_hat.cols() != s.s.cols()) throw SizingError("estimated_evm: shape mismatch");
    EstimatedEvm out;
    out.per_lk.resize(s.s.rows(), s.s.cols());
    out.wideband_per_layer.assign(static_cast<std::size_t>(s.s.rows()), 0.0);
    double num_all = 0.0;
    double den_all = 0.0;
    for (Eigen::Index l = 0; l < s.s.rows(); ++l) {
        double num = 0.0;
        double den = 0.0;
        for (Eigen::Index p = 0; p < s.s.cols(); ++p) {
            const double ref = std::norm(s.s(l, p));
            const cplx est = s_hat(l, p);
            if (!(ref > 0.0) || !std::isfinite(est.real()) || !std::isfinite(est.imag())) {
                out.per_lk(l, p) = std::numeric_limits<double>::quiet_NaN();
                ++out.excluded;
                continue;
            }
            const double err = std::norm(est - s.s(l, p));
            out.per_lk(l, p) = std::sqrt(err / ref);
            num += err;
            den += ref;
        }
        if (!(den > 0.0)) throw UndefinedMetric("estimated EVM undefined: layer has no usable reference symbol");
        out.wideband_per_layer[static_cast<std::size_t>(l)] = std::sqrt(num / den);
        num_all += num;
        den_all += den;
    }
    out.wideband = std::sqrt(num_all / den_all);
    return out;
}

/// Scatter rows: layer, k, re(s_hat), im(s_hat), re(s), im(s).
inline void write_scatter_csv(const std::string& path, const ComplexMatrix& s_hat, const SymbolGrid& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.precision(17);
    out << "layer,k,re_est,im_est,re_ref,im_ref\n";
    for (Eigen::Index l = 0; l < s.s.rows(); ++l) {
        for (Eigen::Index p = 0; p < s.s.cols(); ++p) {
            out << l << ',' << p << ',' << s_hat(l, p).real() << ',' << s_hat(l, p).imag() << ','
                << s.s(l, p).real() << ',' << s.s(l, p).imag() << '\n';
        }
    }
}

}  // namespace paprx
