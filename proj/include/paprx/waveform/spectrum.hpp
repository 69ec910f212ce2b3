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
#include "paprx/waveform/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace paprx {

inline constexpr double kPsdFloorDb = -300.0;

/// Averaged periodogram over non-overlapping segments of one antenna, in dB
/// per bin. Bin powers sum to the mean sample power of the covered samples.
inline std::vector<double> psd(const TimeSignal& sig, std::size_t segment_len, Eigen::Index antenna) {
    if (antenna < 0 || antenna >= sig.n_tx()) throw ParameterError("psd: antenna index out of range");
    const auto n = static_cast<std::size_t>(sig.n_samples());
    if (segment_len == 0 || segment_len > n) {
        throw SizingError("psd: segment length " + std::to_string(segment_len) + " exceeds " +
                          std::to_string(n) + " samples");
    }
    const FftPlan& plan = fft_plan(segment_len);
    const std::size_t segments = n / segment_len;
    std::vector<double> acc(segment_len, 0.0);
    std::vector<cplx> buf(segment_len);
    for (std::size_t s = 0; s < segments; ++s) {
        for (std::size_t i = 0; i < segment_len; ++i) {
            buf[i] = sig.samples(static_cast<Eigen::Index>(s * segment_len + i), antenna);
        }
        plan.forward(buf);
        for (std::size_t b = 0; b < segment_len; ++b) acc[b] += std::norm(buf[b]);
    }
    const double norm = static_cast<double>(segments) * static_cast<double>(segment_len);
    for (auto& v : acc) {
        v /= norm;
        v = v > 0.0 ? std::max(kPsdFloorDb, 10.0 * std::log10(v)) : kPsdFloorDb;
    }
    return acc;
}

/// Raised-cosine edge taper: the first and last `rolloff_samples` samples are
/// weighted by 0.5·(1 − cos(π n / R)), starting at exactly 0. Interior samples
/// pass through unchanged.
inline TimeSignal raised_cosine_window(const TimeSignal& sig, std::size_t rolloff_samples) {
    const auto n = static_cast<std::size_t>(sig.n_samples());
    if (4 * rolloff_samples >= n && rolloff_samples > 0) {
        throw ParameterError("raised_cosine_window: rolloff must be shorter than a quarter symbol");
    }
    TimeSignal out = sig;
    for (std::size_t i = 0; i < rolloff_samples; ++i) {
        const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) /
                                               static_cast<double>(rolloff_samples)));
        out.samples.row(static_cast<Eigen::Index>(i)) *= w;
        out.samples.row(static_cast<Eigen::Index>(n - 1 - i)) *= w;
    }
    return out;
}

/// Stacks symbols back to back in time (all must have the same antenna count).
inline TimeSignal concat_symbols(const std::vector<TimeSignal>& symbols) {
    if (symbols.empty()) throw ParameterError("concat_symbols: no symbols");
    Eigen::Index rows = 0;
    for (const auto& s : symbols) {
        if (s.n_tx() != symbols.front().n_tx()) throw SizingError("concat_symbols: antenna counts differ");
        rows += s.n_samples();
    }
    TimeSignal out{Eigen::MatrixXcd(rows, symbols.front().n_tx())};
    Eigen::Index at = 0;
    for (const auto& s : symbols) {
        out.samples.middleRows(at, s.n_samples()) = s.samples;
        at += s.n_samples();
    }
    return out;
}

struct CcdfCurve {
    std::vector<double> thresholds_db;
    std::vector<double> exceed_prob;

    /// Smallest threshold at which the exceedance probability has dropped to `prob`.
    double level_at(double prob) const {
        for (std::size_t i = 0; i < exceed_prob.size(); ++i) {
            if (exceed_prob[i] <= prob) return thresholds_db[i];
        }
        return thresholds_db.back();
    }
};

inline constexpr double kCcdfStepDb = 0.01;

/// Empirical P(value > t) on a 0.01 dB grid covering one step beyond each end
/// of the data range.
inline CcdfCurve ccdf(const std::vector<double>& values_db) {
    if (values_db.empty()) throw ParameterError("ccdf: empty input");
    std::vector<double> sorted = values_db;
    std::sort(sorted.begin(), sorted.end());
    const double lo = std::floor(sorted.front() / kCcdfStepDb) * kCcdfStepDb - kCcdfStepDb;
    const double hi = sorted.back() + kCcdfStepDb;
    const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / kCcdfStepDb)) + 1;
    CcdfCurve c;
    c.thresholds_db.reserve(count);
    c.exceed_prob.reserve(count);
    const double total = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < count; ++i) {
        const double t = lo + static_cast<double>(i) * kCcdfStepDb;
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        c.thresholds_db.push_back(t);
        c.exceed_prob.push_back(static_cast<double>(above) / total);
    }
    return c;
}

}  // namespace paprx
