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

#include "support.hpp"

#include <gtest/gtest.h>

using namespace paprx;
using paprx::testing::random_grid;

TEST(BinLayout, CenteredBlock) {
    const auto l = BinLayout::centered(1024, 300);
    EXPECT_EQ(l.n_active(), 300u);
    EXPECT_EQ(l.active().front(), 362u);
    EXPECT_EQ(l.active().back(), 661u);
    EXPECT_EQ(l.guard().size(), 724u);
    EXPECT_TRUE(l.is_active(512));
    EXPECT_FALSE(l.is_active(0));
    EXPECT_EQ(l.active_position(362), 0);
    EXPECT_EQ(l.active_position(0), -1);
    EXPECT_THROW(BinLayout::centered(16, 0), ParameterError);
    EXPECT_THROW(BinLayout(8, {3, 2}), ParameterError);
}

TEST(Grid, TimeFrequencyRoundTrip) {
    RngStream rng(1, 0);
    const auto l = BinLayout::centered(64, 20);
    const auto g = random_grid(rng, 3, l, 0.1);
    const auto back = to_frequency(to_time(g), l);
    EXPECT_LT((back.data - g.data).norm(), 1e-12 * g.data.norm());
}

TEST(Grid, TimeSamplesMatchDirectInverseDft) {
    RngStream rng(1, 1);
    const auto l = BinLayout::centered(32, 10);
    const auto g = random_grid(rng, 2, l);
    const auto t = to_time(g);
    for (Eigen::Index j = 0; j < 2; ++j) {
        std::vector<cplx> row(g.data.cols());
        for (Eigen::Index k = 0; k < g.data.cols(); ++k) row[static_cast<std::size_t>(k)] = g.data(j, k);
        const auto ref = paprx::testing::direct_dft(row, true);
        for (Eigen::Index n = 0; n < 32; ++n) EXPECT_NEAR(std::abs(t.samples(n, j) - ref[static_cast<std::size_t>(n)]), 0.0, 1e-12);
    }
}

TEST(Papr, SingleToneIsZeroDb) {
    const auto l = BinLayout::centered(64, 8);
    const auto g = paprx::testing::single_tone_grid(2, l);
    const auto t = to_time(g);
    EXPECT_NEAR(papr_db(t, 0), 0.0, 1e-10);
    EXPECT_NEAR(papr_db_max(t), 0.0, 1e-10);
}

TEST(Papr, ImpulseIsTenLogN) {
    TimeSignal t{Eigen::MatrixXcd::Zero(256, 1)};
    t.samples(17, 0) = cplx(0.0, 3.0);
    EXPECT_NEAR(papr_db(t, 0), 10.0 * std::log10(256.0), 1e-12);
    const auto ip = ipapr_samples(t, 0);
    EXPECT_EQ(ip.size(), 256u);
}

TEST(Papr, ZeroSignalUndefined) {
    TimeSignal t{Eigen::MatrixXcd::Zero(16, 1)};
    EXPECT_THROW(papr_db(t, 0), UndefinedMetric);
    EXPECT_THROW(papr_db(t, 1), ParameterError);
}

TEST(Quantile, MatchesSortedInterpolation) {
    RngStream rng(2, 0);
    std::vector<double> v(101);
    for (auto& x : v) x = rng.normal();
    auto s = v;
    std::sort(s.begin(), s.end());
    EXPECT_DOUBLE_EQ(quantile(v, 0.0), s.front());
    EXPECT_DOUBLE_EQ(quantile(v, 1.0), s.back());
    EXPECT_DOUBLE_EQ(quantile(v, 0.5), s[50]);
    EXPECT_NEAR(quantile(v, 0.255), s[25] + 0.5 * (s[26] - s[25]), 1e-12);
    EXPECT_THROW(quantile({}, 0.5), ParameterError);
}

TEST(Evm, ScaledCopyGivesConstantEvm) {
    RngStream rng(3, 0);
    const auto l = BinLayout::centered(64, 16);
    const auto x = random_grid(rng, 2, l);
    ResourceGrid xb = x;
    xb.data *= 1.1;
    const auto e = tx_evm(xb, x);
    for (double v : e.per_k) EXPECT_NEAR(v, 0.1, 1e-12);
    EXPECT_NEAR(e.wideband, 0.1, 1e-12);
    EXPECT_TRUE(e.undefined.empty());
}

TEST(Evm, ZeroReferenceBinIsUndefined) {
    RngStream rng(3, 1);
    const auto l = BinLayout::centered(32, 8);
    auto x = random_grid(rng, 2, l);
    x.data.col(static_cast<Eigen::Index>(l.active()[3])).setZero();
    const auto e = tx_evm(x, x);
    ASSERT_EQ(e.undefined.size(), 1u);
    EXPECT_EQ(e.undefined[0], 3u);
    EXPECT_TRUE(std::isnan(e.per_k[3]));
    EXPECT_EQ(e.wideband, 0.0);
}

TEST(Evm, WidebandIsEnergyWeighted) {
    RngStream rng(3, 2);
    const auto l = BinLayout::centered(32, 8);
    const auto x = random_grid(rng, 3, l);
    const auto xb = random_grid(rng, 3, l);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k : l.active()) {
        num += (xb.data.col(static_cast<Eigen::Index>(k)) - x.data.col(static_cast<Eigen::Index>(k))).squaredNorm();
        den += x.data.col(static_cast<Eigen::Index>(k)).squaredNorm();
    }
    EXPECT_NEAR(tx_evm(xb, x).wideband, std::sqrt(num / den), 1e-12);
}

TEST(Evm, PredictedIgnoresChannelNullSpace) {
    RngStream rng(3, 3);
    const auto l = BinLayout::centered(32, 8);
    const auto x = random_grid(rng, 4, l);
    const auto h = paprx::testing::random_channel(rng, 2, 4, 8);
    ResourceGrid xb = x;
    for (std::size_t p = 0; p < 8; ++p) {
        Eigen::FullPivLU<ComplexMatrix> lu(h.h[p]);
        const ComplexMatrix null = lu.kernel();
        xb.data.col(static_cast<Eigen::Index>(l.active()[p])) += null * ComplexVector::Constant(null.cols(), cplx(0.7, -0.2));
    }
    EXPECT_GT(tx_evm(xb, x).wideband, 0.1);
    EXPECT_LT(predicted_evm(h, xb, x).wideband, 1e-12);
}

TEST(Evm, ShapeMismatchThrows) {
    RngStream rng(3, 4);
    const auto a = random_grid(rng, 2, BinLayout::centered(32, 8));
    const auto b = random_grid(rng, 3, BinLayout::centered(32, 8));
    EXPECT_THROW(tx_evm(a, b), SizingError);
}

TEST(Aclr, KnownRatio) {
    const auto l = BinLayout::centered(32, 8);
    ResourceGrid g = ResourceGrid::zeros(1, l);
    for (std::size_t k : l.active()) g.data(0, static_cast<Eigen::Index>(k)) = 1.0;
    EXPECT_EQ(aclr_db(g, 0), kAclrFloorDb);
    g.data(0, static_cast<Eigen::Index>(l.guard()[0])) = std::sqrt(8e-5);
    EXPECT_NEAR(aclr_db(g, 0), -50.0, 1e-9);
    EXPECT_NEAR(aclr_db_max(g), -50.0, 1e-9);
    ResourceGrid z = ResourceGrid::zeros(1, l);
    EXPECT_THROW(aclr_db(z, 0), UndefinedMetric);
}

TEST(Psd, BinsSumToMeanPower) {
    RngStream rng(4, 0);
    TimeSignal t{Eigen::MatrixXcd(512, 2)};
    for (Eigen::Index i = 0; i < t.samples.size(); ++i) t.samples.data()[i] = 0.5 * rng.complex_normal();
    const auto p = psd(t, 64, 1);
    ASSERT_EQ(p.size(), 64u);
    double lin = 0.0;
    for (double v : p) lin += std::pow(10.0, v / 10.0);
    EXPECT_NEAR(lin, t.samples.col(1).squaredNorm() / 512.0, 1e-9);
    EXPECT_THROW(psd(t, 1024, 0), SizingError);
}

TEST(Psd, SilentSignalHitsFloor) {
    TimeSignal t{Eigen::MatrixXcd::Zero(64, 1)};
    for (double v : psd(t, 16, 0)) EXPECT_EQ(v, kPsdFloorDb);
}

TEST(Window, RaisedCosineEdges) {
    TimeSignal t{Eigen::MatrixXcd::Constant(64, 1, cplx(1.0, 0.0))};
    const auto w = raised_cosine_window(t, 8);
    EXPECT_EQ(w.samples(0, 0), cplx(0.0, 0.0));
    EXPECT_EQ(w.samples(63, 0), cplx(0.0, 0.0));
    EXPECT_NEAR(w.samples(4, 0).real(), 0.5, 1e-15);
    for (int i = 8; i < 56; ++i) EXPECT_EQ(w.samples(i, 0), cplx(1.0, 0.0));
    EXPECT_THROW(raised_cosine_window(t, 16), ParameterError);
    EXPECT_EQ((raised_cosine_window(t, 0).samples - t.samples).norm(), 0.0);
}

TEST(Ccdf, MatchesCountingOracle) {
    RngStream rng(5, 0);
    std::vector<double> v(500);
    for (auto& x : v) x = 3.0 + rng.normal();
    const auto c = ccdf(v);
    EXPECT_EQ(c.exceed_prob.front(), 1.0);
    EXPECT_EQ(c.exceed_prob.back(), 0.0);
    for (std::size_t i = 0; i < c.thresholds_db.size(); i += 37) {
        std::size_t count = 0;
        for (double x : v) count += x > c.thresholds_db[i] ? 1 : 0;
        EXPECT_DOUBLE_EQ(c.exceed_prob[i], static_cast<double>(count) / 500.0);
    }
    for (std::size_t i = 1; i < c.exceed_prob.size(); ++i) EXPECT_LE(c.exceed_prob[i], c.exceed_prob[i - 1]);
    EXPECT_NEAR(c.thresholds_db[1] - c.thresholds_db[0], kCcdfStepDb, 1e-12);
    EXPECT_THROW(ccdf({}), ParameterError);
}

TEST(Concat, StacksSymbols) {
    TimeSignal a{Eigen::MatrixXcd::Constant(4, 2, cplx(1.0, 0.0))};
    TimeSignal b{Eigen::MatrixXcd::Constant(4, 2, cplx(2.0, 0.0))};
    const auto c = concat_symbols({a, b});
    EXPECT_EQ(c.n_samples(), 8);
    EXPECT_EQ(c.samples(5, 1), cplx(2.0, 0.0));
    TimeSignal d{Eigen::MatrixXcd::Zero(4, 3)};
    EXPECT_THROW(concat_symbols({a, d}), SizingError);
}
