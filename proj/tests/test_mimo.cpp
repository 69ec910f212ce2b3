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

#include <bitset>

using namespace paprx;

TEST(Qam, QpskIsUnitModulus) {
    for (const auto& p : qam_alphabet(2)) EXPECT_NEAR(std::abs(p), 1.0, 1e-15);
}

TEST(Qam, AlphabetHasUnitMeanEnergy) {
    for (int bits : {2, 4, 6, 8}) {
        const auto a = qam_alphabet(bits);
        ASSERT_EQ(a.size(), std::size_t{1} << bits);
        double e = 0.0;
        for (const auto& p : a) e += std::norm(p);
        EXPECT_NEAR(e / static_cast<double>(a.size()), 1.0, 1e-12) << bits;
    }
}

TEST(Qam, GrayNeighboursDifferInOneBit) {
    for (int bits : {4, 6, 8}) {
        const auto a = qam_alphabet(bits);
        const double step = 2.0 / std::sqrt(2.0 * (std::pow(2.0, bits) - 1.0) / 3.0);
        for (unsigned i = 0; i < a.size(); ++i) {
            for (unsigned j = 0; j < a.size(); ++j) {
                if (std::abs(std::abs(a[i] - a[j]) - step) < 1e-9) {
                    EXPECT_EQ(std::bitset<8>(i ^ j).count(), 1u) << bits << " " << i << " " << j;
                }
            }
        }
    }
}

TEST(Qam, EmpiricalEnergy256) {
    RngStream rng(1, 0);
    const auto s = generate_symbols(1, 1000000, 8, rng);
    EXPECT_NEAR(s.s.squaredNorm() / 1e6, 1.0, 0.005);
}

TEST(Qam, SymbolsComeFromAlphabetAndRepeat) {
    RngStream a(2, 0);
    RngStream b(2, 0);
    const auto s1 = generate_symbols(2, 50, 6, a);
    const auto s2 = generate_symbols(2, 50, 6, b);
    EXPECT_EQ((s1.s - s2.s).norm(), 0.0);
    const auto alpha = qam_alphabet(6);
    for (Eigen::Index i = 0; i < s1.s.size(); ++i) {
        bool found = false;
        for (const auto& p : alpha) found = found || std::abs(p - s1.s.data()[i]) < 1e-15;
        EXPECT_TRUE(found);
    }
    RngStream c(2, 0);
    EXPECT_THROW(generate_symbols(1, 4, 3, c), ParameterError);
}

TEST(Rzf, IdentityChannel) {
    ChannelRealization h;
    h.h.push_back(ComplexMatrix::Identity(3, 3));
    const auto w = rzf_precoder(h, 0.001);
    EXPECT_LT((w.w[0] - ComplexMatrix::Identity(3, 3) / 1.001).norm(), 1e-14);
}

TEST(Rzf, ScalarChannel) {
    ChannelRealization h;
    const cplx hv(0.6, -0.8);
    h.h.push_back(ComplexMatrix::Constant(1, 1, hv));
    const auto w = rzf_precoder(h, 0.5);
    EXPECT_NEAR(std::abs(w.w[0](0, 0) - std::conj(hv) / (std::norm(hv) + 0.5)), 0.0, 1e-15);
}

TEST(Rzf, LargeAlphaIsScaledMatchedFilter) {
    RngStream rng(3, 0);
    const auto h = paprx::testing::random_channel(rng, 2, 8, 4);
    for (std::size_t p = 0; p < 4; ++p) {
        const double gram = (h.h[p] * h.h[p].adjoint()).norm();
        ChannelRealization one;
        one.h.push_back(h.h[p]);
        const double alpha = 100.0 * gram;
        const auto w = rzf_precoder(one, alpha);
        const ComplexMatrix mf = h.h[p].adjoint() / alpha;
        EXPECT_LT((w.w[0] - mf).norm(), 0.01 * mf.norm());
    }
}

TEST(Rzf, SingularWithoutRegularizationFails) {
    ChannelRealization h;
    h.h.push_back(ComplexMatrix::Zero(2, 4));
    EXPECT_THROW(rzf_precoder(h, 0.0), SolverFailure);
    EXPECT_THROW(rzf_precoder(h, -1.0), ParameterError);
    ChannelRealization tall;
    tall.h.push_back(ComplexMatrix::Ones(4, 2));
    EXPECT_THROW(rzf_precoder(tall, 0.1), ParameterError);
}

TEST(Precode, IdentityCarriesSymbols) {
    RngStream rng(4, 0);
    const auto l = BinLayout::centered(32, 6);
    const auto s = generate_symbols(2, 6, 4, rng);
    Precoder w;
    w.w.assign(6, ComplexMatrix::Identity(2, 2));
    const auto g = precode(s, w, l);
    for (std::size_t p = 0; p < 6; ++p) {
        EXPECT_EQ((g.data.col(static_cast<Eigen::Index>(l.active()[p])) - s.s.col(static_cast<Eigen::Index>(p))).norm(), 0.0);
    }
    for (std::size_t k : l.guard()) EXPECT_EQ(g.data.col(static_cast<Eigen::Index>(k)).norm(), 0.0);
}

TEST(Precode, MatchesMatrixVectorOracle) {
    RngStream rng(4, 1);
    const auto l = BinLayout::centered(64, 10);
    const auto h = paprx::testing::random_channel(rng, 2, 5, 10);
    const auto w = rzf_precoder(h, 0.001);
    const auto s = generate_symbols(2, 10, 8, rng);
    const auto g = precode(s, w, l);
    for (std::size_t p = 0; p < 10; ++p) {
        for (Eigen::Index t = 0; t < 5; ++t) {
            cplx acc = 0.0;
            for (Eigen::Index ly = 0; ly < 2; ++ly) acc += w.w[p](t, ly) * s.s(ly, static_cast<Eigen::Index>(p));
            EXPECT_NEAR(std::abs(g.data(t, static_cast<Eigen::Index>(l.active()[p])) - acc), 0.0, 1e-13);
        }
    }
    SymbolGrid zero{ComplexMatrix::Zero(2, 10), 8};
    EXPECT_EQ(precode(zero, w, l).data.norm(), 0.0);
    EXPECT_THROW(precode(s, w, BinLayout::centered(64, 11)), ParameterError);
}

class ReceiveChain : public ::testing::Test {
protected:
    void SetUp() override {
        RngStream rng(5, 0);
        h = paprx::testing::random_channel(rng, 2, 6, n);
        w = rzf_precoder(h, 0.001);
        s = generate_symbols(2, n, 8, rng);
        x = precode(s, w, layout);
    }
    std::size_t n = 12;
    BinLayout layout = BinLayout::centered(64, 12);
    ChannelRealization h;
    Precoder w;
    SymbolGrid s;
    ResourceGrid x;
};

TEST_F(ReceiveChain, DistortionFreeRecoversSymbols) {
    const auto eq = equalize(h, w, x);
    EXPECT_TRUE(eq.undefined.empty());
    EXPECT_LT((eq.s_hat - s.s).norm(), 1e-10);
    EXPECT_LT(estimated_evm(eq.s_hat, s).wideband, 1e-9);
}

TEST_F(ReceiveChain, NullSpaceDistortionIsInvisible) {
    RngStream rng(5, 1);
    ResourceGrid xb = x;
    for (std::size_t p = 0; p < n; ++p) {
        Eigen::FullPivLU<ComplexMatrix> lu(h.h[p]);
        const ComplexMatrix null = lu.kernel();
        xb.data.col(static_cast<Eigen::Index>(layout.active()[p])) += null * paprx::testing::random_matrix(rng, null.cols(), 1);
    }
    EXPECT_GT(tx_evm(xb, x).wideband, 0.5);
    const auto ev = estimated_evm(equalize(h, w, xb).s_hat, s);
    EXPECT_LT(ev.wideband, 1e-9);
}

TEST_F(ReceiveChain, RandomDistortionMatchesDefinition) {
    RngStream rng(5, 2);
    ResourceGrid xb = x;
    xb.data += 0.05 * paprx::testing::random_matrix(rng, x.data.rows(), x.data.cols());
    const auto eq = equalize(h, w, xb);
    const auto ev = estimated_evm(eq.s_hat, s);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const ComplexMatrix heff = h.h[p] * w.w[p];
        const ComplexMatrix g = (heff.adjoint() * heff).inverse() * heff.adjoint();
        const ComplexVector sh = g * h.h[p] * xb.data.col(static_cast<Eigen::Index>(layout.active()[p]));
        for (Eigen::Index l = 0; l < 2; ++l) {
            const double e = std::abs(sh(l) - s.s(l, static_cast<Eigen::Index>(p)));
            const double r = std::abs(s.s(l, static_cast<Eigen::Index>(p)));
            EXPECT_NEAR(ev.per_lk(l, static_cast<Eigen::Index>(p)), e / r, 1e-9);
            num += e * e;
            den += r * r;
        }
    }
    EXPECT_NEAR(ev.wideband, std::sqrt(num / den), 1e-9);
}

TEST_F(ReceiveChain, RankDeficientSubcarrierFlagged) {
    ChannelRealization bad = h;
    bad.h[3].setZero();
    const auto eq = equalize(bad, w, x);
    ASSERT_EQ(eq.undefined.size(), 1u);
    EXPECT_EQ(eq.undefined[0], 3u);
    const auto ev = estimated_evm(eq.s_hat, s);
    EXPECT_EQ(ev.excluded, 2u);
    EXPECT_TRUE(std::isnan(ev.per_lk(0, 3)));
}

TEST(EstimatedEvm, ScaledSymbolsGiveFivePointSixPercent) {
    RngStream rng(6, 0);
    const auto s = generate_symbols(2, 40, 8, rng);
    const ComplexMatrix sh = 1.056 * s.s;
    const auto ev = estimated_evm(sh, s);
    for (Eigen::Index i = 0; i < ev.per_lk.size(); ++i) EXPECT_NEAR(ev.per_lk.data()[i], 0.056, 1e-12);
    EXPECT_NEAR(ev.wideband, 0.056, 1e-12);
    EXPECT_NEAR(ev.wideband_per_layer[1], 0.056, 1e-12);
    EXPECT_EQ(estimated_evm(s.s, s).wideband, 0.0);
}

TEST(EstimatedEvm, ZeroReferenceExcluded) {
    SymbolGrid s{ComplexMatrix::Ones(1, 4), 2};
    s.s(0, 2) = 0.0;
    const auto ev = estimated_evm(ComplexMatrix::Constant(1, 4, cplx(1.1, 0.0)), s);
    EXPECT_EQ(ev.excluded, 1u);
    EXPECT_NEAR(ev.wideband, 0.1, 1e-12);
}
