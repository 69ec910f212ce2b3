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

// One OFDM symbol through the full chain: channel, RZF precoding, TOP-ADMM, metrics.

#include "paprx/paprx.hpp"

#include <cstdio>
#include <numbers>

int main() {
    using namespace paprx;

    const Eigen::Index n_tx = 16;
    const Eigen::Index n_rx = 2;
    const auto layout = BinLayout::centered(1024, 300);

    RngStream root(7, 0);
    RngStream ch_rng = root.derive(1);
    RngStream est_rng = root.derive(2);
    RngStream sym_rng = root.derive(3);

    auto profile = TdlProfile::exponential(30e-9, 12, 9.0);
    profile.los_aod_rad = 30.0 * std::numbers::pi / 180.0;
    profile.los_aoa_rad = 45.0 * std::numbers::pi / 180.0;
    const auto h = generate_channel(profile, n_tx, n_rx, layout.n_active(), ch_rng, 15e3);
    const auto h_est = prg_average(add_estimation_error(h, estimation_error_variance(5.0), est_rng), 24);

    const auto w = rzf_precoder(h_est, 0.001);
    const auto s = generate_symbols(n_rx, layout.n_active(), 8, sym_rng);
    const auto x0 = precode(s, w, layout);

    auto q = build_q(h_est, 0.001, 1.0);
    q = build_q(h_est, 0.001, 1.0 / q.max_eigenvalue());

    SolverConfig cfg = SolverConfig::defaults(Engine::topadmm);
    cfg.max_iters = 300;
    const auto res = solve(x0, q, cfg);
    const auto icf = icf_run(x0, cfg.gamma_par_db, 10);

    const auto report = [&](const char* name, const ResourceGrid& g) {
        const double est = estimated_evm(equalize(h, w, g).s_hat, s).wideband;
        std::printf("%-9s PAPR %6.2f dB  ACLR %8.2f dB  Tx EVM %6.2f %%  est. EVM %5.2f %%\n", name,
                    papr_db_max(to_time(g)), aclr_db_max(g), 100.0 * tx_evm(g, x0).wideband, 100.0 * est);
    };
    report("original", x0);
    report("topadmm", res.solution);
    report("icf", icf);
    std::printf("%d iterations, final primal residual %.2e\n", res.state.iter,
                res.state.residuals.primal.back() / x0.data.norm());
    return 0;
}
