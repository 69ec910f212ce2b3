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

#include "paprx/channel.hpp"
#include "paprx/harness/config.hpp"
#include "paprx/mimo.hpp"
#include "paprx/solvers.hpp"
#include "paprx/waveform.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace paprx {

inline constexpr const char* kVersion = "0.1.0";

struct TraceRow {
    int symbol = 0;
    int iter = 0;
    double primal = 0.0;
    double dual = 0.0;
    std::optional<MetricSnapshot> snap;
};

struct ScatterRow {
    int symbol;
    Eigen::Index layer;
    Eigen::Index k;
    cplx est;
    cplx ref;
};

/// Per-drop metrics, pooled over the drop's OFDM symbols.
struct DropRecord {
    int drop = 0;
    std::uint64_t stream_id = 0;
    bool ok = false;
    std::string error;
    std::vector<std::string> warnings;

    std::vector<double> papr_db;  // per antenna, worst symbol
    std::vector<double> aclr_db;  // per antenna, worst symbol
    double papr_db_max = 0.0;
    double aclr_db_max = 0.0;
    double x0_papr_db_max = 0.0;
    double txevm_wb = 0.0;
    double predevm_wb = 0.0;
    double estevm_wb = 0.0;
    std::vector<double> estevm_wb_layer;
    std::vector<double> txevm_k;
    std::vector<double> predevm_k;
    std::vector<double> estevm_lk;  // layer-major: layer * n_active + k
    std::optional<double> estevm_exceed_frac;
    std::size_t estevm_excluded = 0;

    double iterations = 0.0;  // mean over symbols
    double primal_final = 0.0;  // worst symbol, relative to ||x0||
    double dual_final = 0.0;
    double kkt_primal_gap = 0.0;
    double kkt_stationarity_u = 0.0;
    double kkt_stationarity_p = 0.0;
    double kkt_papr_slack_db = 0.0;  // worst antenna and symbol
    double kkt_aclr_slack_db = 0.0;

    std::optional<double> icf_papr_db_max;
    std::optional<double> icf_aclr_db_max;
    std::optional<double> icf_txevm_wb;
    std::optional<double> icf_predevm_wb;
    std::optional<double> icf_estevm_wb;

    std::vector<double> ipapr_solution;
    std::vector<double> ipapr_original;
    std::vector<double> ipapr_icf;
    std::vector<double> psd_solution;  // linear, averaged over antennas
    std::vector<double> psd_original;
    std::vector<double> psd_icf;

    std::vector<TraceRow> trace;
    std::vector<ScatterRow> scatter;
    std::optional<ChannelRealization> channel;
};

struct MetricsReport {
    ExperimentConfig config;
    std::vector<DropRecord> drops;
    double wall_time_s = 0.0;

    std::size_t n_ok() const {
        std::size_t n = 0;
        for (const auto& d : drops) n += d.ok ? 1 : 0;
        return n;
    }
};

namespace detail {

struct EvmPool {
    std::vector<double> err;
    std::vector<double> ref;

    void add(const EvmProfile& p) {
        if (err.empty()) {
            err.assign(p.err_energy.size(), 0.0);
            ref.assign(p.ref_energy.size(), 0.0);
        }
        for (std::size_t i = 0; i < err.size(); ++i) {
            err[i] += p.err_energy[i];
            ref[i] += p.ref_energy[i];
        }
    }
    std::vector<double> per_k() const {
        std::vector<double> out(err.size());
        for (std::size_t i = 0; i < err.size(); ++i) {
            out[i] = ref[i] > 0.0 ? std::sqrt(err[i] / ref[i]) : std::numeric_limits<double>::quiet_NaN();
        }
        return out;
    }
    double wideband() const {
        double e = 0.0;
        double r = 0.0;
        for (std::size_t i = 0; i < err.size(); ++i) {
            e += err[i];
            r += ref[i];
        }
        return r > 0.0 ? std::sqrt(e / r) : std::numeric_limits<double>::quiet_NaN();
    }
};

/// Estimated-EVM energies per (layer, k), pooled over symbols.
struct LayerPool {
    Eigen::MatrixXd err;
    Eigen::MatrixXd ref;
    std::size_t excluded = 0;
    std::size_t above = 0;
    std::size_t counted = 0;

    void add(const ComplexMatrix& s_hat, const SymbolGrid& s, std::optional<double> threshold_pct) {
        if (err.size() == 0) {
            err = Eigen::MatrixXd::Zero(s.s.rows(), s.s.cols());
            ref = Eigen::MatrixXd::Zero(s.s.rows(), s.s.cols());
        }
        for (Eigen::Index l = 0; l < s.s.rows(); ++l) {
            for (Eigen::Index p = 0; p < s.s.cols(); ++p) {
                const double r = std::norm(s.s(l, p));
                const cplx e = s_hat(l, p);
                if (!(r > 0.0) || !std::isfinite(e.real()) || !std::isfinite(e.imag())) {
                    ++excluded;
                    continue;
                }
                const double d = std::norm(e - s.s(l, p));
                err(l, p) += d;
                ref(l, p) += r;
                if (threshold_pct) {
                    ++counted;
                    if (100.0 * std::sqrt(d / r) > *threshold_pct) ++above;
                }
            }
        }
    }
    double wideband() const { return ref.sum() > 0.0 ? std::sqrt(err.sum() / ref.sum()) : std::numeric_limits<double>::quiet_NaN(); }
    double layer(Eigen::Index l) const {
        const double r = ref.row(l).sum();
        return r > 0.0 ? std::sqrt(err.row(l).sum() / r) : std::numeric_limits<double>::quiet_NaN();
    }
};

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

template <typename F>
double or_nan(F&& f) {
    try {
        return f();
    } catch (const UndefinedMetric&) {
        return nan();
    }
}

struct DropSetup {
    ChannelRealization h_true;
    ChannelRealization h_est;
    Precoder w;
    MitigationWeights q;
    BinLayout layout;
    RngStream symbol_rng;
};

inline DropSetup prepare_drop(const ExperimentConfig& cfg, RngStream& root, const ChannelRealization* imported) {
    const auto& ch = cfg.channel;
    RngStream ch_rng = root.derive(1);
    RngStream est_rng = root.derive(2);
    ChannelRealization h;
    if (imported) {
        h = *imported;
        if (h.n_tx() != cfg.array.n_tx || h.n_rx() != cfg.array.n_rx || h.n_active() != cfg.ofdm.n_active) {
            throw ValidationError("imported channel does not match array/ofdm dimensions");
        }
    } else {
        TdlProfile profile = TdlProfile::exponential(ch.delay_spread_ns * 1e-9, ch.n_taps, ch.k_factor);
        profile.los_aod_rad = ch.los_aod_deg * std::numbers::pi / 180.0;
        profile.los_aoa_rad = ch.los_aoa_deg * std::numbers::pi / 180.0;
        h = generate_channel(profile, cfg.array.n_tx, cfg.array.n_rx, cfg.ofdm.n_active, ch_rng,
                             cfg.ofdm.subcarrier_spacing_hz);
        const ChannelMetadata meta = h.meta;
        h = apply_spatial_correlation(h, exp_correlation_matrix(cfg.array.n_tx, ch.corr_tx),
                                      exp_correlation_matrix(cfg.array.n_rx, ch.corr_rx));
        h.meta = meta;
    }
    ChannelRealization h_est = h;
    if (ch.estimation_snr_db) h_est = add_estimation_error(h, estimation_error_variance(*ch.estimation_snr_db), est_rng);
    h_est = prg_average(h_est, ch.prg_subcarriers);

    Precoder w = rzf_precoder(h_est, cfg.rzf_alpha);
    MitigationWeights q;
    const auto& wt = cfg.weights;
    if (wt.csi_aware) {
        q = build_q(h_est, wt.nu, 1.0);
        double lambda = wt.lambda;
        if (wt.normalize_lipschitz) {
            const double top = q.max_eigenvalue();
            lambda = top > 0.0 ? 1.0 / top : 1.0;
        }
        q = build_q(h_est, wt.nu, lambda);
    } else {
        q = build_q(zero_channel(cfg.array.n_tx, cfg.array.n_rx, cfg.ofdm.n_active), wt.nu, wt.lambda);
    }
    return {std::move(h), std::move(h_est), std::move(w), std::move(q),
            BinLayout::centered(cfg.ofdm.fft_size, cfg.ofdm.n_active), root.derive(3)};
}

inline std::vector<double> mean_psd_linear(const std::vector<TimeSignal>& symbols, std::size_t segment,
                                           std::size_t rolloff) {
    std::vector<TimeSignal> windowed;
    windowed.reserve(symbols.size());
    for (const auto& s : symbols) windowed.push_back(raised_cosine_window(s, rolloff));
    const TimeSignal all = concat_symbols(windowed);
    std::vector<double> acc(segment, 0.0);
    for (Eigen::Index j = 0; j < all.n_tx(); ++j) {
        const auto p = psd(all, segment, j);
        for (std::size_t b = 0; b < segment; ++b) acc[b] += std::pow(10.0, p[b] / 10.0);
    }
    for (auto& v : acc) v /= static_cast<double>(all.n_tx());
    return acc;
}

inline void append_ipapr(std::vector<double>& dst, const TimeSignal& sig) {
    for (Eigen::Index j = 0; j < sig.n_tx(); ++j) {
        const auto v = ipapr_samples(sig, j);
        dst.insert(dst.end(), v.begin(), v.end());
    }
}

}  // namespace detail

inline DropRecord run_drop(const ExperimentConfig& cfg, int drop, const ChannelRealization* imported) {
    DropRecord rec;
    rec.drop = drop;
    rec.stream_id = cfg.run.stream_offset + static_cast<std::uint64_t>(drop);
    try {
        RngStream root(cfg.run.seed, rec.stream_id);
        detail::DropSetup setup = detail::prepare_drop(cfg, root, imported);
        if (cfg.channel.export_realizations) rec.channel = setup.h_true;

        const Eigen::Index n_tx = cfg.array.n_tx;
        const bool splitting = cfg.solver.engine != Engine::icf;
        const bool with_icf = splitting && cfg.run.compare_icf;
        rec.papr_db.assign(static_cast<std::size_t>(n_tx), -std::numeric_limits<double>::infinity());
        rec.aclr_db.assign(static_cast<std::size_t>(n_tx), kAclrFloorDb);
        rec.papr_db_max = -std::numeric_limits<double>::infinity();
        rec.aclr_db_max = kAclrFloorDb;
        rec.x0_papr_db_max = -std::numeric_limits<double>::infinity();
        rec.kkt_papr_slack_db = -std::numeric_limits<double>::infinity();
        rec.kkt_aclr_slack_db = -std::numeric_limits<double>::infinity();
        double icf_papr = -std::numeric_limits<double>::infinity();
        double icf_aclr = kAclrFloorDb;

        detail::EvmPool tx_pool, pred_pool, icf_tx_pool, icf_pred_pool;
        detail::LayerPool est_pool, icf_est_pool;
        std::vector<TimeSignal> t_sol, t_orig, t_icf;
        double iter_sum = 0.0;

        for (int sym = 0; sym < cfg.ofdm.symbols_per_drop; ++sym) {
            const SymbolGrid s = generate_symbols(cfg.array.n_layers, cfg.ofdm.n_active, cfg.ofdm.bits_per_symbol,
                                                  setup.symbol_rng);
            const ResourceGrid x0 = precode(s, setup.w, setup.layout);
            ResourceGrid sol;
            if (splitting) {
                const bool traced = cfg.run.trace_all_symbols || sym == 0;
                IterationObserver obs;
                if (traced && cfg.run.trace_every > 0) {
                    obs = [&](int it, const SolverState& st) -> std::optional<MetricSnapshot> {
                        if (it % cfg.run.trace_every != 0) return std::nullopt;
                        MetricSnapshot m;
                        m.iter = it;
                        m.papr_db_max = detail::or_nan([&] { return papr_db_max(to_time(st.zbar)); });
                        m.txevm_wb = detail::or_nan([&] { return tx_evm(st.zbar, x0).wideband; });
                        m.predevm_wb = detail::or_nan([&] { return predicted_evm(setup.h_true, st.zbar, x0).wideband; });
                        m.estevm_wb = detail::or_nan([&] {
                            return estimated_evm(equalize(setup.h_true, setup.w, st.zbar).s_hat, s).wideband;
                        });
                        m.aclr_db_max = detail::or_nan([&] { return aclr_db_max(st.zbar); });
                        return m;
                    };
                }
                SolverResult res = solve(x0, setup.q, cfg.solver, std::move(obs));
                sol = res.solution;
                for (auto& w : res.warnings) {
                    if (std::find(rec.warnings.begin(), rec.warnings.end(), w) == rec.warnings.end()) {
                        rec.warnings.push_back(std::move(w));
                    }
                }
                const double nx0 = x0.data.norm();
                const auto& tr = res.state.residuals;
                iter_sum += static_cast<double>(tr.size());
                rec.primal_final = std::max(rec.primal_final, tr.primal.back() / nx0);
                rec.dual_final = std::max(rec.dual_final, tr.dual.back() / nx0);
                if (traced) {
                    std::size_t snap_at = 0;
                    for (std::size_t i = 0; i < tr.size(); ++i) {
                        TraceRow row{sym, static_cast<int>(i + 1), tr.primal[i], tr.dual[i], std::nullopt};
                        if (snap_at < tr.snapshots.size() && tr.snapshots[snap_at].iter == row.iter) {
                            row.snap = tr.snapshots[snap_at++];
                        }
                        rec.trace.push_back(row);
                    }
                }
                const KktReport kkt = kkt_check(res.state, x0, setup.q, cfg.solver);
                rec.kkt_primal_gap = std::max(rec.kkt_primal_gap, kkt.primal_gap);
                rec.kkt_stationarity_u = std::max(rec.kkt_stationarity_u, kkt.stationarity_u);
                rec.kkt_stationarity_p = std::max(rec.kkt_stationarity_p, kkt.stationarity_p);
                for (double v : kkt.papr_slack_db) rec.kkt_papr_slack_db = std::max(rec.kkt_papr_slack_db, v);
                for (double v : kkt.aclr_slack_db) rec.kkt_aclr_slack_db = std::max(rec.kkt_aclr_slack_db, v);
            } else {
                sol = icf_run(x0, cfg.solver.gamma_par_db, cfg.icf_iters);
                iter_sum += cfg.icf_iters;
            }

            const TimeSignal ts = to_time(sol);
            const TimeSignal t0 = to_time(x0);
            for (Eigen::Index j = 0; j < n_tx; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                rec.papr_db[ju] = std::max(rec.papr_db[ju], papr_db(ts, j));
                rec.aclr_db[ju] = std::max(rec.aclr_db[ju], aclr_db(sol, j));
            }
            rec.x0_papr_db_max = std::max(rec.x0_papr_db_max, papr_db_max(t0));
            tx_pool.add(tx_evm(sol, x0));
            pred_pool.add(predicted_evm(setup.h_true, sol, x0));
            const EqualizedSymbols eq = equalize(setup.h_true, setup.w, sol);
            est_pool.add(eq.s_hat, s, cfg.weights.evm_threshold_pct);
            if (cfg.run.scatter) {
                for (Eigen::Index l = 0; l < s.s.rows(); ++l) {
                    for (Eigen::Index p = 0; p < s.s.cols(); ++p) rec.scatter.push_back({sym, l, p, eq.s_hat(l, p), s.s(l, p)});
                }
            }
            detail::append_ipapr(rec.ipapr_solution, ts);
            detail::append_ipapr(rec.ipapr_original, t0);
            t_sol.push_back(ts);
            t_orig.push_back(t0);

            if (with_icf) {
                const ResourceGrid icf = icf_run(x0, cfg.solver.gamma_par_db, cfg.icf_iters);
                const TimeSignal ti = to_time(icf);
                icf_papr = std::max(icf_papr, papr_db_max(ti));
                icf_aclr = std::max(icf_aclr, aclr_db_max(icf));
                icf_tx_pool.add(tx_evm(icf, x0));
                icf_pred_pool.add(predicted_evm(setup.h_true, icf, x0));
                icf_est_pool.add(equalize(setup.h_true, setup.w, icf).s_hat, s, std::nullopt);
                detail::append_ipapr(rec.ipapr_icf, ti);
                t_icf.push_back(ti);
            }
        }

        for (std::size_t j = 0; j < rec.papr_db.size(); ++j) {
            rec.papr_db_max = std::max(rec.papr_db_max, rec.papr_db[j]);
            rec.aclr_db_max = std::max(rec.aclr_db_max, rec.aclr_db[j]);
        }
        rec.txevm_k = tx_pool.per_k();
        rec.predevm_k = pred_pool.per_k();
        rec.txevm_wb = tx_pool.wideband();
        rec.predevm_wb = pred_pool.wideband();
        rec.estevm_wb = est_pool.wideband();
        rec.estevm_excluded = est_pool.excluded;
        for (Eigen::Index l = 0; l < est_pool.err.rows(); ++l) rec.estevm_wb_layer.push_back(est_pool.layer(l));
        rec.estevm_lk.reserve(static_cast<std::size_t>(est_pool.err.size()));
        for (Eigen::Index l = 0; l < est_pool.err.rows(); ++l) {
            for (Eigen::Index p = 0; p < est_pool.err.cols(); ++p) {
                const double r = est_pool.ref(l, p);
                rec.estevm_lk.push_back(r > 0.0 ? std::sqrt(est_pool.err(l, p) / r) : detail::nan());
            }
        }
        if (cfg.weights.evm_threshold_pct && est_pool.counted > 0) {
            rec.estevm_exceed_frac = static_cast<double>(est_pool.above) / static_cast<double>(est_pool.counted);
        }
        rec.iterations = iter_sum / cfg.ofdm.symbols_per_drop;
        if (!splitting) {
            rec.kkt_papr_slack_db = rec.papr_db_max - cfg.solver.gamma_par_db;
            rec.kkt_aclr_slack_db = rec.aclr_db_max - cfg.solver.psi_aclr_db;
        }
        if (with_icf) {
            rec.icf_papr_db_max = icf_papr;
            rec.icf_aclr_db_max = icf_aclr;
            rec.icf_txevm_wb = icf_tx_pool.wideband();
            rec.icf_predevm_wb = icf_pred_pool.wideband();
            rec.icf_estevm_wb = icf_est_pool.wideband();
        }
        const auto seg = cfg.run.psd_segment;
        const auto roll = cfg.run.window_rolloff_samples;
        rec.psd_solution = detail::mean_psd_linear(t_sol, seg, roll);
        rec.psd_original = detail::mean_psd_linear(t_orig, seg, roll);
        if (with_icf) rec.psd_icf = detail::mean_psd_linear(t_icf, seg, roll);
        rec.ok = true;
    } catch (const std::exception& e) {
        rec = DropRecord{};
        rec.drop = drop;
        rec.stream_id = cfg.run.stream_offset + static_cast<std::uint64_t>(drop);
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

inline MetricsReport run_experiment(const ExperimentConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    MetricsReport report;
    report.config = cfg;
    std::optional<ChannelRealization> imported;
    if (!cfg.channel.import_path.empty()) imported = load_channel(cfg.channel.import_path);
    const ChannelRealization* imp = imported ? &*imported : nullptr;

    report.drops.resize(static_cast<std::size_t>(cfg.run.drops));
    const int workers = std::max(1, std::min(cfg.run.workers, cfg.run.drops));
    if (workers == 1) {
        for (int d = 0; d < cfg.run.drops; ++d) report.drops[static_cast<std::size_t>(d)] = run_drop(cfg, d, imp);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int d = next++; d < cfg.run.drops; d = next++) {
                    report.drops[static_cast<std::size_t>(d)] = run_drop(cfg, d, imp);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

/// One report per value; every value gets its own block of stream ids.
inline std::vector<MetricsReport> sweep(const json& base, const std::string& param, const std::vector<json>& values) {
    if (!is_config_path(param)) throw ConfigError("unknown sweep parameter '" + param + "'");
    std::vector<MetricsReport> out;
    const ExperimentConfig base_cfg = config_from_json(base);
    for (std::size_t i = 0; i < values.size(); ++i) {
        json tree = base;
        if (tree.is_null()) tree = json::object();
        set_config_value(tree, param, values[i]);
        set_config_value(tree, "run.stream_offset",
                         base_cfg.run.stream_offset + (static_cast<std::uint64_t>(i) << 32));
        out.push_back(run_experiment(config_from_json(tree)));
    }
    return out;
}

}  // namespace paprx
