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

#include "paprx/harness/runner.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace paprx {

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest failed");
    }
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

inline std::string fmt_g17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json mean_of(const std::vector<const DropRecord*>& ok, double DropRecord::*field) {
    if (ok.empty()) return nullptr;
    double s = 0.0;
    for (const auto* d : ok) s += d->*field;
    return s / static_cast<double>(ok.size());
}

inline json max_of(const std::vector<const DropRecord*>& ok, double DropRecord::*field) {
    if (ok.empty()) return nullptr;
    double m = -std::numeric_limits<double>::infinity();
    for (const auto* d : ok) m = std::max(m, d->*field);
    return m;
}

inline json mean_opt(const std::vector<const DropRecord*>& ok, std::optional<double> DropRecord::*field) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto* d : ok) {
        if (d->*field) {
            s += *(d->*field);
            ++n;
        }
    }
    return n ? json(s / static_cast<double>(n)) : json(nullptr);
}

inline std::vector<double> pooled(const std::vector<const DropRecord*>& ok, std::vector<double> DropRecord::*field) {
    std::vector<double> all;
    for (const auto* d : ok) all.insert(all.end(), (d->*field).begin(), (d->*field).end());
    return all;
}

}  // namespace detail

/// Aggregates across successful drops; every value is recomputable from metrics.csv.
inline json summarize(const MetricsReport& r) {
    std::vector<const DropRecord*> ok;
    json failures = json::array();
    std::vector<std::string> warnings;
    for (const auto& d : r.drops) {
        if (d.ok) {
            ok.push_back(&d);
        } else {
            failures.push_back({{"drop", d.drop}, {"stream_id", d.stream_id}, {"error", d.error}});
        }
        for (const auto& w : d.warnings) {
            if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
        }
    }
    const auto& cfg = r.config;
    json meta = {
        {"code_version", kVersion},
        {"rng", std::string(RngStream::algorithm_name)},
        {"engine", to_string(cfg.solver.engine)},
        {"mode", to_string(cfg.solver.mode)},
        {"radius_anchor", to_string(cfg.solver.anchor)},
        {"equalizer", "zero-forcing on H*W, noiseless"},
        {"evm_aggregation", "rms error over rms reference"},
        {"channel_model", "exponential TDL with Kronecker correlation, static within a drop"},
        {"symbols_per_drop", cfg.ofdm.symbols_per_drop},
        {"drops_requested", cfg.run.drops},
        {"drops_ok", ok.size()},
        {"drops_failed", r.drops.size() - ok.size()},
        {"zero_drop", ok.empty()},
        {"failures", failures},
        {"warnings", warnings},
    };
    using detail::max_of;
    using detail::mean_of;
    using detail::mean_opt;
    json agg = {
        {"papr_db_max_mean", mean_of(ok, &DropRecord::papr_db_max)},
        {"papr_db_max_worst", max_of(ok, &DropRecord::papr_db_max)},
        {"aclr_db_max_mean", mean_of(ok, &DropRecord::aclr_db_max)},
        {"aclr_db_max_worst", max_of(ok, &DropRecord::aclr_db_max)},
        {"x0_papr_db_max_mean", mean_of(ok, &DropRecord::x0_papr_db_max)},
        {"txevm_wb_mean", mean_of(ok, &DropRecord::txevm_wb)},
        {"predevm_wb_mean", mean_of(ok, &DropRecord::predevm_wb)},
        {"estevm_wb_mean", mean_of(ok, &DropRecord::estevm_wb)},
        {"estevm_wb_worst", max_of(ok, &DropRecord::estevm_wb)},
        {"estevm_exceed_frac_mean", mean_opt(ok, &DropRecord::estevm_exceed_frac)},
        {"iterations_mean", mean_of(ok, &DropRecord::iterations)},
        {"primal_final_worst", max_of(ok, &DropRecord::primal_final)},
        {"dual_final_worst", max_of(ok, &DropRecord::dual_final)},
        {"kkt_primal_gap_worst", max_of(ok, &DropRecord::kkt_primal_gap)},
        {"kkt_stationarity_u_worst", max_of(ok, &DropRecord::kkt_stationarity_u)},
        {"kkt_stationarity_p_worst", max_of(ok, &DropRecord::kkt_stationarity_p)},
        {"kkt_papr_slack_db_worst", max_of(ok, &DropRecord::kkt_papr_slack_db)},
        {"kkt_aclr_slack_db_worst", max_of(ok, &DropRecord::kkt_aclr_slack_db)},
        {"icf_papr_db_max_mean", mean_opt(ok, &DropRecord::icf_papr_db_max)},
        {"icf_aclr_db_max_mean", mean_opt(ok, &DropRecord::icf_aclr_db_max)},
        {"icf_txevm_wb_mean", mean_opt(ok, &DropRecord::icf_txevm_wb)},
        {"icf_predevm_wb_mean", mean_opt(ok, &DropRecord::icf_predevm_wb)},
        {"icf_estevm_wb_mean", mean_opt(ok, &DropRecord::icf_estevm_wb)},
    };
    json layers = json::array();
    if (!ok.empty()) {
        for (std::size_t l = 0; l < ok.front()->estevm_wb_layer.size(); ++l) {
            double s = 0.0;
            for (const auto* d : ok) s += d->estevm_wb_layer[l];
            layers.push_back(s / static_cast<double>(ok.size()));
        }
    }
    agg["estevm_wb_layer_mean"] = layers;
    json levels = json::object();
    for (auto [name, field] : {std::pair{"solution", &DropRecord::ipapr_solution},
                               std::pair{"original", &DropRecord::ipapr_original},
                               std::pair{"icf", &DropRecord::ipapr_icf}}) {
        const auto all = detail::pooled(ok, field);
        if (all.empty()) continue;
        const CcdfCurve c = ccdf(all);
        levels[name] = {{"p1e-2", c.level_at(1e-2)}, {"p1e-3", c.level_at(1e-3)}, {"p1e-4", c.level_at(1e-4)}};
    }
    agg["ipapr_ccdf_level_db"] = levels;
    return {{"format", "paprx-summary/1"}, {"config", cfg.source}, {"metadata", meta}, {"aggregate", agg}};
}

namespace detail {

inline void put(std::ostringstream& os, int drop, const char* metric, std::size_t index, double v) {
    os << drop << ',' << metric << ',' << index << ',' << fmt_g17(v) << '\n';
}

inline void put_vec(std::ostringstream& os, int drop, const char* metric, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) put(os, drop, metric, i, v[i]);
}

inline void put_opt(std::ostringstream& os, int drop, const char* metric, const std::optional<double>& v) {
    if (v) put(os, drop, metric, 0, *v);
}

}  // namespace detail

/// Long format: drop, metric, index, value. Failed drops carry no rows.
inline std::string metrics_csv(const MetricsReport& r) {
    std::ostringstream os;
    os << "drop,metric,index,value\n";
    using detail::put;
    using detail::put_opt;
    using detail::put_vec;
    for (const auto& d : r.drops) {
        if (!d.ok) continue;
        put_vec(os, d.drop, "papr_db", d.papr_db);
        put_vec(os, d.drop, "aclr_db", d.aclr_db);
        put(os, d.drop, "papr_db_max", 0, d.papr_db_max);
        put(os, d.drop, "aclr_db_max", 0, d.aclr_db_max);
        put(os, d.drop, "x0_papr_db_max", 0, d.x0_papr_db_max);
        put(os, d.drop, "txevm_wb", 0, d.txevm_wb);
        put(os, d.drop, "predevm_wb", 0, d.predevm_wb);
        put(os, d.drop, "estevm_wb", 0, d.estevm_wb);
        put_vec(os, d.drop, "estevm_wb_layer", d.estevm_wb_layer);
        put_vec(os, d.drop, "txevm_k", d.txevm_k);
        put_vec(os, d.drop, "predevm_k", d.predevm_k);
        put_vec(os, d.drop, "estevm_lk", d.estevm_lk);
        put(os, d.drop, "estevm_excluded", 0, static_cast<double>(d.estevm_excluded));
        put_opt(os, d.drop, "estevm_exceed_frac", d.estevm_exceed_frac);
        put(os, d.drop, "iterations", 0, d.iterations);
        put(os, d.drop, "primal_final", 0, d.primal_final);
        put(os, d.drop, "dual_final", 0, d.dual_final);
        put(os, d.drop, "kkt_primal_gap", 0, d.kkt_primal_gap);
        put(os, d.drop, "kkt_stationarity_u", 0, d.kkt_stationarity_u);
        put(os, d.drop, "kkt_stationarity_p", 0, d.kkt_stationarity_p);
        put(os, d.drop, "kkt_papr_slack_db", 0, d.kkt_papr_slack_db);
        put(os, d.drop, "kkt_aclr_slack_db", 0, d.kkt_aclr_slack_db);
        put_opt(os, d.drop, "icf_papr_db_max", d.icf_papr_db_max);
        put_opt(os, d.drop, "icf_aclr_db_max", d.icf_aclr_db_max);
        put_opt(os, d.drop, "icf_txevm_wb", d.icf_txevm_wb);
        put_opt(os, d.drop, "icf_predevm_wb", d.icf_predevm_wb);
        put_opt(os, d.drop, "icf_estevm_wb", d.icf_estevm_wb);
    }
    return os.str();
}

inline std::string trace_csv(const MetricsReport& r) {
    std::ostringstream os;
    os << "drop,symbol,iter,primal,dual,papr_db_max,txevm_wb,predevm_wb,estevm_wb,aclr_db_max\n";
    for (const auto& d : r.drops) {
        for (const auto& t : d.trace) {
            os << d.drop << ',' << t.symbol << ',' << t.iter << ',' << fmt_g17(t.primal) << ',' << fmt_g17(t.dual);
            if (t.snap) {
                os << ',' << fmt_g17(t.snap->papr_db_max) << ',' << fmt_g17(t.snap->txevm_wb) << ','
                   << fmt_g17(t.snap->predevm_wb) << ',' << fmt_g17(t.snap->estevm_wb) << ','
                   << fmt_g17(t.snap->aclr_db_max);
            } else {
                os << ",,,,,";
            }
            os << '\n';
        }
    }
    return os.str();
}

inline std::string ccdf_csv(const MetricsReport& r) {
    std::ostringstream os;
    os << "curve,threshold_db,exceed_prob\n";
    std::vector<const DropRecord*> ok;
    for (const auto& d : r.drops) {
        if (d.ok) ok.push_back(&d);
    }
    for (auto [name, field] : {std::pair{"solution", &DropRecord::ipapr_solution},
                               std::pair{"original", &DropRecord::ipapr_original},
                               std::pair{"icf", &DropRecord::ipapr_icf}}) {
        const auto all = detail::pooled(ok, field);
        if (all.empty()) continue;
        const CcdfCurve c = ccdf(all);
        for (std::size_t i = 0; i < c.thresholds_db.size(); ++i) {
            os << name << ',' << fmt_g17(c.thresholds_db[i]) << ',' << fmt_g17(c.exceed_prob[i]) << '\n';
        }
    }
    return os.str();
}

/// Mean over drops and antennas; freq_norm is (b - N/2)/N, i.e. relative to the centre of the active block.
inline std::string psd_csv(const MetricsReport& r) {
    std::ostringstream os;
    os << "curve,bin,freq_norm,psd_db\n";
    for (auto [name, field] : {std::pair{"solution", &DropRecord::psd_solution},
                               std::pair{"original", &DropRecord::psd_original},
                               std::pair{"icf", &DropRecord::psd_icf}}) {
        std::vector<double> acc;
        std::size_t n = 0;
        for (const auto& d : r.drops) {
            const auto& v = d.*field;
            if (!d.ok || v.empty()) continue;
            if (acc.empty()) acc.assign(v.size(), 0.0);
            for (std::size_t b = 0; b < v.size(); ++b) acc[b] += v[b];
            ++n;
        }
        if (n == 0) continue;
        const auto len = static_cast<double>(acc.size());
        for (std::size_t b = 0; b < acc.size(); ++b) {
            const double p = acc[b] / static_cast<double>(n);
            const double f = (static_cast<double>(b) - len / 2.0) / len;
            const double db = p > 0.0 ? std::max(kPsdFloorDb, 10.0 * std::log10(p)) : kPsdFloorDb;
            os << name << ',' << b << ',' << fmt_g17(f) << ',' << fmt_g17(db) << '\n';
        }
    }
    return os.str();
}

inline std::string scatter_csv(const MetricsReport& r) {
    std::ostringstream os;
    os << "drop,symbol,layer,k,re_est,im_est,re_ref,im_ref\n";
    for (const auto& d : r.drops) {
        for (const auto& s : d.scatter) {
            os << d.drop << ',' << s.symbol << ',' << s.layer << ',' << s.k << ',' << fmt_g17(s.est.real()) << ','
               << fmt_g17(s.est.imag()) << ',' << fmt_g17(s.ref.real()) << ',' << fmt_g17(s.ref.imag()) << '\n';
        }
    }
    return os.str();
}

struct ManifestEntry {
    std::string file;
    std::size_t bytes;
    std::string sha256;
};

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
    out << bytes;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace detail

/// Writes all output files and manifest.json. Wall time goes to timing.json, outside the manifest.
inline std::vector<ManifestEntry> write_outputs(const MetricsReport& r, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " + ec.message());

    std::vector<std::pair<std::string, std::string>> files = {
        {"summary.json", summarize(r).dump(2) + "\n"},
        {"metrics.csv", metrics_csv(r)},
        {"trace.csv", trace_csv(r)},
        {"ccdf.csv", ccdf_csv(r)},
        {"psd.csv", psd_csv(r)},
    };
    if (r.config.run.scatter) files.emplace_back("scatter.csv", scatter_csv(r));
    for (const auto& d : r.drops) {
        if (d.channel) files.emplace_back("channel_drop" + std::to_string(d.drop) + ".json", channel_to_json(*d.channel).dump() + "\n");
    }
    std::vector<ManifestEntry> manifest;
    json mj = json::array();
    for (const auto& [name, bytes] : files) {
        detail::write_file(dir / name, bytes);
        manifest.push_back({name, bytes.size(), sha256_hex(bytes)});
        mj.push_back({{"file", name}, {"bytes", bytes.size()}, {"sha256", manifest.back().sha256}});
    }
    detail::write_file(dir / "manifest.json", json{{"files", mj}}.dump(2) + "\n");
    detail::write_file(dir / "timing.json", json{{"wall_time_s", r.wall_time_s}}.dump(2) + "\n");
    return manifest;
}

}  // namespace paprx
