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
#include "paprx/solvers/engines.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace paprx {

using json = nlohmann::json;

struct ArrayConfig {
    int n_tx = 16;
    int n_rx = 2;
    int n_layers = 2;
};

struct OfdmConfig {
    std::size_t fft_size = 1024;
    std::size_t n_active = 300;
    double subcarrier_spacing_hz = 15e3;
    int bits_per_symbol = 8;
    int symbols_per_drop = 14;
};

struct ChannelConfig {
    double delay_spread_ns = 30.0;
    std::size_t n_taps = 12;
    std::optional<double> k_factor = 9.0;  // linear; empty for Rayleigh
    double los_aod_deg = 30.0;
    double los_aoa_deg = 45.0;
    double corr_tx = 0.9;
    double corr_rx = 0.9;
    std::optional<double> estimation_snr_db = 5.0;  // empty for perfect CSI
    std::size_t prg_subcarriers = 24;
    std::string import_path;
    bool export_realizations = false;
};

struct WeightsConfig {
    bool csi_aware = true;
    double nu = 0.001;
    double lambda = 1.0;
    bool normalize_lipschitz = true;
    std::optional<double> evm_threshold_pct;
};

struct RunConfig {
    int drops = 10;
    std::uint64_t seed = 1;
    std::uint64_t stream_offset = 0;
    int workers = 1;
    int trace_every = 10;
    bool trace_all_symbols = false;
    bool compare_icf = true;
    std::size_t psd_segment = 1024;
    std::size_t window_rolloff_samples = 0;
    bool scatter = false;
};

struct ExperimentConfig {
    std::string scenario = "desk";
    ArrayConfig array;
    OfdmConfig ofdm;
    ChannelConfig channel;
    double rzf_alpha = 0.001;
    WeightsConfig weights;
    SolverConfig solver;
    int icf_iters = 10;
    RunConfig run;
    json source;  // fully resolved tree, echoed into outputs

    void validate() const {
        if (array.n_tx < 1 || array.n_rx < 1 || array.n_layers < 1) {
            throw ConfigError("array: antenna and layer counts must be >= 1");
        }
        if (array.n_layers > std::min(array.n_tx, array.n_rx)) {
            throw ConfigError("array.n_layers must not exceed min(n_tx, n_rx)");
        }
        if (array.n_layers != array.n_rx) {
            throw ConfigError("array.n_layers must equal n_rx (one layer per receive antenna)");
        }
        if (ofdm.fft_size < 2 || (ofdm.fft_size & (ofdm.fft_size - 1)) != 0) {
            throw ConfigError("ofdm.fft_size must be a power of two");
        }
        if (ofdm.n_active < 1 || ofdm.n_active >= ofdm.fft_size) {
            throw ConfigError("ofdm.n_active must be in [1, fft_size)");
        }
        if (ofdm.symbols_per_drop < 1) throw ConfigError("ofdm.symbols_per_drop must be >= 1");
        if (!(ofdm.subcarrier_spacing_hz > 0.0)) throw ConfigError("ofdm.subcarrier_spacing_hz must be > 0");
        if (!(channel.delay_spread_ns >= 0.0) || channel.n_taps < 1) throw ConfigError("channel: bad delay profile");
        if (channel.k_factor && !(*channel.k_factor >= 0.0)) throw ConfigError("channel.k_factor must be >= 0");
        if (!(channel.corr_tx >= 0.0 && channel.corr_tx <= 1.0) || !(channel.corr_rx >= 0.0 && channel.corr_rx <= 1.0)) {
            throw ConfigError("channel: correlation coefficients must lie in [0, 1]");
        }
        if (channel.prg_subcarriers < 1) throw ConfigError("channel.prg_subcarriers must be >= 1");
        if (!(rzf_alpha >= 0.0)) throw ConfigError("precoder.rzf_alpha must be >= 0");
        if (!(weights.nu >= 0.0) || !(weights.lambda >= 0.0)) throw ConfigError("weights: nu and lambda must be >= 0");
        if (icf_iters < 1) throw ConfigError("solver.icf.iters must be >= 1");
        if (run.drops < 0) throw ConfigError("run.drops must be >= 0");
        if (run.workers < 1) throw ConfigError("run.workers must be >= 1");
        if (run.trace_every < 0) throw ConfigError("run.trace_every must be >= 0");
        if (run.psd_segment < 2 || (run.psd_segment & (run.psd_segment - 1)) != 0) {
            throw ConfigError("run.psd_segment must be a power of two");
        }
        if (run.psd_segment > ofdm.fft_size * static_cast<std::size_t>(ofdm.symbols_per_drop)) {
            throw ConfigError("run.psd_segment exceeds the samples of one drop");
        }
        try {
            solver.validate();
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("solver: ") + e.what());
        }
    }
};

struct ConfigKey {
    const char* path;
    json default_value;
    const char* help;
};

/// Every recognized key with its default. `null` defaults are optional values.
inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"scenario", "desk", "free-form scenario label"},
        {"array.n_tx", 16, "transmit antennas"},
        {"array.n_rx", 2, "receive antennas"},
        {"array.n_layers", 2, "spatial layers (must equal n_rx)"},
        {"ofdm.fft_size", 1024, "oversampled FFT length, power of two"},
        {"ofdm.n_active", 300, "active subcarriers, centred on DC"},
        {"ofdm.subcarrier_spacing_hz", 15000.0, "subcarrier spacing"},
        {"ofdm.bits_per_symbol", 8, "QAM order in bits: 2, 4, 6 or 8"},
        {"ofdm.symbols_per_drop", 14, "OFDM symbols per drop (static channel within a drop)"},
        {"channel.delay_spread_ns", 30.0, "RMS delay spread of the exponential tap profile"},
        {"channel.n_taps", 12, "taps spanning 0..4x delay spread"},
        {"channel.k_factor", 9.0, "Ricean K of the first tap (linear); null for Rayleigh"},
        {"channel.los_aod_deg", 30.0, "LOS departure angle"},
        {"channel.los_aoa_deg", 45.0, "LOS arrival angle"},
        {"channel.corr_tx", 0.9, "transmit exponential correlation coefficient"},
        {"channel.corr_rx", 0.9, "receive exponential correlation coefficient"},
        {"channel.estimation_snr_db", 5.0, "transmitter channel estimate SNR; null for perfect CSI"},
        {"channel.prg_subcarriers", 24, "subcarriers per precoding resource group"},
        {"channel.import_path", "", "load the true channel from a JSON dump instead of drawing it"},
        {"channel.export", false, "write channel_drop<N>.json per drop"},
        {"precoder.rzf_alpha", 0.001, "RZF regularization"},
        {"weights.csi_aware", true, "use the estimated channel in the EVM weights; false gives Q = nu*I"},
        {"weights.nu", 0.001, "Gram-matrix regularization"},
        {"weights.lambda", 1.0, "multiplier on Q (ignored when normalize_lipschitz)"},
        {"weights.normalize_lipschitz", true, "scale Q so its largest eigenvalue over all bins is 1"},
        {"weights.evm_threshold_pct", nullptr, "per-(layer,k) estimated EVM threshold, reporting only"},
        {"solver.engine", "topadmm", "topadmm, badmm, dys or icf"},
        {"solver.mode", "P3", "P3 (iteration-dependent sets) or P4 (fixed sets)"},
        {"solver.radius_anchor", "split", "split (PAPR from Z, ACLR from X) or xbar"},
        {"solver.max_iters", 1000, "iterations per OFDM symbol"},
        {"solver.gamma_par_db", 4.0, "PAPR target"},
        {"solver.psi_aclr_db", -50.0, "ACLR target"},
        {"solver.zeta", nullptr, "extra quadratic weight; null gives 0 (CSI-aware) or 0.05 (non-CSI)"},
        {"solver.stop_tol", 1e-4, "early stop when both residuals < stop_tol * ||x0||"},
        {"solver.early_stop", true, "enable early stop"},
        {"solver.topadmm.tau", 1.945, "TOP-ADMM step size"},
        {"solver.badmm.tau", 0.01, "BADMM dual step"},
        {"solver.badmm.rho", 0.01, "BADMM penalty"},
        {"solver.badmm.rho_x", 1.0, "BADMM Bregman weight on X"},
        {"solver.badmm.rho_z", 1.0, "BADMM Bregman weight on Z"},
        {"solver.dys.tau", 1.945, "DYS step size"},
        {"solver.dys.mu", 1.0, "DYS relaxation"},
        {"solver.icf.iters", 10, "ICF iterations (engine icf and the baseline comparison)"},
        {"run.drops", 10, "Monte-Carlo drops"},
        {"run.seed", 1, "base seed"},
        {"run.stream_offset", 0, "added to every drop stream id"},
        {"run.workers", 1, "drops solved concurrently"},
        {"run.trace_every", 10, "metric snapshot period in iterations; 0 disables snapshots"},
        {"run.trace_all_symbols", false, "trace every symbol instead of the first of each drop"},
        {"run.compare_icf", true, "also run the ICF baseline on every symbol"},
        {"run.psd_segment", 1024, "PSD segment length"},
        {"run.window_rolloff_samples", 0, "raised-cosine edge taper applied before the PSD"},
        {"run.scatter", false, "write scatter.csv (equalized vs reference symbols)"},
    };
    return keys;
}

namespace detail {

inline std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string p;
    while (std::getline(ss, p, '.')) parts.push_back(p);
    if (parts.empty()) throw ConfigError("empty config path");
    return parts;
}

inline json default_tree() {
    json tree = json::object();
    for (const auto& k : config_keys()) {
        json* node = &tree;
        for (const auto& part : split_path(k.path)) node = &(*node)[part];
        *node = k.default_value;
    }
    return tree;
}

inline void overlay(json& base, const json& patch, const std::string& prefix) {
    if (!patch.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
        json& dst = base[it.key()];
        if (dst.is_object()) {
            overlay(dst, it.value(), path);
        } else {
            if (it.value().is_object()) throw ConfigError("config key '" + path + "' is not a section");
            dst = it.value();
        }
    }
}

template <typename T>
T get_as(const json& tree, const std::string& path) {
    const json* node = &tree;
    for (const auto& part : split_path(path)) node = &node->at(part);
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + path + "' has the wrong type");
    }
}

template <typename T>
std::optional<T> get_opt(const json& tree, const std::string& path) {
    const json* node = &tree;
    for (const auto& part : split_path(path)) node = &node->at(part);
    if (node->is_null()) return std::nullopt;
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + path + "' has the wrong type");
    }
}

}  // namespace detail

/// True when `path` names a recognized leaf key.
inline bool is_config_path(const std::string& path) {
    for (const auto& k : config_keys()) {
        if (path == k.path) return true;
    }
    return false;
}

/// Sets a leaf key in a (partial) config tree, creating sections as needed.
inline void set_config_value(json& tree, const std::string& path, json value) {
    if (!is_config_path(path)) throw ConfigError("unknown config key '" + path + "'");
    json* node = &tree;
    for (const auto& part : detail::split_path(path)) node = &(*node)[part];
    *node = std::move(value);
}

/// Parses a CLI value: JSON literal if it parses, otherwise a plain string.
inline json parse_cli_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        return json(text);
    }
}

inline ExperimentConfig config_from_json(const json& file) {
    json tree = detail::default_tree();
    if (!file.is_null()) detail::overlay(tree, file, "");
    using detail::get_as;
    using detail::get_opt;
    ExperimentConfig c;
    try {
        c.scenario = get_as<std::string>(tree, "scenario");
        c.array = {get_as<int>(tree, "array.n_tx"), get_as<int>(tree, "array.n_rx"), get_as<int>(tree, "array.n_layers")};
        c.ofdm = {get_as<std::size_t>(tree, "ofdm.fft_size"), get_as<std::size_t>(tree, "ofdm.n_active"),
                  get_as<double>(tree, "ofdm.subcarrier_spacing_hz"), get_as<int>(tree, "ofdm.bits_per_symbol"),
                  get_as<int>(tree, "ofdm.symbols_per_drop")};
        auto& ch = c.channel;
        ch.delay_spread_ns = get_as<double>(tree, "channel.delay_spread_ns");
        ch.n_taps = get_as<std::size_t>(tree, "channel.n_taps");
        ch.k_factor = get_opt<double>(tree, "channel.k_factor");
        ch.los_aod_deg = get_as<double>(tree, "channel.los_aod_deg");
        ch.los_aoa_deg = get_as<double>(tree, "channel.los_aoa_deg");
        ch.corr_tx = get_as<double>(tree, "channel.corr_tx");
        ch.corr_rx = get_as<double>(tree, "channel.corr_rx");
        ch.estimation_snr_db = get_opt<double>(tree, "channel.estimation_snr_db");
        ch.prg_subcarriers = get_as<std::size_t>(tree, "channel.prg_subcarriers");
        ch.import_path = get_as<std::string>(tree, "channel.import_path");
        ch.export_realizations = get_as<bool>(tree, "channel.export");
        c.rzf_alpha = get_as<double>(tree, "precoder.rzf_alpha");
        c.weights = {get_as<bool>(tree, "weights.csi_aware"), get_as<double>(tree, "weights.nu"),
                     get_as<double>(tree, "weights.lambda"), get_as<bool>(tree, "weights.normalize_lipschitz"),
                     get_opt<double>(tree, "weights.evm_threshold_pct")};

        const Engine engine = engine_from_string(get_as<std::string>(tree, "solver.engine"));
        SolverConfig s = SolverConfig::defaults(engine);
        s.mode = mode_from_string(get_as<std::string>(tree, "solver.mode"));
        s.anchor = anchor_from_string(get_as<std::string>(tree, "solver.radius_anchor"));
        s.max_iters = get_as<int>(tree, "solver.max_iters");
        s.gamma_par_db = get_as<double>(tree, "solver.gamma_par_db");
        s.psi_aclr_db = get_as<double>(tree, "solver.psi_aclr_db");
        s.zeta = get_opt<double>(tree, "solver.zeta").value_or(c.weights.csi_aware ? 0.0 : 0.05);
        s.stop_tol = get_as<double>(tree, "solver.stop_tol");
        s.early_stop = get_as<bool>(tree, "solver.early_stop");
        switch (engine) {
            case Engine::topadmm: s.tau = get_as<double>(tree, "solver.topadmm.tau"); break;
            case Engine::badmm:
                s.tau = get_as<double>(tree, "solver.badmm.tau");
                s.rho = get_as<double>(tree, "solver.badmm.rho");
                s.badmm_rho_x = get_as<double>(tree, "solver.badmm.rho_x");
                s.badmm_rho_z = get_as<double>(tree, "solver.badmm.rho_z");
                break;
            case Engine::dys:
                s.tau = get_as<double>(tree, "solver.dys.tau");
                s.dys_mu = get_as<double>(tree, "solver.dys.mu");
                break;
            case Engine::icf: break;
        }
        c.solver = s;
        c.icf_iters = get_as<int>(tree, "solver.icf.iters");
        if (engine == Engine::icf) c.solver.max_iters = c.icf_iters;

        auto& r = c.run;
        r.drops = get_as<int>(tree, "run.drops");
        r.seed = get_as<std::uint64_t>(tree, "run.seed");
        r.stream_offset = get_as<std::uint64_t>(tree, "run.stream_offset");
        r.workers = get_as<int>(tree, "run.workers");
        r.trace_every = get_as<int>(tree, "run.trace_every");
        r.trace_all_symbols = get_as<bool>(tree, "run.trace_all_symbols");
        r.compare_icf = get_as<bool>(tree, "run.compare_icf");
        r.psd_segment = get_as<std::size_t>(tree, "run.psd_segment");
        r.window_rolloff_samples = get_as<std::size_t>(tree, "run.window_rolloff_samples");
        r.scatter = get_as<bool>(tree, "run.scatter");
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    c.source = std::move(tree);
    c.validate();
    return c;
}

inline json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
}

inline std::string describe_config_keys() {
    std::ostringstream os;
    os << "Config keys (JSON, dotted path = nested section):\n";
    for (const auto& k : config_keys()) {
        os << "  " << k.path << " = " << k.default_value.dump() << "\n      " << k.help << "\n";
    }
    return os.str();
}

}  // namespace paprx
