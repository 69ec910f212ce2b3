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

// Command-line front end: run one experiment or sweep one config key.

#include "paprx/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAllFailed = 2;

std::vector<std::string> split_values(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string v;
    while (std::getline(ss, v, ',')) {
        if (!v.empty()) out.push_back(v);
    }
    return out;
}

void print_brief(const paprx::MetricsReport& r, const std::string& out_dir) {
    const auto s = paprx::summarize(r);
    const auto& a = s["aggregate"];
    std::cout << out_dir << ": drops ok " << r.n_ok() << "/" << r.drops.size();
    if (!a["papr_db_max_worst"].is_null()) {
        std::cout << "  papr worst " << a["papr_db_max_worst"].get<double>() << " dB"
                  << "  aclr worst " << a["aclr_db_max_worst"].get<double>() << " dB"
                  << "  est. EVM mean " << 100.0 * a["estevm_wb_mean"].get<double>() << " %";
    }
    std::cout << "  (" << r.wall_time_s << " s)\n";
    for (const auto& d : r.drops) {
        if (!d.ok) std::cerr << "  drop " << d.drop << " failed: " << d.error << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MIMO-OFDM PAPR reduction experiments"};
    app.footer(paprx::describe_config_keys());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> engine;
    std::optional<int> iters;
    std::vector<std::string> sets;

    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--seed", seed, "override run.seed");
    run->add_option("--engine", engine, "override solver.engine (topadmm, badmm, dys, icf)");
    run->add_option("--iters", iters, "override solver.max_iters");
    run->add_option("--set", sets, "override any key: path=value (repeatable)");

    std::string param;
    std::string values;
    auto* sw = app.add_subcommand("sweep", "run one experiment per value of a config key");
    sw->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sw->add_option("--out", out_dir, "output directory (one subdirectory per value)")->capture_default_str();
    sw->add_option("--param", param, "dotted config path, e.g. array.n_tx")->required();
    sw->add_option("--values", values, "comma-separated values")->required();
    sw->add_option("--seed", seed, "override run.seed");
    sw->add_option("--engine", engine, "override solver.engine");
    sw->add_option("--iters", iters, "override solver.max_iters");
    sw->add_option("--set", sets, "override any key: path=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    paprx::json tree;
    try {
        tree = paprx::load_config_file(config_path);
        if (seed) paprx::set_config_value(tree, "run.seed", *seed);
        if (engine) paprx::set_config_value(tree, "solver.engine", *engine);
        if (iters) {
            paprx::set_config_value(tree, "solver.max_iters", *iters);
            paprx::set_config_value(tree, "solver.icf.iters", *iters);
        }
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw paprx::ConfigError("--set expects path=value, got '" + kv + "'");
            paprx::set_config_value(tree, kv.substr(0, eq), paprx::parse_cli_value(kv.substr(eq + 1)));
        }
        (void)paprx::config_from_json(tree);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (run->parsed()) {
            const auto report = paprx::run_experiment(paprx::config_from_json(tree));
            paprx::write_outputs(report, out_dir);
            print_brief(report, out_dir);
            return report.drops.empty() || report.n_ok() > 0 ? kExitOk : kExitAllFailed;
        }
        std::vector<paprx::json> vals;
        const auto raw = split_values(values);
        for (const auto& v : raw) vals.push_back(paprx::parse_cli_value(v));
        std::vector<paprx::MetricsReport> reports;
        try {
            reports = paprx::sweep(tree, param, vals);
        } catch (const paprx::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
        bool any_ok = reports.empty();
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const std::string sub = (std::filesystem::path(out_dir) / (param + "=" + raw[i])).string();
            paprx::write_outputs(reports[i], sub);
            print_brief(reports[i], sub);
            any_ok = any_ok || reports[i].drops.empty() || reports[i].n_ok() > 0;
        }
        return any_ok ? kExitOk : kExitAllFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAllFailed;
    }
}
