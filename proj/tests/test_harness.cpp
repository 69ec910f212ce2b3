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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace paprx;
namespace fs = std::filesystem;

namespace {

json tiny_tree() {
    return json::parse(R"({
        "array": {"n_tx": 4, "n_rx": 2, "n_layers": 2},
        "ofdm": {"fft_size": 64, "n_active": 24, "symbols_per_drop": 2, "bits_per_symbol": 4},
        "channel": {"n_taps": 4, "prg_subcarriers": 4},
        "solver": {"max_iters": 20},
        "run": {"drops": 2, "psd_segment": 64, "trace_every": 5}
    })");
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("paprx_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST(Config, DefaultsMatchKeyTable) {
    const auto c = config_from_json(json());
    EXPECT_EQ(c.array.n_tx, 16);
    EXPECT_EQ(c.ofdm.fft_size, 1024u);
    EXPECT_EQ(c.ofdm.n_active, 300u);
    EXPECT_EQ(c.solver.engine, Engine::topadmm);
    EXPECT_DOUBLE_EQ(c.solver.tau, 1.945);
    EXPECT_DOUBLE_EQ(c.solver.gamma_par_db, 4.0);
    EXPECT_DOUBLE_EQ(c.solver.zeta, 0.0);
    EXPECT_EQ(c.run.drops, 10);
    for (const auto& k : config_keys()) {
        EXPECT_TRUE(is_config_path(k.path)) << k.path;
    }
    EXPECT_NE(describe_config_keys().find("solver.dys.mu"), std::string::npos);
}

TEST(Config, UnknownOrMistypedKeysRejected) {
    EXPECT_THROW(config_from_json(json::parse(R"({"solver": {"tua": 1.0}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"run": {"drops": "ten"}})")), ConfigError);
    json t;
    EXPECT_THROW(set_config_value(t, "solver.nope", 1), ConfigError);
}

TEST(Config, EngineSpecificKeys) {
    auto t = tiny_tree();
    set_config_value(t, "solver.engine", "badmm");
    auto c = config_from_json(t);
    EXPECT_DOUBLE_EQ(c.solver.tau, 0.01);
    EXPECT_DOUBLE_EQ(c.solver.rho, 0.01);
    set_config_value(t, "solver.badmm.rho", 0.2);
    EXPECT_DOUBLE_EQ(config_from_json(t).solver.rho, 0.2);
    set_config_value(t, "solver.engine", "dys");
    set_config_value(t, "solver.dys.mu", 0.5);
    c = config_from_json(t);
    EXPECT_DOUBLE_EQ(c.solver.dys_mu, 0.5);
    EXPECT_DOUBLE_EQ(c.solver.tau, 1.945);
    set_config_value(t, "weights.csi_aware", false);
    EXPECT_DOUBLE_EQ(config_from_json(t).solver.zeta, 0.05);
    set_config_value(t, "solver.engine", "icf");
    set_config_value(t, "solver.icf.iters", 7);
    EXPECT_EQ(config_from_json(t).solver.max_iters, 7);
}

TEST(Config, ValidationErrors) {
    auto t = tiny_tree();
    set_config_value(t, "array.n_layers", 1);
    EXPECT_THROW(config_from_json(t), ConfigError);
    t = tiny_tree();
    set_config_value(t, "ofdm.fft_size", 96);
    EXPECT_THROW(config_from_json(t), ConfigError);
    t = tiny_tree();
    set_config_value(t, "solver.topadmm.tau", -1.0);
    EXPECT_THROW(config_from_json(t), ConfigError);
    t = tiny_tree();
    set_config_value(t, "solver.engine", "sgd");
    EXPECT_THROW(config_from_json(t), ConfigError);
}

TEST(Config, CliValuesAndCommentedFiles) {
    EXPECT_EQ(parse_cli_value("3"), json(3));
    EXPECT_EQ(parse_cli_value("null"), json(nullptr));
    EXPECT_EQ(parse_cli_value("dys"), json("dys"));
    const fs::path dir = scratch("cfgfile");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "c.json");
        out << "{\n  // comment\n  \"run\": {\"drops\": 3}\n}\n";
    }
    EXPECT_EQ(config_from_json(load_config_file((dir / "c.json").string())).run.drops, 3);
    EXPECT_THROW(load_config_file((dir / "missing.json").string()), ConfigError);
    fs::remove_all(dir);
}

class TinyRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() { report = new MetricsReport(run_experiment(config_from_json(tiny_tree()))); }
    static void TearDownTestSuite() {
        delete report;
        report = nullptr;
    }
    static MetricsReport* report;
};
MetricsReport* TinyRun::report = nullptr;

TEST_F(TinyRun, AllDropsSucceedWithSaneMetrics) {
    ASSERT_EQ(report->drops.size(), 2u);
    EXPECT_EQ(report->n_ok(), 2u);
    for (const auto& d : report->drops) {
        EXPECT_TRUE(d.ok) << d.error;
        EXPECT_LT(d.papr_db_max, d.x0_papr_db_max);
        EXPECT_EQ(d.papr_db.size(), 4u);
        EXPECT_EQ(d.estevm_wb_layer.size(), 2u);
        EXPECT_EQ(d.estevm_lk.size(), 48u);
        EXPECT_EQ(d.txevm_k.size(), 24u);
        EXPECT_TRUE(d.icf_papr_db_max.has_value());
        EXPECT_FALSE(d.trace.empty());
        EXPECT_GE(d.txevm_wb, d.predevm_wb * 0.0);
    }
}

TEST_F(TinyRun, IsDeterministic) {
    const auto again = run_experiment(config_from_json(tiny_tree()));
    EXPECT_EQ(metrics_csv(again), metrics_csv(*report));
    EXPECT_EQ(summarize(again).dump(), summarize(*report).dump());
    auto t = tiny_tree();
    set_config_value(t, "run.workers", 2);
    EXPECT_EQ(metrics_csv(run_experiment(config_from_json(t))), metrics_csv(*report));
    set_config_value(t, "run.seed", 2);
    EXPECT_NE(metrics_csv(run_experiment(config_from_json(t))), metrics_csv(*report));
}

TEST_F(TinyRun, MetricsCsvReaggregatesToSummary) {
    std::istringstream in(metrics_csv(*report));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "drop,metric,index,value");
    std::map<std::string, std::vector<double>> by_metric;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string drop, metric, index, value;
        std::getline(ls, drop, ',');
        std::getline(ls, metric, ',');
        std::getline(ls, index, ',');
        std::getline(ls, value, ',');
        if (index == "0") by_metric[metric].push_back(std::stod(value));
    }
    const auto agg = summarize(*report)["aggregate"];
    for (const char* m : {"papr_db_max", "aclr_db_max", "txevm_wb", "predevm_wb", "estevm_wb", "iterations"}) {
        const auto& v = by_metric[m];
        ASSERT_EQ(v.size(), 2u) << m;
        const double mean = (v[0] + v[1]) / 2.0;
        EXPECT_NEAR(mean, agg[std::string(m) + "_mean"].get<double>(), 1e-9 * std::max(1.0, std::abs(mean))) << m;
    }
    EXPECT_NEAR(std::max(by_metric["papr_db_max"][0], by_metric["papr_db_max"][1]),
                agg["papr_db_max_worst"].get<double>(), 1e-12);
}

TEST_F(TinyRun, WritesOutputsWithManifest) {
    const fs::path dir = scratch("outputs");
    const auto manifest = write_outputs(*report, dir.string());
    for (const char* f : {"summary.json", "metrics.csv", "trace.csv", "ccdf.csv", "psd.csv", "manifest.json", "timing.json"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    for (const auto& e : manifest) {
        const auto bytes = slurp(dir / e.file);
        EXPECT_EQ(bytes.size(), e.bytes);
        EXPECT_EQ(sha256_hex(bytes), e.sha256);
    }
    const auto summary = json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(summary["format"], "paprx-summary/1");
    EXPECT_EQ(summary["metadata"]["drops_ok"], 2);
    EXPECT_EQ(summary["config"]["array"]["n_tx"], 4);
    fs::remove_all(dir);
}

TEST(Output, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Runner, ZeroDropsGiveEmptySummary) {
    auto t = tiny_tree();
    set_config_value(t, "run.drops", 0);
    const auto r = run_experiment(config_from_json(t));
    const auto s = summarize(r);
    EXPECT_TRUE(s["metadata"]["zero_drop"].get<bool>());
    EXPECT_TRUE(s["aggregate"]["papr_db_max_mean"].is_null());
    const fs::path dir = scratch("zero");
    write_outputs(r, dir.string());
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    fs::remove_all(dir);
}

TEST(Runner, FailedDropIsRecordedNotFatal) {
    auto t = tiny_tree();
    set_config_value(t, "run.drops", 1);
    set_config_value(t, "run.compare_icf", false);
    const fs::path dir = scratch("zero_channel");
    fs::create_directories(dir);
    save_channel(zero_channel(4, 2, 24), (dir / "h.json").string());
    set_config_value(t, "channel.import_path", (dir / "h.json").string());
    const auto r = run_experiment(config_from_json(t));
    fs::remove_all(dir);
    ASSERT_EQ(r.drops.size(), 1u);
    EXPECT_FALSE(r.drops[0].ok);
    EXPECT_FALSE(r.drops[0].error.empty());
    const auto s = summarize(r);
    EXPECT_EQ(s["metadata"]["failures"].size(), 1u);
}

TEST(Runner, SweepGivesDisjointStreams) {
    auto t = tiny_tree();
    set_config_value(t, "run.drops", 1);
    set_config_value(t, "run.compare_icf", false);
    EXPECT_TRUE(sweep(t, "solver.gamma_par_db", {}).empty());
    const auto out = sweep(t, "solver.gamma_par_db", {json(3.0), json(3.0)});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[1].config.run.stream_offset - out[0].config.run.stream_offset, std::uint64_t{1} << 32);
    EXPECT_NE(out[0].drops[0].x0_papr_db_max, out[1].drops[0].x0_papr_db_max);
    EXPECT_THROW(sweep(t, "solver.bogus", {json(1)}), ConfigError);
}

TEST(Runner, ChannelExportRoundTrips) {
    auto t = tiny_tree();
    set_config_value(t, "run.drops", 1);
    set_config_value(t, "run.compare_icf", false);
    set_config_value(t, "channel.export", true);
    const auto r = run_experiment(config_from_json(t));
    ASSERT_TRUE(r.drops[0].channel.has_value());
    const fs::path dir = scratch("export");
    write_outputs(r, dir.string());
    set_config_value(t, "channel.import_path", (dir / "channel_drop0.json").string());
    set_config_value(t, "channel.export", false);
    const auto again = run_experiment(config_from_json(t));
    ASSERT_TRUE(again.drops[0].ok) << again.drops[0].error;
    EXPECT_NEAR(again.drops[0].x0_papr_db_max, r.drops[0].x0_papr_db_max, 1e-9);
    fs::remove_all(dir);
}
