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

#include <json.hpp>

#include <fstream>
#include <string>

namespace paprx {

// Channel dump schema (JSON):
// {
//   "format": "paprx-channel/1",
//   "n_rx": int, "n_tx": int, "n_active": int,
//   "metadata": {"profile": str, "delay_spread_s": num, "k_factor": num, "seed": int, "stream_id": int},
//   "subcarriers": [{"k": int, "re": [[...] per rx row], "im": [[...]]}, ...]
// }
// k is the position inside the active set.

inline constexpr const char* kChannelFormat = "paprx-channel/1";

inline nlohmann::json channel_to_json(const ChannelRealization& h) {
    nlohmann::json j;
    j["format"] = kChannelFormat;
    j["n_rx"] = h.n_rx();
    j["n_tx"] = h.n_tx();
    j["n_active"] = h.n_active();
    j["metadata"] = {{"profile", h.meta.profile_name},
                     {"delay_spread_s", h.meta.delay_spread_s},
                     {"k_factor", h.meta.k_factor},
                     {"seed", h.meta.seed},
                     {"stream_id", h.meta.stream_id}};
    auto& subs = j["subcarriers"] = nlohmann::json::array();
    for (std::size_t p = 0; p < h.n_active(); ++p) {
        nlohmann::json re = nlohmann::json::array();
        nlohmann::json im = nlohmann::json::array();
        for (Eigen::Index r = 0; r < h.n_rx(); ++r) {
            nlohmann::json rr = nlohmann::json::array();
            nlohmann::json ri = nlohmann::json::array();
            for (Eigen::Index t = 0; t < h.n_tx(); ++t) {
                rr.push_back(h.h[p](r, t).real());
                ri.push_back(h.h[p](r, t).imag());
            }
            re.push_back(std::move(rr));
            im.push_back(std::move(ri));
        }
        subs.push_back({{"k", p}, {"re", std::move(re)}, {"im", std::move(im)}});
    }
    return j;
}

inline ChannelRealization channel_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kChannelFormat) {
            throw ValidationError("channel dump: unsupported format tag");
        }
        const auto n_rx = j.at("n_rx").get<Eigen::Index>();
        const auto n_tx = j.at("n_tx").get<Eigen::Index>();
        const auto n_active = j.at("n_active").get<std::size_t>();
        ChannelRealization h;
        const auto& m = j.at("metadata");
        h.meta = {m.at("profile").get<std::string>(), m.at("delay_spread_s").get<double>(),
                  m.at("k_factor").get<double>(), m.at("seed").get<std::uint64_t>(),
                  m.at("stream_id").get<std::uint64_t>()};
        h.h.assign(n_active, ComplexMatrix::Zero(n_rx, n_tx));
        std::vector<bool> seen(n_active, false);
        for (const auto& s : j.at("subcarriers")) {
            const auto p = s.at("k").get<std::size_t>();
            if (p >= n_active || seen[p]) throw ValidationError("channel dump: bad or duplicate subcarrier key");
            seen[p] = true;
            const auto& re = s.at("re");
            const auto& im = s.at("im");
            if (static_cast<Eigen::Index>(re.size()) != n_rx || static_cast<Eigen::Index>(im.size()) != n_rx) {
                throw ValidationError("channel dump: wrong row count");
            }
            for (Eigen::Index r = 0; r < n_rx; ++r) {
                if (static_cast<Eigen::Index>(re[r].size()) != n_tx || static_cast<Eigen::Index>(im[r].size()) != n_tx) {
                    throw ValidationError("channel dump: wrong column count");
                }
                for (Eigen::Index t = 0; t < n_tx; ++t) {
                    h.h[p](r, t) = {re[r][t].get<double>(), im[r][t].get<double>()};
                }
            }
        }
        for (bool b : seen) {
            if (!b) throw ValidationError("channel dump: missing subcarrier");
        }
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("channel dump: ") + e.what());
    }
}

inline void save_channel(const ChannelRealization& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << channel_to_json(h).dump() << '\n';
}

inline ChannelRealization load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return channel_from_json(nlohmann::json::parse(in));
}

}  // namespace paprx
