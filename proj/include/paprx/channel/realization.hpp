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

#include "paprx/numerics/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace paprx {

struct ChannelMetadata {
    std::string profile_name;
    double delay_spread_s = 0.0;
    double k_factor = 0.0;  // linear Ricean K of the LOS tap, 0 when NLOS
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

/// Per-active-subcarrier channel matrices H[k] (N_R × N_T), stored in
/// active-set order: h[p] belongs to the p-th active bin.
struct ChannelRealization {
    std::vector<ComplexMatrix> h;
    ChannelMetadata meta;

    std::size_t n_active() const { return h.size(); }
    Eigen::Index n_rx() const { return h.empty() ? 0 : h.front().rows(); }
    Eigen::Index n_tx() const { return h.empty() ? 0 : h.front().cols(); }
};

}  // namespace paprx
