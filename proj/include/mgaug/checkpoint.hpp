// Copyright 2026 The MGAug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Binary "MGCK" checkpoint container. Byte layout: docs/checkpoint_format.md.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgaug/model.hpp"

namespace mgaug {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingState {
    std::uint64_t epochs_done = 0;
    std::uint64_t meta_steps_done = 0;
    /// 0 = SGD (no moments), 1 = Adam.
    std::uint8_t optimizer = 0;
    std::uint64_t adam_t = 0;
    std::vector<double> adam_m;
    std::vector<double> adam_v;

    friend bool operator==(const TrainingState&, const TrainingState&) = default;
};

struct Checkpoint {
    ParamSet params;
    std::optional<TrainingState> state;
    std::optional<Mask> mask;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Writes via a temporary file and rename, so readers never see a torn file.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

/// Run-length encoding of a mask in flat (layer, weight, bias) order:
/// first value, then alternating run lengths.
struct MaskRuns {
    std::uint8_t first = 1;
    std::vector<std::uint32_t> runs;
};
MaskRuns encode_mask_runs(const Mask& mask);
Mask decode_mask_runs(const MaskRuns& runs, const Arch& arch);

}  // namespace mgaug
