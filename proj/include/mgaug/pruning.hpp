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

// Inner-loop pruning strategies: width pruning (WP), random parameter
// pruning (PP) and catfish pruning (CP) driven by MMCA scores.

#include <cstdint>
#include <optional>
#include <string>

#include "mgaug/model.hpp"

namespace mgaug {

enum class Strategy : std::uint8_t { None, WP, PP, CP };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

/// Meta-memorization carrying amount per parameter, first-order estimate
/// dL/dtheta_j * theta_j of the query-loss change when theta_j is removed.
struct MMCAScores {
    LayeredTensors tensors;
    std::uint64_t episode_id = 0;
};

MMCAScores mmca(const ParamSet& params, const Gradients& query_grad, std::uint64_t episode_id = 0);

/// Per layer, zeroes the floor(rho * n_l) entries with largest |score|.
/// Equal magnitudes: the lower flat index is pruned first.
Mask build_mask_cp(const MMCAScores& scores, double rho);

/// Per layer, exactly floor(rho * n_l) zeros at uniformly random positions.
Mask build_mask_pp(const Arch& arch, double rho, std::uint64_t seed);

/// Number of entries pruned from a layer of n parameters.
std::size_t pruned_count(double rho, std::size_t n);

struct PruningPlan {
    Strategy strategy = Strategy::None;
    double rho = 0.0;
    std::optional<Mask> mask;       // PP / CP
    std::optional<Arch> slim_arch;  // WP

    bool is_identity() const noexcept;
};

PruningPlan build_plan_wp(const Arch& arch, double rho);
PruningPlan build_plan_pp(const Arch& arch, double rho, std::uint64_t seed);
PruningPlan build_plan_cp(const MMCAScores& scores, double rho);

/// Uniform in [rho_min, rho_max). Equal bounds give the point rho_min.
double sample_rho(double rho_min, double rho_max, std::uint64_t seed);

}  // namespace mgaug
