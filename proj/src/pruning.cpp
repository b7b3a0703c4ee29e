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

#include "mgaug/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgaug/errors.hpp"
#include "mgaug/rng.hpp"

namespace mgaug {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::None: return "none";
        case Strategy::WP: return "wp";
        case Strategy::PP: return "pp";
        case Strategy::CP: return "cp";
    }
    return "?";
}

Strategy parse_strategy(const std::string& s) {
    if (s == "none") return Strategy::None;
    if (s == "wp") return Strategy::WP;
    if (s == "pp") return Strategy::PP;
    if (s == "cp") return Strategy::CP;
    throw DomainError("unknown pruning strategy '" + s + "' (expected none|wp|pp|cp)");
}

MMCAScores mmca(const ParamSet& params, const Gradients& query_grad, std::uint64_t episode_id) {
    if (!query_grad.tensors.congruent(params.arch())) throw ContractError("mmca: gradient not congruent with parameters");
    MMCAScores s{query_grad.tensors, episode_id};
    for (std::size_t l = 0; l < s.tensors.layers.size(); ++l) {
        auto& dst = s.tensors.layers[l];
        const auto& p = params.layer(l);
        for (std::size_t i = 0; i < dst.weight.size(); ++i) dst.weight[i] *= p.weight[i];
        for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] *= p.bias[i];
    }
    return s;
}

std::size_t pruned_count(double rho, std::size_t n) {
    check_rho(rho);
    return static_cast<std::size_t>(std::floor(rho * static_cast<double>(n)));
}

Mask build_mask_cp(const MMCAScores& scores, double rho) {
    check_rho(rho);
    Mask m{scores.tensors, 0.0};
    std::vector<std::size_t> order;
    for (auto& layer : m.tensors.layers) {
        const std::size_t n = layer.size();
        const std::size_t k = pruned_count(rho, n);
        std::vector<double> mag(n);
        for (std::size_t j = 0; j < n; ++j) {
            mag[j] = std::abs(layer.get(j));
            if (!std::isfinite(mag[j])) throw NumericError("mmca score is not finite");
        }
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t a, std::size_t b) { return mag[a] > mag[b] || (mag[a] == mag[b] && a < b); });
        for (std::size_t j = 0; j < n; ++j) layer.ref(j) = 1.0;
        for (std::size_t i = 0; i < k; ++i) layer.ref(order[i]) = 0.0;
    }
    m.refresh_fraction();
    return m;
}

Mask build_mask_pp(const Arch& arch, double rho, std::uint64_t seed) {
    check_rho(rho);
    Rng rng(seed);
    Mask m = Mask::ones(arch);
    std::vector<std::size_t> idx;
    for (auto& layer : m.tensors.layers) {
        const std::size_t n = layer.size();
        const std::size_t k = pruned_count(rho, n);
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.below(n - i);
            std::swap(idx[i], idx[j]);
            layer.ref(idx[i]) = 0.0;
        }
    }
    m.refresh_fraction();
    return m;
}

bool PruningPlan::is_identity() const noexcept {
    if (strategy == Strategy::None) return true;
    if (mask) return mask->zeros() == 0;
    return false;
}

PruningPlan build_plan_wp(const Arch& arch, double rho) {
    PruningPlan p;
    p.strategy = Strategy::WP;
    p.rho = rho;
    p.slim_arch = slim_arch(arch, rho);
    return p;
}

PruningPlan build_plan_pp(const Arch& arch, double rho, std::uint64_t seed) {
    PruningPlan p;
    p.strategy = Strategy::PP;
    p.rho = rho;
    p.mask = build_mask_pp(arch, rho, seed);
    return p;
}

PruningPlan build_plan_cp(const MMCAScores& scores, double rho) {
    PruningPlan p;
    p.strategy = Strategy::CP;
    p.rho = rho;
    p.mask = build_mask_cp(scores, rho);
    return p;
}

double sample_rho(double rho_min, double rho_max, std::uint64_t seed) {
    if (!(rho_min >= 0.0) || !(rho_max <= 1.0) || rho_min > rho_max)
        throw DomainError("pruning-rate bounds must satisfy 0 <= rho_min <= rho_max <= 1");
    if (rho_min == rho_max) return rho_min;
    Rng rng(seed);
    const double r = rng.uniform(rho_min, rho_max);
    return r < rho_max ? r : std::nextafter(rho_max, rho_min);
}

}  // namespace mgaug
