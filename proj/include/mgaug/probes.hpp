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

// Fine-tuning behaviour probes: per-step query accuracy of the full network
// and of pruned sub-networks ("hat" profiles), and reactivation curves that
// compare differently trained initializations.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mgaug/model.hpp"
#include "mgaug/pruning.hpp"
#include "mgaug/tasks.hpp"

namespace mgaug {

struct ProbeConfig {
    LabelMode mode = LabelMode::NME;
    Split split = Split::Train;
    EpisodeShape shape;
    std::vector<double> rhos{0.2};
    Strategy strategy = Strategy::CP;
    std::size_t tasks = 100;
    int steps = 5;
    double alpha = 0.1;
    std::uint64_t seed = 0;
};

struct HatRow {
    std::string variant;
    double rho = 0.0;
    /// Index = inner step, 0 is before any update.
    std::vector<double> mean_acc;
    std::vector<double> stderr_;
    std::size_t n_tasks = 0;

    double gain() const { return mean_acc.back() - mean_acc.front(); }
};

struct HatProfile {
    HatRow baseline;
    /// One row per requested rho, same order as ProbeConfig::rhos.
    std::vector<HatRow> pruned;
    std::size_t tasks = 0;
};

/// Side-effect free on omega. Episodes and pruning draws depend only on
/// cfg.seed, so rows are reproducible bit for bit.
HatProfile memorization_probe(const ParamSet& omega, const ClassBank& bank, const ProbeConfig& cfg,
                              const std::string& variant = "model");

struct ReactivationRow {
    HatRow curve;
    double step0 = 0.0;
    double final_acc = 0.0;
    double gain = 0.0;
};

/// Unpruned fine-tuning curves for each named initialization on the same
/// probe episodes.
std::vector<ReactivationRow> reactivation_probe(const std::vector<std::pair<std::string, ParamSet>>& variants,
                                                const ClassBank& bank, const ProbeConfig& cfg);

/// CSV with header `variant,rho,step,mean_acc,stderr,n_tasks`.
void write_probe_csv(std::ostream& out, const std::vector<HatRow>& rows);
std::vector<HatRow> profile_rows(const HatProfile& p);

}  // namespace mgaug
