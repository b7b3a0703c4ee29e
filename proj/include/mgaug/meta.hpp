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

// Two-loop meta-learning: FoMAML and ProtoNet inner loops with optional
// pruning, and the augmented outer update (sum and MaxUp variants).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mgaug/checkpoint.hpp"
#include "mgaug/model.hpp"
#include "mgaug/pruning.hpp"
#include "mgaug/tasks.hpp"

namespace mgaug {

enum class Method : std::uint8_t { FoMAML, ProtoNet };
enum class Variant : std::uint8_t { Sum, MaxUp };

std::string to_string(Method m);
std::string to_string(Variant v);
Method parse_method(const std::string& s);
Variant parse_variant(const std::string& s);

struct InnerResult {
    /// Adapted parameters; slimmed when the pass ran on a WP sub-network.
    ParamSet fine_tuned;
    std::optional<Mask> mask;
    std::optional<Arch> slim_arch;
    double query_loss = 0.0;
    double query_accuracy = 0.0;
    /// Query-loss gradient, always in the layout of the full omega.
    Gradients meta_grad;
    /// Query accuracy after i updates; empty unless requested.
    std::vector<double> step_accuracies;
};

/// theta <- theta - alpha * (m (.) grad(theta)) repeated `steps` times,
/// starting from m (.) init. `grad_fn` returns the loss gradient at theta.
ParamSet gradient_descent(const ParamSet& init, const Mask* mask, int steps, double alpha,
                          const std::function<Gradients(const ParamSet&)>& grad_fn,
                          const std::function<void(int, const ParamSet&)>& on_step = {});

/// First-order MAML inner loop on the support set; the meta-gradient is the
/// query-loss gradient at the adapted parameters.
InnerResult inner_fomaml(const ParamSet& omega, const Episode& episode, const Mask* mask, int steps, double alpha,
                         bool record_steps = false);

struct ProtoPass {
    ForwardPass fp;
    Var prototypes;
    Var logits;
    Var loss;
};

/// Embeds support and query with one recorded pass; prototypes are per-way
/// mean support embeddings and logits are negative squared distances.
ProtoPass protonet_forward(const ParamSet& params, const Mask* mask, const Episode& episode);

InnerResult inner_protonet(const ParamSet& omega, const Episode& episode, const Mask* mask);

struct MetaConfig {
    Method method = Method::FoMAML;
    Strategy strategy = Strategy::None;
    Variant variant = Variant::Sum;
    std::size_t subnets = 0;  // U
    double rho_min = 0.0;
    double rho_max = 0.2;
    int steps = 5;
    double alpha = 0.1;
    double beta = 1e-3;
    /// Divides the summed update by (U + 1).
    bool normalize_by_copies = false;
    /// Scores CP with the query gradient at the initialization instead of at
    /// the fine-tuned parameters.
    bool mmca_at_init = false;
    bool record_steps = false;
    unsigned threads = 1;

    void validate() const;
};

struct TaskReport {
    InnerResult full;
    std::vector<InnerResult> subs;
    std::vector<double> rhos;
    /// Copy that supplied the MaxUp gradient: 0 = full, u + 1 = sub-network u.
    std::size_t contributor = 0;
    /// g_t, this task's contribution before averaging over tasks.
    Gradients task_grad;
};

struct MetaUpdateReport {
    std::vector<TaskReport> tasks;
    /// (1/T) sum_t g_t (additionally / (U+1) when normalizing).
    Gradients aggregated;
    double beta = 0.0;
    Variant variant = Variant::Sum;

    double mean_full_loss() const;
    double mean_full_accuracy() const;
};

/// Runs every task's full and pruned passes and assembles the update
/// direction. Pruning randomness for task t, sub-network u comes from
/// derive_seed(prune_seed, {t, u}).
MetaUpdateReport compute_meta_update(const ParamSet& omega, std::span<const Episode> episodes, const MetaConfig& cfg,
                                     std::uint64_t prune_seed);

enum class OptimizerKind : std::uint8_t { SGD, Adam };

/// Outer-loop optimizer. SGD applies omega - beta * g; Adam uses the
/// standard moment estimates with learning rate beta.
class Optimizer {
public:
    explicit Optimizer(OptimizerKind kind = OptimizerKind::SGD) : kind_(kind) {}

    OptimizerKind kind() const noexcept { return kind_; }
    ParamSet step(const ParamSet& omega, const Gradients& g, double beta);

    void export_state(TrainingState& s) const;
    void import_state(const TrainingState& s, std::size_t num_params);

    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

private:
    OptimizerKind kind_;
    std::uint64_t t_ = 0;
    std::vector<double> m_, v_;
};

std::pair<ParamSet, MetaUpdateReport> meta_step_mgaug(const ParamSet& omega, std::span<const Episode> episodes,
                                                      const MetaConfig& cfg, std::uint64_t prune_seed,
                                                      Optimizer& opt);

struct EvalResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::vector<double> accuracies;
};

/// Mean and standard error (sample std / sqrt(n)) of per-value accuracies.
EvalResult summarize(std::vector<double> accuracies);

/// Read-only: fine-tunes a copy per episode and reports final query accuracy.
EvalResult evaluate(const ParamSet& omega, std::span<const Episode> episodes, Method method, int steps, double alpha);

}  // namespace mgaug
