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

// Experiment orchestration: configuration, the training loop, metrics and
// checkpoint persistence.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mgaug/meta.hpp"
#include "mgaug/probes.hpp"
#include "mgaug/tasks.hpp"

namespace mgaug {

/// Every tunable of a run. Keys of the flat text form match the field names
/// (see RunConfig::keys()).
struct RunConfig {
    Method method = Method::FoMAML;
    Strategy strategy = Strategy::None;
    Variant variant = Variant::Sum;
    std::size_t U = 0;
    double rho_min = 0.0;
    double rho_max = 0.2;
    std::size_t N = 5;
    std::size_t K = 1;
    std::size_t Q = 15;
    LabelMode mode = LabelMode::NME;
    std::size_t T = 4;
    std::size_t epochs = 200;
    std::size_t episodes_per_epoch = 100;
    double alpha = 0.1;
    double beta = 1e-3;
    int inner_steps = 5;
    OptimizerKind optimizer = OptimizerKind::SGD;
    bool normalize_by_copies = false;
    bool mmca_at_init = false;

    std::vector<std::size_t> hidden{32};
    /// Output width for ProtoNet embeddings (FoMAML always uses N).
    std::size_t embed_dim = 16;

    std::size_t bank_train = 20;
    std::size_t bank_val = 10;
    std::size_t bank_test = 10;
    std::size_t dim = 16;
    double spread = 0.3;

    std::uint64_t seed = 0;
    /// Independent streams; when unset they are derived from `seed`.
    std::optional<std::uint64_t> bank_seed, episode_seed, init_seed, prune_seed, eval_seed;

    std::size_t val_episodes = 100;
    std::size_t eval_episodes = 600;
    unsigned threads = 1;

    bool probe = false;
    std::size_t probe_tasks = 100;
    std::vector<double> probe_rhos{0.2};
    Strategy probe_strategy = Strategy::CP;
    Split probe_split = Split::Train;

    /// D(Q||P) for the per-epoch diagnostic bound; disabled when unset.
    std::optional<double> bound_kl;
    double bound_delta = 0.1;

    std::string out = "run";

    static const std::vector<std::string>& keys();
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    /// Throws ConfigError describing the first invalid field.
    void validate() const;

    std::uint64_t bank_stream() const;
    std::uint64_t episode_stream() const;
    std::uint64_t init_stream() const;
    std::uint64_t prune_stream() const;
    /// Validation, test and probe episodes.
    std::uint64_t eval_stream() const;

    Arch arch() const;
    BankSpec bank_spec() const;
    EpisodeShape shape() const;
    MetaConfig meta() const;
    ProbeConfig probe_config() const;

    /// Every key with its resolved value, one `key = value` per line.
    std::string echo() const;
};

RunConfig load_config(const std::string& path);

struct MetricsRow {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    std::optional<double> bound;
};

/// Append-only CSV whose rows are written with one write(2) each and synced,
/// so an interrupted run leaves only whole rows behind.
class CsvAppender {
public:
    CsvAppender(const std::string& path, const std::string& header);
    ~CsvAppender();
    CsvAppender(const CsvAppender&) = delete;
    CsvAppender& operator=(const CsvAppender&) = delete;

    void append(const std::string& row);

private:
    int fd_ = -1;
    std::string path_;
};

std::string metrics_header(bool with_bound);
std::string format_metrics_row(const MetricsRow& r, bool with_bound);
/// Parses metrics.csv, ignoring a trailing line without newline.
std::vector<MetricsRow> read_metrics(const std::string& path);

/// The bank, fixed validation episodes and training stream of one run.
struct RunData {
    ClassBank bank;
    std::vector<Episode> val;
};
RunData make_run_data(const RunConfig& cfg);

/// Training episode `index` (global across epochs).
Episode train_episode(const RunConfig& cfg, const ClassBank& bank, std::uint64_t index);

struct RunResult {
    ParamSet omega;
    std::vector<MetricsRow> metrics;
};

struct RunHooks {
    /// Called after every meta-step with the report it applied.
    std::function<void(std::uint64_t step, const MetaUpdateReport&)> on_step;
};

/// Trains from scratch into cfg.out: metrics.csv, timing.csv, config.txt,
/// checkpoint.mgck and, when enabled, probe.csv.
RunResult run(const RunConfig& cfg, const RunHooks& hooks = {});

/// Continues from a checkpoint with training state up to cfg.epochs total.
/// Existing metrics rows past the checkpoint are dropped before appending.
RunResult resume(const std::string& checkpoint_path, const RunConfig& cfg, const RunHooks& hooks = {});

/// Trains in memory only (no files); used by tests and experiments.
RunResult train_in_memory(const RunConfig& cfg, const RunHooks& hooks = {});

/// Mean query accuracy after fine-tuning on cfg.eval_episodes test episodes.
EvalResult evaluate_split(const ParamSet& omega, const RunConfig& cfg, Split split, std::size_t episodes);

}  // namespace mgaug
