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

// Command-line front end. Talks to the library only through the C API.
//
// Precedence of configuration sources, lowest first: built-in defaults,
// the --config file, --set overrides in command-line order, then --seed and
// --out.

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgaug/mgaug.h"

namespace {

struct ConfigDeleter {
    void operator()(mgaug_config* c) const { mgaug_config_destroy(c); }
};
struct ModelDeleter {
    void operator()(mgaug_model* m) const { mgaug_model_destroy(m); }
};
using ConfigPtr = std::unique_ptr<mgaug_config, ConfigDeleter>;
using ModelPtr = std::unique_ptr<mgaug_model, ModelDeleter>;

struct Failure {
    int code;
};

void check(mgaug_status st, const char* what) {
    if (st == MGAUG_OK) return;
    std::fprintf(stderr, "mgaug: %s failed (%s): %s\n", what, mgaug_status_name(st), mgaug_last_error());
    throw Failure{static_cast<int>(st)};
}

struct CommonOpts {
    std::string config;
    std::optional<unsigned long long> seed;
    std::string out;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required) {
    auto* c = cmd->add_option("--config", o.config, "flat key = value configuration file");
    if (config_required) c->required();
    cmd->add_option("--seed", o.seed, "master seed (overrides the file)");
    cmd->add_option("--out", o.out, "output directory (overrides the file)");
    cmd->add_option("--set", o.sets, "key=value override, repeatable");
}

ConfigPtr build_config(const CommonOpts& o) {
    mgaug_config* raw = nullptr;
    if (o.config.empty())
        check(mgaug_config_create(&raw), "creating config");
    else
        check(mgaug_config_load(o.config.c_str(), &raw), "loading config");
    ConfigPtr cfg(raw);
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "mgaug: --set expects key=value, got '%s'\n", s.c_str());
            throw Failure{MGAUG_ERR_CONFIG};
        }
        check(mgaug_config_set(cfg.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()), "--set");
    }
    if (o.seed) check(mgaug_config_set(cfg.get(), "seed", std::to_string(*o.seed).c_str()), "--seed");
    if (!o.out.empty()) check(mgaug_config_set(cfg.get(), "out", o.out.c_str()), "--out");
    check(mgaug_config_validate(cfg.get()), "validating config");
    return cfg;
}

std::string get_key(const mgaug_config* cfg, const char* key) {
    size_t need = 0;
    mgaug_config_get(cfg, key, nullptr, 0, &need);
    std::string buf(need, '\0');
    check(mgaug_config_get(cfg, key, buf.data(), buf.size(), &need), "reading config");
    buf.resize(need - 1);
    return buf;
}

ModelPtr load_model(const std::string& path) {
    mgaug_model* raw = nullptr;
    check(mgaug_model_load(path.c_str(), &raw), "loading checkpoint");
    return ModelPtr(raw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-gradient augmentation for meta-learning"};
    app.set_version_flag("--version", std::string(mgaug_version()));
    app.require_subcommand(1);

    CommonOpts train_o, resume_o, probe_o, eval_o;
    std::string resume_ck, probe_ck, probe_csv, eval_ck, eval_split = "test", bound_file;
    std::optional<size_t> eval_n;

    auto* train = app.add_subcommand("train", "meta-train from scratch");
    add_common(train, train_o, false);

    auto* res = app.add_subcommand("resume", "continue a run from its checkpoint");
    add_common(res, resume_o, false);
    res->add_option("--checkpoint", resume_ck, "checkpoint (default <out>/checkpoint.mgck)");

    auto* probe = app.add_subcommand("probe", "per-step fine-tuning profile of a checkpoint");
    add_common(probe, probe_o, false);
    probe->add_option("--checkpoint", probe_ck, "checkpoint to probe")->required();
    probe->add_option("--csv", probe_csv, "output CSV (default <out>/probe.csv)");

    auto* eval = app.add_subcommand("eval", "fine-tune and score a checkpoint");
    add_common(eval, eval_o, false);
    eval->add_option("--checkpoint", eval_ck, "checkpoint to evaluate")->required();
    eval->add_option("--split", eval_split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
    eval->add_option("--episodes", eval_n, "number of episodes (default eval_episodes)");

    auto* bnd = app.add_subcommand("bound", "evaluate the PAC-Bayes bound from an inputs file");
    bnd->add_option("--input", bound_file, "bound inputs (T, m, delta, kl_hyper, theta_norms_sq, rho, empirical_errors)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            ConfigPtr cfg = build_config(train_o);
            check(mgaug_train(cfg.get()), "training");
            std::printf("wrote %s\n", get_key(cfg.get(), "out").c_str());
        } else if (*res) {
            ConfigPtr cfg = build_config(resume_o);
            const std::string ck = resume_ck.empty() ? get_key(cfg.get(), "out") + "/checkpoint.mgck" : resume_ck;
            check(mgaug_resume(cfg.get(), ck.c_str()), "resuming");
            std::printf("wrote %s\n", get_key(cfg.get(), "out").c_str());
        } else if (*probe) {
            ConfigPtr cfg = build_config(probe_o);
            ModelPtr model = load_model(probe_ck);
            const std::string csv = probe_csv.empty() ? get_key(cfg.get(), "out") + "/probe.csv" : probe_csv;
            check(mgaug_probe(model.get(), cfg.get(), csv.c_str()), "probing");
            std::printf("wrote %s\n", csv.c_str());
        } else if (*eval) {
            ConfigPtr cfg = build_config(eval_o);
            ModelPtr model = load_model(eval_ck);
            const size_t n = eval_n ? *eval_n : std::stoul(get_key(cfg.get(), "eval_episodes"));
            double mean = 0.0, se = 0.0;
            check(mgaug_evaluate(model.get(), cfg.get(), eval_split.c_str(), n, &mean, &se), "evaluating");
            std::printf("split=%s episodes=%zu accuracy=%.6f stderr=%.6f\n", eval_split.c_str(), n, mean, se);
        } else if (*bnd) {
            mgaug_bound_terms t{};
            check(mgaug_bound_from_file(bound_file.c_str(), &t), "computing bound");
            std::printf("empirical=%.17g\nenvironment=%.17g\ntask=%.17g\ntotal=%.17g\n", t.empirical, t.environment,
                        t.task, t.total);
        }
    } catch (const Failure& f) {
        return f.code;
    }
    return 0;
}
