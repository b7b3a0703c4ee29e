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

#include "mgaug/mgaug.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "mgaug/checkpoint.hpp"
#include "mgaug/errors.hpp"
#include "mgaug/harness.hpp"
#include "mgaug/pacbayes.hpp"
#include "mgaug/version.hpp"

struct mgaug_config {
    mgaug::RunConfig cfg;
};

struct mgaug_model {
    mgaug::ParamSet params;
};

namespace {

thread_local std::string g_last_error;

mgaug_status status_of(mgaug::ErrorKind k) {
    switch (k) {
        case mgaug::ErrorKind::Dimension: return MGAUG_ERR_DIMENSION;
        case mgaug::ErrorKind::Domain: return MGAUG_ERR_DOMAIN;
        case mgaug::ErrorKind::Contract: return MGAUG_ERR_CONTRACT;
        case mgaug::ErrorKind::Numeric: return MGAUG_ERR_NUMERIC;
        case mgaug::ErrorKind::Config: return MGAUG_ERR_CONFIG;
        case mgaug::ErrorKind::Io: return MGAUG_ERR_IO;
    }
    return MGAUG_ERR_INTERNAL;
}

template <class F>
mgaug_status guarded(F&& f) noexcept {
    try {
        f();
        return MGAUG_OK;
    } catch (const mgaug::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return MGAUG_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MGAUG_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return MGAUG_ERR_INTERNAL;
    }
}

mgaug_status bad_arg(const char* what) {
    g_last_error = std::string("null argument: ") + what;
    return MGAUG_ERR_ARGUMENT;
}

mgaug_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
    if (needed) *needed = s.size() + 1;
    if (!buf || cap < s.size() + 1) {
        g_last_error = "buffer too small";
        return MGAUG_ERR_BUFFER;
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return MGAUG_OK;
}

void fill(const mgaug::BoundTerms& t, mgaug_bound_terms* out) {
    out->empirical = t.empirical;
    out->environment = t.environment;
    out->task = t.task;
    out->total = t.total;
}

}  // namespace

extern "C" {

const char* mgaug_version(void) { return mgaug::kVersion; }

const char* mgaug_last_error(void) { return g_last_error.c_str(); }

const char* mgaug_status_name(mgaug_status s) {
    switch (s) {
        case MGAUG_OK: return "ok";
        case MGAUG_ERR_DIMENSION: return "dimension error";
        case MGAUG_ERR_DOMAIN: return "domain error";
        case MGAUG_ERR_CONTRACT: return "contract error";
        case MGAUG_ERR_NUMERIC: return "numeric error";
        case MGAUG_ERR_CONFIG: return "config error";
        case MGAUG_ERR_IO: return "io error";
        case MGAUG_ERR_ARGUMENT: return "invalid argument";
        case MGAUG_ERR_BUFFER: return "buffer too small";
        case MGAUG_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

mgaug_status mgaug_config_create(mgaug_config** out) {
    if (!out) return bad_arg("out");
    return guarded([&] { *out = new mgaug_config{}; });
}

mgaug_status mgaug_config_load(const char* path, mgaug_config** out) {
    if (!path) return bad_arg("path");
    if (!out) return bad_arg("out");
    return guarded([&] { *out = new mgaug_config{mgaug::load_config(path)}; });
}

mgaug_status mgaug_config_set(mgaug_config* cfg, const char* key, const char* value) {
    if (!cfg) return bad_arg("cfg");
    if (!key || !value) return bad_arg("key/value");
    return guarded([&] { cfg->cfg.set(key, value); });
}

mgaug_status mgaug_config_get(const mgaug_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
    if (!cfg) return bad_arg("cfg");
    if (!key) return bad_arg("key");
    std::string v;
    const mgaug_status st = guarded([&] { v = cfg->cfg.get(key); });
    return st != MGAUG_OK ? st : copy_out(v, buf, cap, needed);
}

mgaug_status mgaug_config_echo(const mgaug_config* cfg, char* buf, size_t cap, size_t* needed) {
    if (!cfg) return bad_arg("cfg");
    return copy_out(cfg->cfg.echo(), buf, cap, needed);
}

mgaug_status mgaug_config_validate(const mgaug_config* cfg) {
    if (!cfg) return bad_arg("cfg");
    return guarded([&] { cfg->cfg.validate(); });
}

void mgaug_config_destroy(mgaug_config* cfg) { delete cfg; }

mgaug_status mgaug_train(const mgaug_config* cfg) {
    if (!cfg) return bad_arg("cfg");
    return guarded([&] { mgaug::run(cfg->cfg); });
}

mgaug_status mgaug_resume(const mgaug_config* cfg, const char* checkpoint_path) {
    if (!cfg) return bad_arg("cfg");
    if (!checkpoint_path) return bad_arg("checkpoint_path");
    return guarded([&] { mgaug::resume(checkpoint_path, cfg->cfg); });
}

mgaug_status mgaug_model_init(const mgaug_config* cfg, mgaug_model** out) {
    if (!cfg) return bad_arg("cfg");
    if (!out) return bad_arg("out");
    return guarded([&] {
        cfg->cfg.validate();
        *out = new mgaug_model{mgaug::init_params(cfg->cfg.arch(), cfg->cfg.init_stream())};
    });
}

mgaug_status mgaug_model_load(const char* path, mgaug_model** out) {
    if (!path) return bad_arg("path");
    if (!out) return bad_arg("out");
    return guarded([&] { *out = new mgaug_model{mgaug::load_checkpoint(path).params}; });
}

mgaug_status mgaug_model_save(const mgaug_model* model, const char* path) {
    if (!model) return bad_arg("model");
    if (!path) return bad_arg("path");
    return guarded([&] {
        mgaug::Checkpoint ck;
        ck.params = model->params;
        mgaug::save_checkpoint(path, ck);
    });
}

mgaug_status mgaug_model_num_params(const mgaug_model* model, size_t* out) {
    if (!model) return bad_arg("model");
    if (!out) return bad_arg("out");
    *out = model->params.num_params();
    return MGAUG_OK;
}

void mgaug_model_destroy(mgaug_model* model) { delete model; }

mgaug_status mgaug_evaluate(const mgaug_model* model, const mgaug_config* cfg, const char* split, size_t episodes,
                            double* mean_acc, double* stderr_acc) {
    if (!model) return bad_arg("model");
    if (!cfg) return bad_arg("cfg");
    if (!split) return bad_arg("split");
    if (!mean_acc) return bad_arg("mean_acc");
    return guarded([&] {
        cfg->cfg.validate();
        if (!(model->params.arch() == cfg->cfg.arch()))
            throw mgaug::ContractError("model architecture does not match the configuration");
        const mgaug::EvalResult r = mgaug::evaluate_split(model->params, cfg->cfg, mgaug::parse_split(split), episodes);
        *mean_acc = r.mean;
        if (stderr_acc) *stderr_acc = r.stderr_;
    });
}

mgaug_status mgaug_probe(const mgaug_model* model, const mgaug_config* cfg, const char* csv_path) {
    if (!model) return bad_arg("model");
    if (!cfg) return bad_arg("cfg");
    if (!csv_path) return bad_arg("csv_path");
    return guarded([&] {
        mgaug::RunConfig c = cfg->cfg;
        c.probe = true;
        c.validate();
        if (!(model->params.arch() == c.arch()))
            throw mgaug::ContractError("model architecture does not match the configuration");
        const mgaug::ClassBank bank = mgaug::make_bank(c.bank_spec());
        const mgaug::HatProfile prof = mgaug::memorization_probe(model->params, bank, c.probe_config(), "model");
        std::ofstream f(csv_path, std::ios::binary | std::ios::trunc);
        if (!f) throw mgaug::IoError(std::string("cannot write '") + csv_path + "'");
        mgaug::write_probe_csv(f, mgaug::profile_rows(prof));
        if (!f) throw mgaug::IoError(std::string("write failed on '") + csv_path + "'");
    });
}

mgaug_status mgaug_bound_from_file(const char* path, mgaug_bound_terms* out) {
    if (!path) return bad_arg("path");
    if (!out) return bad_arg("out");
    return guarded([&] {
        std::ifstream f(path);
        if (!f) throw mgaug::IoError(std::string("cannot open '") + path + "'");
        fill(mgaug::bound_terms(mgaug::read_bound_inputs(f)), out);
    });
}

mgaug_status mgaug_bound_compute(size_t tasks, const size_t* samples, double delta, double kl_hyper,
                                 const double* theta_norms_sq, double rho, const double* empirical_errors,
                                 mgaug_bound_terms* out) {
    if (!out) return bad_arg("out");
    if (tasks > 0 && (!samples || !theta_norms_sq || !empirical_errors)) return bad_arg("per-task arrays");
    return guarded([&] {
        mgaug::BoundInputs in;
        in.samples.assign(samples, samples + tasks);
        in.delta = delta;
        in.kl_hyper = kl_hyper;
        in.theta_norms_sq.assign(theta_norms_sq, theta_norms_sq + tasks);
        in.rho = rho;
        in.empirical_errors.assign(empirical_errors, empirical_errors + tasks);
        fill(mgaug::bound_terms(in), out);
    });
}

}  // extern "C"
